#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ncbayes/expfam.hpp"
#include "ncbayes/gibbs.hpp"
#include "ncbayes/torus_graph.hpp"
#include "ncbayes/tv_density.hpp"

namespace ncbayes {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; ValidationError when absent.
  int column(const std::string& name) const;
};

// Comma-separated file with a header row. Blank lines are skipped; every row
// must have the header's width.
CsvTable read_csv(const std::string& path);
double parse_double(const std::string& cell, const std::string& path, std::size_t row);

// Numeric CSV with a header line; values printed with 17 significant digits.
void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values);
void write_draws_csv(const std::string& path, const PosteriorDraws& draws);
// Rows t,x,y,mean,lo,hi.
void write_density_grid_csv(const std::string& path, const DensityGrid& grid);

struct PhaseData {
  RowMatrix angles;
  std::vector<std::string> channels;
  std::vector<std::string> regions;
  int wrapped = 0;
};
// n x d angle CSV (header optional: a first row that fails to parse is a
// header). The optional JSON sidecar holds {"channels": [...], "regions": [...]}.
PhaseData read_phase_csv(const std::string& path, const std::string& sidecar = "");

std::vector<std::string> default_node_labels(int d);
void write_dot(const std::string& path, const EdgeDecisionReport& report, const std::vector<std::string>& labels);
// Rows j,k,strength,decision with one-based node indices.
void write_edge_list_csv(const std::string& path, const EdgeDecisionReport& report);
// Posterior medians and 50% intervals of the four coefficients of each listed edge.
void write_interval_csv(const std::string& path, const Eigen::MatrixXd& draws, int d, const std::vector<int>& edges);

std::string sha256_file(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& value);

// Record of one CLI run: configuration, seed, timings, digests, outputs and
// diagnostic flags.
class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json config, std::uint64_t seed);

  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void set_diagnostic(const std::string& key, nlohmann::json value);
  void start_stage(const std::string& name);
  void end_stage();
  nlohmann::json to_json() const;
  void write(const std::string& path) const;

 private:
  std::string command_;
  nlohmann::json config_;
  std::uint64_t seed_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json diagnostics_ = nlohmann::json::object();
  nlohmann::json stages_ = nlohmann::json::array();
  std::string stage_;
  std::chrono::steady_clock::time_point stage_start_;
};

}  // namespace ncbayes
