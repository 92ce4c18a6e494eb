#include "ncbayes/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "ncbayes/errors.hpp"
#include "ncbayes/stats.hpp"

namespace ncbayes {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

bool try_parse(const std::string& cell, double& value) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  auto [ptr, ec] = std::from_chars(b, e, value);
  return ec == std::errc() && ptr == e && !cell.empty();
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<int>(j);
  throw ValidationError("missing CSV column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw ValidationError(path + ": row " + std::to_string(table.rows.size() + 1) + " has " +
                            std::to_string(cells.size()) + " cells, expected " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ValidationError(path + ": empty CSV file");
  return table;
}

double parse_double(const std::string& cell, const std::string& path, std::size_t row) {
  double v = 0.0;
  if (!try_parse(cell, v) || !std::isfinite(v))
    throw ValidationError(path + ": row " + std::to_string(row + 1) + ": not a finite number '" + cell + "'");
  return v;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
  require(header.size() == static_cast<std::size_t>(values.cols()), "CSV header width does not match the matrix");
  auto out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << values(i, j);
    out << '\n';
  }
}

void write_draws_csv(const std::string& path, const PosteriorDraws& draws) {
  write_matrix_csv(path, draws.column_names, draws.draws);
}

void write_density_grid_csv(const std::string& path, const DensityGrid& grid) {
  require(grid.points.cols() == 2, "density grid export needs two-dimensional points");
  auto out = open_out(path);
  out << "t,x,y,mean,lo,hi\n";
  for (Eigen::Index t = 0; t < grid.mean.rows(); ++t)
    for (Eigen::Index i = 0; i < grid.points.rows(); ++i)
      out << t + 1 << ',' << grid.points(i, 0) << ',' << grid.points(i, 1) << ',' << grid.mean(t, i) << ','
          << grid.lo(t, i) << ',' << grid.hi(t, i) << '\n';
}

PhaseData read_phase_csv(const std::string& path, const std::string& sidecar) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  bool first = true;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::vector<double> vals(cells.size());
    bool numeric = true;
    for (std::size_t j = 0; j < cells.size(); ++j) numeric = numeric && try_parse(cells[j], vals[j]);
    if (first && !numeric) {
      header = cells;
      width = cells.size();
      first = false;
      continue;
    }
    first = false;
    if (!numeric) throw ValidationError(path + ": row " + std::to_string(rows.size() + 1) + " is not numeric");
    if (width == 0) width = vals.size();
    if (vals.size() != width) throw ValidationError(path + ": ragged row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ValidationError(path + ": no phase rows");
  PhaseData out;
  out.angles.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) out.angles(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  out.wrapped = wrap_phases(out.angles);
  out.channels = header.empty() ? default_node_labels(static_cast<int>(width)) : header;
  if (!sidecar.empty()) {
    std::ifstream js(sidecar);
    if (!js) throw ValidationError("cannot read '" + sidecar + "'");
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(js);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(sidecar + ": " + e.what());
    }
    if (meta.contains("channels")) out.channels = meta["channels"].get<std::vector<std::string>>();
    if (meta.contains("regions")) out.regions = meta["regions"].get<std::vector<std::string>>();
    require(out.channels.size() == width, sidecar + ": channel count does not match the phase columns");
    require(out.regions.empty() || out.regions.size() == width, sidecar + ": region count does not match the phase columns");
  }
  return out;
}

std::vector<std::string> default_node_labels(int d) {
  std::vector<std::string> out;
  for (int j = 1; j <= d; ++j) out.push_back("x" + std::to_string(j));
  return out;
}

void write_dot(const std::string& path, const EdgeDecisionReport& report, const std::vector<std::string>& labels) {
  require(static_cast<int>(labels.size()) == report.d, "node label count does not match d");
  auto out = open_out(path);
  out << "graph torus {\n";
  for (int j = 0; j < report.d; ++j) out << "  n" << j + 1 << " [label=\"" << labels[static_cast<std::size_t>(j)] << "\"];\n";
  for (int e = 0; e < torus_edge_count(report.d); ++e) {
    if (!report.decisions[static_cast<std::size_t>(e)]) continue;
    const auto [j, k] = torus_edge_nodes(e, report.d);
    out << "  n" << j + 1 << " -- n" << k + 1 << " [weight=" << report.strengths[e] << "];\n";
  }
  out << "}\n";
}

void write_edge_list_csv(const std::string& path, const EdgeDecisionReport& report) {
  auto out = open_out(path);
  out << "j,k,strength,decision\n";
  for (int e = 0; e < torus_edge_count(report.d); ++e) {
    const auto [j, k] = torus_edge_nodes(e, report.d);
    out << j + 1 << ',' << k + 1 << ',' << report.strengths[e] << ',' << (report.decisions[static_cast<std::size_t>(e)] ? 1 : 0)
        << '\n';
  }
}

void write_interval_csv(const std::string& path, const Eigen::MatrixXd& draws, int d, const std::vector<int>& edges) {
  require(draws.cols() >= torus_coefficient_count(d), "draw width too small for the graph");
  const Eigen::VectorXd med = column_quantile(draws, 0.5);
  const Eigen::VectorXd lo = column_quantile(draws, 0.25);
  const Eigen::VectorXd hi = column_quantile(draws, 0.75);
  auto out = open_out(path);
  out << "j,k,l,median,lo50,hi50\n";
  for (int e : edges) {
    const auto [j, k] = torus_edge_nodes(e, d);
    for (int l = 0; l < 4; ++l) {
      const int c = 2 * d + 4 * e + l;
      out << j + 1 << ',' << k + 1 << ',' << l + 1 << ',' << med[c] << ',' << lo[c] << ',' << hi[c] << '\n';
    }
  }
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericalError("SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

void write_json(const std::string& path, const nlohmann::json& value) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << value.dump(2) << '\n';
}

RunManifest::RunManifest(std::string command, nlohmann::json config, std::uint64_t seed)
    : command_(std::move(command)), config_(std::move(config)), seed_(seed) {}

void RunManifest::add_input(const std::string& path) {
  inputs_.push_back({{"path", path}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_output(const std::string& path) { outputs_.push_back(path); }

void RunManifest::set_diagnostic(const std::string& key, nlohmann::json value) { diagnostics_[key] = std::move(value); }

void RunManifest::start_stage(const std::string& name) {
  if (!stage_.empty()) end_stage();
  stage_ = name;
  stage_start_ = std::chrono::steady_clock::now();
}

void RunManifest::end_stage() {
  if (stage_.empty()) return;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - stage_start_).count();
  stages_.push_back({{"stage", stage_}, {"seconds", secs}});
  stage_.clear();
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command_}, {"seed", seed_},       {"config", config_},         {"stages", stages_},
          {"inputs", inputs_},   {"outputs", outputs_}, {"diagnostics", diagnostics_}};
}

void RunManifest::write(const std::string& path) const { write_json(path, to_json()); }

}  // namespace ncbayes
