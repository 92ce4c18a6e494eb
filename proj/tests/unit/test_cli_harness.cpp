#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"

#include "ncbayes/errors.hpp"
#include "ncbayes/experiments.hpp"
#include "ncbayes/io.hpp"
#include "ncbayes/torus_graph.hpp"

namespace fs = std::filesystem;
using namespace ncbayes;

namespace {

const char* exe() { return NC_BAYES_EXE; }

struct Sandbox {
  fs::path dir;
  Sandbox() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("ncbayes_cli_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(exe()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& path) {
  std::vector<std::string> out;
  std::istringstream in(slurp(path));
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

nlohmann::json read_json_file(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

}  // namespace

TEST_CASE("exit codes") {
  Sandbox box;
  CHECK(run("tv simulate --reps 0 --out " + (box / "a")) == 2);
  CHECK(run("torus simulate --reps 0 --out " + (box / "a")) == 2);
  CHECK(run("reproduce --table 2 --reps 0 --out " + (box / "a")) == 2);
  CHECK(run("torus simulate --scenario ring --out " + (box / "a")) == 2);
  CHECK(run("--no-such-flag") == 2);
  CHECK(run("torus fit --input " + (box / "missing.csv")) == 2);
  CHECK(run("torus simulate --reps 1 --iterations 10 --burn-in 10 --out " + (box / "a")) == 2);
  {
    std::ofstream f(box / "bad.csv");
    f << "a,b\n1,x\n";
  }
  CHECK(run("torus fit --input " + (box / "bad.csv") + " --out " + (box / "b")) == 2);
  // Overflowing loss scale: the Gaussian draw itself is non-finite.
  {
    std::ofstream f(box / "ph.csv");
    f << "a,b\n1.0,2.0\n0.5,0.1\n3,4\n";
  }
  CHECK(run("torus fit-hbayes --input " + (box / "ph.csv") + " --w 1e308 --iterations 20 --burn-in 5 --out " +
            (box / "c")) == 3);
  CHECK(run("pg-selftest --out " + (box / "d")) == 0);
}

TEST_CASE("reproduce validates its plan") {
  ExperimentPlan plan;
  plan.reps = 0;
  CHECK_THROWS_AS(plan.validate(), ValidationError);
}

TEST_CASE("identical seeds give byte-identical metrics") {
  Sandbox box;
  const std::string args = "torus simulate --scenario chain --reps 2 --iterations 150 --burn-in 50 --seed 77";
  REQUIRE(run(args + " --out " + (box / "a")) == 0);
  REQUIRE(run(args + " --jobs 2 --out " + (box / "b")) == 0);
  REQUIRE(run("torus simulate --scenario chain --reps 2 --iterations 150 --burn-in 50 --seed 78 --out " + (box / "c")) == 0);
  CHECK(slurp(box / "a/metrics.json") == slurp(box / "b/metrics.json"));
  CHECK(slurp(box / "a/metrics.json") != slurp(box / "c/metrics.json"));

  const auto diag = read_json_file(box / "a/manifest.json")["diagnostics"]["replications"];
  REQUIRE(diag.size() == 2);
  CHECK(diag[0]["seed"] != diag[1]["seed"]);
  CHECK(diag[0]["true_edges"] == 11);
}

TEST_CASE("seed sources") {
  Sandbox box;
  REQUIRE(run("pg-selftest --out " + (box / "env"), "NC_BAYES_SEED=4242") == 0);
  CHECK(read_json_file(box / "env/manifest.json")["seed"] == 4242);
  REQUIRE(run("pg-selftest --seed 17 --out " + (box / "flag"), "NC_BAYES_SEED=4242") == 0);
  CHECK(read_json_file(box / "flag/manifest.json")["seed"] == 17);
  CHECK(run("pg-selftest --out " + (box / "x"), "NC_BAYES_SEED=abc") == 2);

  {
    std::ofstream f(box / "run.toml");
    f << "[pg-selftest]\nseed = 5\n";
  }
  REQUIRE(run("--config " + (box / "run.toml") + " pg-selftest --out " + (box / "cfg")) == 0);
  CHECK(read_json_file(box / "cfg/manifest.json")["seed"] == 5);
  REQUIRE(run("--config " + (box / "run.toml") + " pg-selftest --seed 9 --out " + (box / "cfg2")) == 0);
  CHECK(read_json_file(box / "cfg2/manifest.json")["seed"] == 9);
}

TEST_CASE("density study outputs") {
  Sandbox box;
  const std::string out = box / "tv";
  REQUIRE(run("tv simulate --scenario 2 --reps 1 --iterations 120 --burn-in 60 --seed 3 --out " + out) == 0);
  const auto grid = lines(out + "/grid-s2-n1.csv");
  REQUIRE(grid.size() > 1);
  CHECK(grid[0] == "t,x,y,mean,lo,hi");
  const std::regex row(R"(^\d+(,[-+0-9.eE]+){5}$)");
  for (std::size_t i = 1; i < std::min<std::size_t>(grid.size(), 50); ++i) CHECK(std::regex_match(grid[i], row));

  const auto m = read_json_file(out + "/manifest.json");
  CHECK(m["command"] == "tv simulate");
  CHECK(m["config"]["--scenario"] == "2");
  CHECK(m["seed"] == 3);
  CHECK(m["stages"].size() >= 1);
  CHECK(m["diagnostics"].contains("ess_warning"));
  for (const auto& o : m["outputs"]) {
    CHECK(fs::exists(o.get<std::string>()));
    CHECK(o.get<std::string>().rfind(out, 0) == 0);
  }
  const auto metrics = read_json_file(out + "/metrics.json");
  CHECK(metrics["replications"].size() == 1);
}

TEST_CASE("graph fit outputs") {
  Sandbox box;
  const GeneratedGraphData g = generate_cycle_rejection(1000, 5);
  {
    std::ofstream f(box / "phases.csv");
    f.precision(17);
    f << "c1,c2,c3,c4,c5\n";
    for (Eigen::Index i = 0; i < g.data.rows(); ++i)
      f << g.data(i, 0) << ',' << g.data(i, 1) << ',' << g.data(i, 2) << ',' << g.data(i, 3) << ',' << g.data(i, 4) << '\n';
  }
  const std::string out = box / "fit";
  REQUIRE(run("torus fit --input " + (box / "phases.csv") + " --iterations 800 --burn-in 300 --seed 2 --out " + out) == 0);

  const auto edges = lines(out + "/edges-median.csv");
  REQUIRE(edges.size() == 11);
  CHECK(edges[0] == "j,k,strength,decision");
  int detected = 0;
  for (std::size_t i = 1; i < edges.size(); ++i) detected += edges[i].back() == '1';
  const auto intervals = lines(out + "/intervals.csv");
  CHECK(intervals[0] == "j,k,l,median,lo50,hi50");
  CHECK(intervals.size() == static_cast<std::size_t>(4 * detected + 1));
  MESSAGE("detected " << detected << " edges");

  const auto dot = lines(out + "/graph-median.dot");
  CHECK(dot.front() == "graph torus {");
  CHECK(dot.back() == "}");
  const std::regex node(R"(^  n\d+ \[label="[^"]*"\];$)");
  const std::regex edge(R"(^  n\d+ -- n\d+ \[weight=[-+0-9.eE]+\];$)");
  int dot_edges = 0, dot_nodes = 0;
  for (std::size_t i = 1; i + 1 < dot.size(); ++i) {
    if (std::regex_match(dot[i], node)) ++dot_nodes;
    else if (std::regex_match(dot[i], edge)) ++dot_edges;
    else FAIL("unexpected DOT line: " << dot[i]);
  }
  CHECK(dot_nodes == 5);
  CHECK(dot_edges == detected);

  const auto m = read_json_file(out + "/manifest.json");
  REQUIRE(m["inputs"].size() == 1);
  CHECK(m["inputs"][0]["sha256"] == sha256_file(box / "phases.csv"));
  CHECK(m["diagnostics"].contains("jitter_retries"));
  const auto draws = lines(out + "/draws.csv");
  CHECK(draws.size() == 501);
}

TEST_CASE("interval CSV of a five-edge toy") {
  Sandbox box;
  RandomStream rng(1);
  Eigen::MatrixXd draws(50, torus_coefficient_count(5));
  for (Eigen::Index i = 0; i < draws.size(); ++i) draws.data()[i] = rng.normal();
  write_interval_csv(box / "iv.csv", draws, 5, {0, 2, 4, 6, 9});
  const auto rows = lines(box / "iv.csv");
  CHECK(rows.size() == 21);
  CHECK(rows[1].rfind("1,2,1,", 0) == 0);
  CHECK(rows[20].rfind("4,5,4,", 0) == 0);
}

TEST_CASE("file digest") {
  Sandbox box;
  {
    std::ofstream f(box / "abc.txt", std::ios::binary);
    f << "abc";
  }
  CHECK(sha256_file(box / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("table 2 layout") {
  Sandbox box;
  const std::string out = box / "t2";
  REQUIRE(run("reproduce --table 2 --reps 2 --iterations 150 --burn-in 50 --out " + out) == 0);
  const auto csv = lines(out + "/table-2.csv");
  REQUIRE(csv.size() == 6);
  CHECK(csv[0] == "method,w,noise_update,value,recall,precision,accuracy");
  CHECK(csv[1].rfind("nc-bayes,NA,False,0.100,", 0) == 0);
  CHECK(csv[2].rfind("nc-bayes,NA,True,0.100,", 0) == 0);
  CHECK(csv[3].rfind("h-bayes,0.2,", 0) == 0);
  CHECK(csv[4].rfind("h-bayes,1.0,", 0) == 0);
  CHECK(csv[5].rfind("h-bayes,5.0,", 0) == 0);
  const auto doc = read_json_file(out + "/table-2.json");
  CHECK(doc["experiment"] == "table-2");
  CHECK(doc["summary"]["replications"] == 2);
  CHECK(doc["acceptance"].size() >= 3);
  for (const auto& v : doc["acceptance"]) CHECK(v.contains("pass"));
  CHECK(fs::exists(out + "/table-3.csv"));
}
