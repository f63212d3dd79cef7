#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabclt/app.hpp"
#include "stabclt/config.hpp"
#include "stabclt/error.hpp"

using namespace stabclt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stabclt_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "stabclt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config round trip through the canonical form") {
  const std::string text = R"({
    "experiment": "clt-poisson",
    "functional": {"kind": "betti", "k": 1, "r": 0.3},
    "dimension": 2,
    "density": {"support": {"min": [0, 0], "sides": [1, 1]}, "cells_per_axis": [2, 1], "values": [1, 2]},
    "n_schedule": [100, 200],
    "replications": 50,
    "master_seed": 7,
    "stabilization": {"steps": 6},
    "percolation": {"sides": [10]}
  })";
  const ExperimentConfig a = parse_config(text);
  const std::string canon = canonical_config(a);
  const ExperimentConfig b = parse_config(canon);
  CHECK(a == b);
  CHECK(canonical_config(b) == canon);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  ExperimentConfig c = b;
  c.master_seed = 8;
  CHECK(config_hash(c) != config_hash(a));
  CHECK(b.stabilization.steps == 6);
  CHECK(b.stabilization.traces == 500);
}

TEST_CASE("config errors name the key and the line") {
  const std::string unknown = "{\n  \"functional\": {\"kind\": \"edge_count\", \"r\": 0.1},\n  \"replicatons\": 5\n}";
  const std::string msg = error_of(unknown);
  CHECK(msg.find("cfg.json:3:") == 0);
  CHECK(msg.find("replicatons") != std::string::npos);

  const std::string nested = "{\n  \"functional\": {\"kind\": \"edge_count\", \"r\": 0.1},\n  \"stabilization\": {\n    \"stepz\": 4\n  }\n}";
  const std::string nested_msg = error_of(nested);
  CHECK(nested_msg.find("cfg.json:4:") == 0);
  CHECK(nested_msg.find("stabilization.stepz") != std::string::npos);

  CHECK(error_of("{\n \"a\": 1,\n \"b\": \n}").find("cfg.json:4:") == 0);
  CHECK_FALSE(error_of(R"({"functional": {"kind": "betti", "r": 0.3}})").empty());
  CHECK_FALSE(error_of(R"({"functional": {"kind": "edge_count", "r": -1}})").empty());
  CHECK_FALSE(error_of(R"({"functional": {"kind": "edge_count", "r": 1}, "replications": "many"})").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), InputError);
}

TEST_CASE("square points give one component and one loop") {
  const fs::path dir = scratch("square");
  write_file(dir / "cfg.json", R"({"functional": {"kind": "betti", "k": 1, "r": 0.6}, "dimension": 2,
    "points": [[0,0],[1,0],[0,1],[1,1]]})");
  const CliResult r = cli({"betti", "--config", (dir / "cfg.json").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(read_file(dir / "out" / "summary.json"));
  CHECK(summary.at("betti") == nlohmann::json::array({1, 1}));
  CHECK(fs::exists(dir / "out" / "complex.json"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("empty density writes header-only sample output") {
  const fs::path dir = scratch("empty");
  write_file(dir / "cfg.json", R"({"functional": {"kind": "edge_count", "r": 0.1}, "dimension": 2,
    "density": {"support": {"min": [0,0], "sides": [1,1]}, "cells_per_axis": [1,1], "values": [0]},
    "n_schedule": [50]})");
  const CliResult r = cli({"sample", "--config", (dir / "cfg.json").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const std::string csv = read_file(dir / "out" / "points.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  write_file(dir / "broken.json", "{\n \"a\": 1,\n \"b\": \n}");
  const CliResult broken = cli({"sample", "--config", (dir / "broken.json").string()});
  CHECK(broken.code == 2);
  CHECK(broken.err.find(":4:") != std::string::npos);
  CHECK(cli({"no-such-command"}).code == 1);
  CHECK(cli({"sample"}).code == 1);

  write_file(dir / "ok.json", R"({"functional": {"kind": "edge_count", "r": 0.1}, "lambda": 1, "n_schedule": [10]})");
  write_file(dir / "blocker", "file");
  CHECK(cli({"sample", "--config", (dir / "ok.json").string(), "--out", (dir / "blocker" / "x").string()}).code == 3);

  write_file(dir / "other.json",
             R"({"experiment": "percolation", "functional": {"kind": "edge_count", "r": 0.1}, "lambda": 1})");
  CHECK(cli({"sample", "--config", (dir / "other.json").string()}).code == 2);
}

TEST_CASE("outputs are identical across worker counts and a manifest reruns") {
  const fs::path dir = scratch("threads");
  write_file(dir / "cfg.json", R"({"functional": {"kind": "component_count", "r": 0.4}, "lambda": 1,
    "n_schedule": [20, 40], "replications": 40, "master_seed": 5, "delta": {"replications": 40, "half_width": 2}})");
  const std::string cfg = (dir / "cfg.json").string();
  REQUIRE(cli({"clt-binomial", "--config", cfg, "--threads", "1", "--out", (dir / "t1").string()}).code == 0);
  REQUIRE(cli({"clt-binomial", "--config", cfg, "--threads", "3", "--out", (dir / "t3").string()}).code == 0);
  for (const char* f : {"summary.json", "replications.csv"}) {
    CHECK(read_file(dir / "t1" / f) == read_file(dir / "t3" / f));
  }
  const auto manifest = nlohmann::json::parse(read_file(dir / "t1" / "manifest.json"));
  CHECK(manifest.at("master_seed") == 5);
  CHECK(manifest.at("experiment") == "clt-binomial");
  REQUIRE(cli({"clt-binomial", "--config", (dir / "t1" / "manifest.json").string(), "--out",
               (dir / "rerun").string()})
              .code == 0);
  CHECK(read_file(dir / "t1" / "summary.json") == read_file(dir / "rerun" / "summary.json"));
  CHECK(read_file(dir / "t1" / "replications.csv") == read_file(dir / "rerun" / "replications.csv"));
}

TEST_CASE("installed binary reports errors through its exit status") {
  const char* bin = std::getenv("STABCLT_BIN");
  if (bin == nullptr) return;
  const fs::path dir = scratch("binary");
  write_file(dir / "bad.json", "{\n  \"functional\": {\"kind\": \"edge_count\", \"r\": 0.1},\n  \"replicatons\": 5\n}");
  const std::string cmd = std::string(bin) + " sample --config " + (dir / "bad.json").string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
}
