#include "stabclt/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stabclt/error.hpp"

namespace stabclt {

namespace {

using nlohmann::json;

// Error carrying the key path so parse_config can anchor it to a line.
struct KeyError : InputError {
  KeyError(std::string key_path, const std::string& what) : InputError(what), key(std::move(key_path)) {}
  std::string key;
};

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw KeyError(path, path + ": " + message);
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> known) {
  for (const auto& item : j.items()) {
    if (std::ranges::find(known, item.key()) == known.end()) {
      const std::string path = where.empty() ? item.key() : where + "." + item.key();
      fail(path, "unknown key");
    }
  }
}

const json& object_at(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  return j;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "must be a nonnegative integer");
  return j.get<std::size_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <class Fn>
auto wrap(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const KeyError&) {
    throw;
  } catch (const std::exception& e) {
    throw KeyError(path, path + ": " + e.what());
  }
}

void check_increasing(const std::vector<double>& values, const std::string& path) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) fail(path, "entries must be positive");
    if (i > 0 && !(values[i] > values[i - 1])) fail(path, "entries must be strictly increasing");
  }
}

std::size_t line_of(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the last path component's key in the source text (first match).
std::size_t line_of_key(std::string_view text, const std::string& path) {
  std::string key = path;
  if (const auto dot = key.find_last_of('.'); dot != std::string::npos) key = key.substr(dot + 1);
  if (const auto bracket = key.find('['); bracket != std::string::npos) key = key.substr(0, bracket);
  const std::size_t at = text.find("\"" + key + "\"");
  return at == std::string_view::npos ? 1 : line_of(text, at);
}

}  // namespace

std::vector<double> effective_radius_grid(const PercolationSettings& settings) {
  if (!settings.radius_grid.empty()) return settings.radius_grid;
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.5 + 0.01 * i);
  return grid;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  if (!c.experiment.empty()) j["experiment"] = c.experiment;
  j["functional"] = functional_to_json(c.functional);
  j["dimension"] = c.dimension;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.density) j["density"] = density_to_json(*c.density);
  if (c.second_density) j["second_density"] = density_to_json(*c.second_density);
  j["process"] = c.process;
  j["n_schedule"] = c.n_schedule;
  j["block_volumes"] = c.block_volumes;
  j["replications"] = c.replications;
  j["master_seed"] = c.master_seed;
  j["output"] = {{"directory", c.output_directory}};
  if (c.points) {
    json pts = json::array();
    for (std::size_t i = 0; i < c.points->size(); ++i) {
      const auto p = (*c.points)[i];
      pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    j["points"] = pts;
  }
  if (c.critical_radius) j["critical_radius"] = *c.critical_radius;
  j["levels"] = {{"volume", c.levels.volume}, {"replications", c.levels.replications}};
  j["delta"] = {{"half_width", c.delta.half_width}, {"replications", c.delta.replications}};
  const auto& s = c.stabilization;
  j["stabilization"] = {{"max_halfwidth", s.max_halfwidth}, {"steps", s.steps},
                        {"traces", s.traces},               {"settle_threshold", s.settle_threshold},
                        {"inject", s.inject},               {"moment_p", s.moment_p},
                        {"moment_samples", s.moment_samples}, {"moment_window", s.moment_window}};
  j["percolation"] = {{"sides", c.percolation.sides},
                      {"radius_grid", c.percolation.radius_grid},
                      {"replications", c.percolation.replications}};
  j["coupling"] = {{"trials", c.coupling.trials}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  object_at(j, "config");
  reject_unknown(j, "",
                 {"experiment", "functional", "dimension", "lambda", "density", "second_density", "process",
                  "n_schedule", "block_volumes", "replications", "master_seed", "output", "points",
                  "critical_radius", "levels", "delta", "stabilization", "percolation", "coupling"});
  ExperimentConfig c;
  if (j.contains("experiment")) {
    c.experiment = get_string(j["experiment"], "experiment");
    if (std::ranges::find(kExperimentKinds, c.experiment) == std::end(kExperimentKinds)) {
      fail("experiment", "\"" + c.experiment + "\" is not a known experiment");
    }
  }
  if (j.contains("dimension")) {
    c.dimension = get_count(j["dimension"], "dimension");
    if (c.dimension < 1) fail("dimension", "must be >= 1");
  }
  if (!j.contains("functional")) fail("functional", "missing required key");
  c.functional = wrap("functional", [&] { return functional_from_json(j["functional"]); });
  wrap("functional", [&] {
    c.functional.validate(c.dimension);
    return 0;
  });
  if (j.contains("lambda")) {
    c.lambda = get_number(j["lambda"], "lambda");
    if (!(*c.lambda >= 0.0) || !std::isfinite(*c.lambda)) fail("lambda", "must be finite and >= 0");
  }
  auto read_density = [&](const char* key) -> std::optional<DensityGrid> {
    if (!j.contains(key)) return std::nullopt;
    DensityGrid g = wrap(key, [&] { return density_from_json(j[key]); });
    if (g.dimension() != c.dimension) fail(key, "dimension does not match \"dimension\"");
    return g;
  };
  c.density = read_density("density");
  c.second_density = read_density("second_density");
  if (j.contains("process")) {
    c.process = get_string(j["process"], "process");
    if (c.process != "poisson" && c.process != "binomial" && c.process != "homogeneous") {
      fail("process", "must be one of poisson, binomial, homogeneous");
    }
  }
  if (j.contains("n_schedule")) {
    c.n_schedule = get_numbers(j["n_schedule"], "n_schedule");
    check_increasing(c.n_schedule, "n_schedule");
  }
  if (j.contains("block_volumes")) {
    c.block_volumes = get_numbers(j["block_volumes"], "block_volumes");
    check_increasing(c.block_volumes, "block_volumes");
  }
  if (j.contains("replications")) {
    c.replications = get_count(j["replications"], "replications");
    if (c.replications < 2) fail("replications", "must be >= 2");
  }
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned()) fail("master_seed", "must be a nonnegative integer");
    c.master_seed = j["master_seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) {
    const json& o = object_at(j["output"], "output");
    reject_unknown(o, "output", {"directory"});
    if (o.contains("directory")) c.output_directory = get_string(o["directory"], "output.directory");
  }
  if (j.contains("points")) {
    const json& p = j["points"];
    if (!p.is_array()) fail("points", "must be an array of coordinate arrays");
    PointCloud cloud(c.dimension);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string path = "points[" + std::to_string(i) + "]";
      const std::vector<double> x = get_numbers(p[i], path);
      if (x.size() != c.dimension) fail(path, "has " + std::to_string(x.size()) + " coordinates, expected " +
                                                  std::to_string(c.dimension));
      for (double v : x) {
        if (!std::isfinite(v)) fail(path, "coordinates must be finite");
      }
      cloud.push_back(x);
    }
    c.points = std::move(cloud);
  }
  if (j.contains("critical_radius")) {
    c.critical_radius = get_number(j["critical_radius"], "critical_radius");
    if (!(*c.critical_radius > 0.0)) fail("critical_radius", "must be positive");
  }
  if (j.contains("levels")) {
    const json& o = object_at(j["levels"], "levels");
    reject_unknown(o, "levels", {"volume", "replications"});
    if (o.contains("volume")) c.levels.volume = get_number(o["volume"], "levels.volume");
    if (o.contains("replications")) c.levels.replications = get_count(o["replications"], "levels.replications");
    if (c.levels.volume < 0.0) fail("levels.volume", "must be >= 0");
    if (c.levels.replications == 1) fail("levels.replications", "must be 0 or >= 2");
  }
  if (j.contains("delta")) {
    const json& o = object_at(j["delta"], "delta");
    reject_unknown(o, "delta", {"half_width", "replications"});
    if (o.contains("half_width")) c.delta.half_width = get_number(o["half_width"], "delta.half_width");
    if (o.contains("replications")) c.delta.replications = get_count(o["replications"], "delta.replications");
    if (!(c.delta.half_width > 0.0)) fail("delta.half_width", "must be positive");
    if (c.delta.replications < 2) fail("delta.replications", "must be >= 2");
  }
  if (j.contains("stabilization")) {
    const json& o = object_at(j["stabilization"], "stabilization");
    reject_unknown(o, "stabilization",
                   {"max_halfwidth", "steps", "traces", "settle_threshold", "inject", "moment_p", "moment_samples",
                    "moment_window"});
    auto& s = c.stabilization;
    if (o.contains("max_halfwidth")) s.max_halfwidth = get_number(o["max_halfwidth"], "stabilization.max_halfwidth");
    if (o.contains("steps")) s.steps = get_count(o["steps"], "stabilization.steps");
    if (o.contains("traces")) s.traces = get_count(o["traces"], "stabilization.traces");
    if (o.contains("settle_threshold")) {
      s.settle_threshold = get_number(o["settle_threshold"], "stabilization.settle_threshold");
    }
    if (o.contains("inject")) s.inject = get_count(o["inject"], "stabilization.inject");
    if (o.contains("moment_p")) s.moment_p = get_number(o["moment_p"], "stabilization.moment_p");
    if (o.contains("moment_samples")) s.moment_samples = get_count(o["moment_samples"], "stabilization.moment_samples");
    if (o.contains("moment_window")) s.moment_window = get_number(o["moment_window"], "stabilization.moment_window");
    if (!(s.max_halfwidth > 0.0)) fail("stabilization.max_halfwidth", "must be positive");
    if (s.steps < 2) fail("stabilization.steps", "must be >= 2");
    if (s.traces < 1) fail("stabilization.traces", "must be >= 1");
    if (!(s.moment_p > 2.0)) fail("stabilization.moment_p", "must exceed 2");
    if (!(s.moment_window > 0.0)) fail("stabilization.moment_window", "must be positive");
  }
  if (j.contains("percolation")) {
    const json& o = object_at(j["percolation"], "percolation");
    reject_unknown(o, "percolation", {"sides", "radius_grid", "replications"});
    auto& p = c.percolation;
    if (o.contains("sides")) p.sides = get_numbers(o["sides"], "percolation.sides");
    if (o.contains("radius_grid")) p.radius_grid = get_numbers(o["radius_grid"], "percolation.radius_grid");
    if (o.contains("replications")) p.replications = get_count(o["replications"], "percolation.replications");
    if (p.sides.empty()) fail("percolation.sides", "must not be empty");
    for (double s : p.sides) {
      if (!(s > 0.0)) fail("percolation.sides", "entries must be positive");
    }
    if (!p.radius_grid.empty()) {
      if (p.radius_grid.size() < 2) fail("percolation.radius_grid", "needs at least 2 points");
      check_increasing(p.radius_grid, "percolation.radius_grid");
    }
    if (p.replications < 2) fail("percolation.replications", "must be >= 2");
  }
  if (j.contains("coupling")) {
    const json& o = object_at(j["coupling"], "coupling");
    reject_unknown(o, "coupling", {"trials"});
    if (o.contains("trials")) c.coupling.trials = get_count(o["trials"], "coupling.trials");
    if (c.coupling.trials < 1) fail("coupling.trials", "must be >= 1");
  }
  return c;
}

ExperimentConfig parse_config(std::string_view text, std::string_view source_name) {
  const std::string source(source_name);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ":" + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                     ": malformed JSON (" + e.what() + ")");
  }
  std::string_view anchor_text = text;
  std::string embedded;
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw InputError(source + ":1: manifest has no \"config\" entry");
    embedded = j["config"].dump(2);
    j = j["config"];
    anchor_text = embedded;
  }
  try {
    return config_from_json(j);
  } catch (const KeyError& e) {
    throw InputError(source + ":" + std::to_string(line_of_key(anchor_text, e.key)) + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

std::string canonical_config(const ExperimentConfig& config) { return config_to_json(config).dump(); }

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace stabclt
