#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stabclt/functionals.hpp"
#include "stabclt/point_process.hpp"

namespace stabclt {

struct LevelSettings {
  double volume = 0.0;           // 0 selects the last n of the schedule
  std::size_t replications = 0;  // 0 selects the experiment's replications
  friend bool operator==(const LevelSettings&, const LevelSettings&) = default;
};

struct DeltaSettings {
  double half_width = 4.0;
  std::size_t replications = 2000;
  friend bool operator==(const DeltaSettings&, const DeltaSettings&) = default;
};

struct StabilizationSettings {
  double max_halfwidth = 6.0;
  std::size_t steps = 12;
  std::size_t traces = 500;
  double settle_threshold = 3.0;
  std::size_t inject = 10;
  double moment_p = 3.0;
  std::size_t moment_samples = 0;  // 0 skips the moment diagnostic
  double moment_window = 4.0;
  friend bool operator==(const StabilizationSettings&, const StabilizationSettings&) = default;
};

struct PercolationSettings {
  std::vector<double> sides{20.0, 40.0};
  std::vector<double> radius_grid;  // empty selects 0.50, 0.51, ..., 0.70
  std::size_t replications = 400;
  friend bool operator==(const PercolationSettings&, const PercolationSettings&) = default;
};

struct CouplingSettings {
  std::size_t trials = 10000;
  friend bool operator==(const CouplingSettings&, const CouplingSettings&) = default;
};

/// A complete, seeded experiment description. Sections that an experiment
/// does not use are still validated and kept in the canonical form.
struct ExperimentConfig {
  std::string experiment;  // empty: any subcommand may run it
  FunctionalSpec functional;
  std::size_t dimension = 2;
  std::optional<double> lambda;
  std::optional<DensityGrid> density;
  std::optional<DensityGrid> second_density;
  std::string process = "poisson";  // poisson | binomial | homogeneous
  std::vector<double> n_schedule;
  std::vector<double> block_volumes;
  std::size_t replications = 100;
  std::uint64_t master_seed = 0;
  std::string output_directory = "out";
  std::optional<PointCloud> points;
  std::optional<double> critical_radius;
  LevelSettings levels;
  DeltaSettings delta;
  StabilizationSettings stabilization;
  PercolationSettings percolation;
  CouplingSettings coupling;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline constexpr std::string_view kExperimentKinds[] = {
    "sample", "betti", "clt-homogeneous", "clt-blocks", "clt-poisson",
    "clt-binomial", "stabilization", "percolation", "coupling-check"};

nlohmann::json config_to_json(const ExperimentConfig& config);

/// Rejects unknown keys and wrong types; messages name the offending key
/// path, e.g. "stabilization.steps".
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Parses config text. A run manifest is accepted too: its embedded
/// canonical config is used. Errors carry "<source>:<line>:" prefixes.
ExperimentConfig parse_config(std::string_view text, std::string_view source_name = "config");
ExperimentConfig load_config(const std::string& path);

/// Sorted-key compact JSON of config_to_json.
std::string canonical_config(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical form, as 16 lowercase hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Default 0.50..0.70 grid when the config leaves radius_grid empty.
std::vector<double> effective_radius_grid(const PercolationSettings& settings);

}  // namespace stabclt
