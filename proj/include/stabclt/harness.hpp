#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabclt/config.hpp"
#include "stabclt/percolation.hpp"
#include "stabclt/stabilization.hpp"
#include "stabclt/stats.hpp"

namespace stabclt {

/// One Monte Carlo sample. `process` labels the series the value belongs to
/// (e.g. "poisson", "binomial", "blocks_L=25"). `ms` is wall time and is
/// never part of the deterministic outputs.
struct ReplicationRecord {
  std::size_t index = 0;
  double n = 0.0;
  std::string process;
  double value = 0.0;
  std::size_t count = 0;
  double ms = 0.0;
};

struct ScheduleRow {
  double n = 0.0;
  std::string process;
  std::size_t replications = 0;
  double mean = 0.0;
  double mean_over_n = 0.0;
  double variance = 0.0;
  double variance_over_n = 0.0;
  double variance_over_n_se = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  bool degenerate = false;  // zero sample variance; normality fields unset
};

/// Pure fold over the values of one series in index order.
ScheduleRow summarize_series(double n, const std::string& process, const std::vector<double>& values);

/// sigma_hat^2(lambda) estimated as Var[H(P(lambda) restricted to K_volume)] / volume.
struct LevelEntry {
  double lambda = 0.0;
  double r = 0.0;
  std::size_t k = 0;
  std::size_t d = 0;
  double volume = 0.0;
  std::size_t replications = 0;
  double sigma2_hat = 0.0;
  double sigma2_se = 0.0;
};

struct CltSummary {
  std::string experiment;
  FunctionalSpec functional;
  std::size_t dimension = 0;
  std::vector<ScheduleRow> rows;
  std::vector<ReplicationRecord> records;
  std::vector<std::string> warnings;

  // Relative change of variance/n between the last two rows of the main series.
  std::optional<double> variance_relative_change;
  std::optional<double> sigma2_hat;

  // Inhomogeneous: cell sum of level variances.
  std::vector<LevelEntry> levels;
  std::optional<double> predicted_sigma2;
  std::optional<double> predicted_sigma2_se;
  std::optional<double> sigma2_relative_error;

  // De-Poissonization.
  std::optional<double> delta_bar;
  std::optional<double> delta_bar_se;
  std::optional<double> tau2_hat;
  bool tau2_clamped = false;
  std::optional<double> variance_gap;
  std::optional<double> variance_gap_se;
  std::optional<double> gap_relative_error;
  std::optional<TestResult> binomial_below_poisson;  // Pitman-Morgan, one-sided
  std::optional<double> count_variance_over_n;      // Var[N_n] / n

  // Betti CLT.
  std::optional<double> critical_radius;
  std::optional<double> gate_limit;
  std::optional<bool> gate_passed;
  std::optional<double> slln_relative_change;  // of mean/n over the last two n
};

nlohmann::json summary_to_json(const CltSummary& summary);

LevelEntry estimate_level(const FunctionalSpec& spec, std::size_t dimension, double lambda, double volume,
                          std::size_t replications, std::uint64_t master_seed, unsigned threads);

CltSummary run_homogeneous_clt(const ExperimentConfig& config, unsigned threads);
CltSummary run_inhomogeneous_clt(const ExperimentConfig& config, unsigned threads);
CltSummary run_depoissonization(const ExperimentConfig& config, unsigned threads);
CltSummary run_betti_clt(const ExperimentConfig& config, unsigned threads);

struct BlockRow {
  double L = 0.0;
  std::size_t blocks_per_axis = 0;
  double covered_volume = 0.0;
  double mean_difference = 0.0;
  double difference_variance = 0.0;
  double difference_variance_se = 0.0;
  double difference_variance_over_n = 0.0;
};

struct BlockTable {
  double n = 0.0;
  std::vector<BlockRow> rows;
  std::vector<ReplicationRecord> records;
  std::vector<std::string> warnings;
};

nlohmann::json block_table_to_json(const BlockTable& table);

/// Y_n = H(P(lambda)|K_n) and X_{n,L} = sum of H over the lattice cubes of
/// volume L, placed from the origin corner and fully contained in K_n, on
/// the same sample. Uses the last n of the schedule.
BlockTable run_block_approximation(const ExperimentConfig& config, unsigned threads);

struct CouplingReport {
  std::size_t trials = 0;
  double l1_distance = 0.0;
  double expected_identity = 0.0;  // exp(-l1)
  double identity_frequency = 0.0;
  double std_error = 0.0;          // sqrt(p (1 - p) / trials) at the expected p
  double first_mean_count = 0.0;
  double second_mean_count = 0.0;
  std::vector<ReplicationRecord> records;
};

nlohmann::json coupling_to_json(const CouplingReport& report);
CouplingReport run_coupling_check(const ExperimentConfig& config, unsigned threads);

struct TraceRecord {
  std::size_t index = 0;
  std::optional<double> settle_radius;
  double final_d0 = 0.0;
  std::size_t points = 0;
  bool injection_tested = false;
  bool injection_unchanged = false;
  std::vector<double> half_widths;
  std::vector<double> d0_values;
};

struct StabilizationReport {
  double lambda = 0.0;
  std::size_t traces = 0;
  std::size_t settled = 0;
  double settle_threshold = 0.0;
  double settled_by_threshold = 0.0;  // fraction settled at half-width <= threshold
  std::vector<double> tail_thresholds;
  std::vector<double> tail;           // P(settle radius > t)
  std::size_t injection_tested = 0;
  std::size_t injection_unchanged = 0;
  double injection_unchanged_fraction = 1.0;
  std::vector<std::size_t> injection_failures;
  DeltaEstimate delta;
  std::optional<MomentTable> moments;
  std::vector<TraceRecord> trace_records;
  std::vector<std::string> warnings;
};

nlohmann::json stabilization_to_json(const StabilizationReport& report);
StabilizationReport run_stabilization(const ExperimentConfig& config, unsigned threads);

nlohmann::json percolation_to_json(const PercolationEstimate& estimate);
PercolationEstimate run_percolation(const ExperimentConfig& config, unsigned threads);

/// Density used by the fixed-count experiments: the config density, or a
/// constant lambda on [0, lambda^{-1/d})^d (unit mass) when only lambda is set.
DensityGrid experiment_density(const ExperimentConfig& config);

}  // namespace stabclt
