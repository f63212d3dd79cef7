#include "stabclt/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "stabclt/error.hpp"
#include "stabclt/parallel.hpp"

namespace stabclt {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Series {
  std::vector<double> values;
  std::vector<ReplicationRecord> records;
};

template <class Sampler>
Series run_series(const FunctionalSpec& spec, double n, const std::string& label, std::size_t m, std::uint64_t seed,
                  unsigned threads, Sampler&& sampler) {
  Series s;
  s.values.resize(m);
  s.records.resize(m);
  parallel_for(m, threads, [&](std::size_t i) {
    const auto start = Clock::now();
    RngStream rng(seed, i);
    const PointCloud cloud = sampler(rng);
    s.values[i] = evaluate(spec, cloud);
    s.records[i] = ReplicationRecord{i, n, label, s.values[i], cloud.size(), elapsed_ms(start)};
  });
  return s;
}

void append(std::vector<ReplicationRecord>& into, const std::vector<ReplicationRecord>& from) {
  into.insert(into.end(), from.begin(), from.end());
}

double side_for_volume(double volume, std::size_t d) { return std::pow(volume, 1.0 / static_cast<double>(d)); }

Box cube_of_volume(double volume, std::size_t d) {
  return Box::cube(Point(std::vector<double>(d, 0.0)), side_for_volume(volume, d));
}

double require_lambda(const ExperimentConfig& config, const char* experiment) {
  if (!config.lambda) throw InputError(std::string(experiment) + ": config needs \"lambda\"");
  return *config.lambda;
}

void require_schedule(const ExperimentConfig& config, const char* experiment) {
  if (config.n_schedule.empty()) throw InputError(std::string(experiment) + ": config needs a nonempty \"n_schedule\"");
}

std::uint64_t level_salt(double lambda) { return std::bit_cast<std::uint64_t>(lambda); }

// Distinct values of a grid with the total cell volume carrying each.
std::map<double, double> level_masses(const DensityGrid& f) {
  std::map<double, double> out;
  for (double v : f.values()) out[v] += f.cell_volume();
  return out;
}

void finish_main_series(CltSummary& summary, const std::string& process) {
  std::vector<const ScheduleRow*> main;
  for (const auto& row : summary.rows) {
    if (row.process == process) main.push_back(&row);
  }
  if (main.empty()) return;
  summary.sigma2_hat = main.back()->variance_over_n;
  if (main.size() >= 2) {
    const double prev = main[main.size() - 2]->variance_over_n;
    if (prev > 0.0) summary.variance_relative_change = std::abs(main.back()->variance_over_n - prev) / prev;
    const double prev_mean = main[main.size() - 2]->mean_over_n;
    if (prev_mean != 0.0) {
      summary.slln_relative_change = std::abs(main.back()->mean_over_n - prev_mean) / std::abs(prev_mean);
    }
  }
  for (const auto& row : summary.rows) {
    if (row.degenerate) {
      summary.warnings.push_back("degenerate sample (zero variance) for " + row.process + " at n=" +
                                 std::to_string(row.n));
    }
  }
}

std::size_t integral_n(double n, const char* experiment) {
  if (n != std::floor(n) || n < 1.0) {
    throw InputError(std::string(experiment) + ": n_schedule entries must be positive integers");
  }
  return static_cast<std::size_t>(n);
}

// Paired fixed-count and Poissonized samples sharing one i.i.d. sequence:
// the binomial sample is the first n points, the Poisson one the first N.
struct PairedSeries {
  Series binomial;
  Series poisson;
  std::vector<double> counts;
};

PairedSeries run_paired(const FunctionalSpec& spec, const DensityGrid& f, std::size_t n, std::size_t m,
                        std::uint64_t seed, unsigned threads) {
  PairedSeries p;
  p.binomial.values.resize(m);
  p.binomial.records.resize(m);
  p.poisson.values.resize(m);
  p.poisson.records.resize(m);
  p.counts.resize(m);
  const double nd = static_cast<double>(n);
  const double scale = side_for_volume(nd, f.dimension());
  parallel_for(m, threads, [&](std::size_t i) {
    auto start = Clock::now();
    RngStream rng(seed, i);
    const auto count = static_cast<std::size_t>(rng.poisson(nd));
    const PointCloud all = scale_cloud(sample_binomial(f, std::max(n, count), rng), scale);
    const PointCloud fixed = all.prefix(n);
    p.binomial.values[i] = evaluate(spec, fixed);
    p.binomial.records[i] = ReplicationRecord{i, nd, "binomial", p.binomial.values[i], n, elapsed_ms(start)};
    start = Clock::now();
    p.poisson.values[i] = count == n ? p.binomial.values[i] : evaluate(spec, all.prefix(count));
    p.poisson.records[i] = ReplicationRecord{i, nd, "poisson", p.poisson.values[i], count, elapsed_ms(start)};
    p.counts[i] = static_cast<double>(count);
  });
  return p;
}

json row_to_json(const ScheduleRow& r) {
  return {{"n", r.n},
          {"process", r.process},
          {"replications", r.replications},
          {"mean", r.mean},
          {"mean_over_n", r.mean_over_n},
          {"variance", r.variance},
          {"variance_over_n", r.variance_over_n},
          {"variance_over_n_se", r.variance_over_n_se},
          {"skewness", r.skewness},
          {"kurtosis", r.kurtosis},
          {"ks_statistic", r.ks_statistic},
          {"ks_p_value", r.ks_p_value},
          {"degenerate", r.degenerate}};
}

CltSummary new_summary(const std::string& experiment, const ExperimentConfig& config) {
  CltSummary s;
  s.experiment = experiment;
  s.functional = config.functional;
  s.dimension = config.dimension;
  return s;
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

}  // namespace

ScheduleRow summarize_series(double n, const std::string& process, const std::vector<double>& values) {
  ScheduleRow row;
  row.n = n;
  row.process = process;
  row.replications = values.size();
  const Moments m = moments(values);
  row.mean = m.mean;
  row.mean_over_n = m.mean / n;
  row.variance = m.variance;
  row.variance_over_n = m.variance / n;
  row.variance_over_n_se = variance_standard_error(values) / n;
  row.skewness = m.skewness;
  row.kurtosis = m.kurtosis;
  row.degenerate = !(m.variance > 0.0);
  if (!row.degenerate) {
    const TestResult ks = ks_test(standardize(values), standard_normal_cdf);
    row.ks_statistic = ks.statistic;
    row.ks_p_value = ks.p_value;
  }
  return row;
}

json summary_to_json(const CltSummary& s) {
  json j;
  j["experiment"] = s.experiment;
  j["functional"] = functional_to_json(s.functional);
  j["dimension"] = s.dimension;
  j["rows"] = json::array();
  for (const auto& row : s.rows) j["rows"].push_back(row_to_json(row));
  j["warnings"] = s.warnings;
  put(j, "variance_relative_change", s.variance_relative_change);
  put(j, "sigma2_hat", s.sigma2_hat);
  if (!s.levels.empty()) {
    j["levels"] = json::array();
    for (const auto& l : s.levels) {
      j["levels"].push_back({{"lambda", l.lambda},
                             {"r", l.r},
                             {"k", l.k},
                             {"d", l.d},
                             {"volume", l.volume},
                             {"replications", l.replications},
                             {"sigma2_hat", l.sigma2_hat},
                             {"sigma2_se", l.sigma2_se}});
    }
  }
  put(j, "predicted_sigma2", s.predicted_sigma2);
  put(j, "predicted_sigma2_se", s.predicted_sigma2_se);
  put(j, "sigma2_relative_error", s.sigma2_relative_error);
  put(j, "delta_bar", s.delta_bar);
  put(j, "delta_bar_se", s.delta_bar_se);
  put(j, "tau2_hat", s.tau2_hat);
  if (s.tau2_hat) j["tau2_clamped"] = s.tau2_clamped;
  put(j, "variance_gap", s.variance_gap);
  put(j, "variance_gap_se", s.variance_gap_se);
  put(j, "gap_relative_error", s.gap_relative_error);
  if (s.binomial_below_poisson) {
    j["pitman_morgan"] = {{"statistic", s.binomial_below_poisson->statistic},
                          {"p_value", s.binomial_below_poisson->p_value}};
  }
  put(j, "count_variance_over_n", s.count_variance_over_n);
  put(j, "critical_radius", s.critical_radius);
  put(j, "gate_limit", s.gate_limit);
  put(j, "gate_passed", s.gate_passed);
  put(j, "slln_relative_change", s.slln_relative_change);
  return j;
}

LevelEntry estimate_level(const FunctionalSpec& spec, std::size_t dimension, double lambda, double volume,
                          std::size_t replications, std::uint64_t master_seed, unsigned threads) {
  LevelEntry e;
  e.lambda = lambda;
  e.r = spec.r;
  e.k = spec.kind == FunctionalKind::betti ? spec.k : 0;
  e.d = dimension;
  e.volume = volume;
  e.replications = replications;
  if (lambda == 0.0) return e;
  const Box box = cube_of_volume(volume, dimension);
  const Series s = run_series(spec, volume, "level", replications, derive_seed(master_seed, "level", level_salt(lambda)),
                              threads, [&](RngStream& rng) { return sample_homogeneous(lambda, box, rng); });
  const Moments m = moments(s.values);
  e.sigma2_hat = m.variance / volume;
  e.sigma2_se = variance_standard_error(s.values) / volume;
  return e;
}

CltSummary run_homogeneous_clt(const ExperimentConfig& config, unsigned threads) {
  const double lambda = require_lambda(config, "clt-homogeneous");
  require_schedule(config, "clt-homogeneous");
  config.functional.validate(config.dimension);
  CltSummary summary = new_summary("clt-homogeneous", config);
  for (std::size_t j = 0; j < config.n_schedule.size(); ++j) {
    const double n = config.n_schedule[j];
    const Box box = cube_of_volume(n, config.dimension);
    const Series s = run_series(config.functional, n, "homogeneous", config.replications,
                                derive_seed(config.master_seed, "homogeneous", j), threads,
                                [&](RngStream& rng) { return sample_homogeneous(lambda, box, rng); });
    summary.rows.push_back(summarize_series(n, "homogeneous", s.values));
    append(summary.records, s.records);
  }
  finish_main_series(summary, "homogeneous");
  return summary;
}

CltSummary run_inhomogeneous_clt(const ExperimentConfig& config, unsigned threads) {
  require_schedule(config, "clt-poisson");
  config.functional.validate(config.dimension);
  const DensityGrid f = config.density ? *config.density
                                       : DensityGrid::constant(cube_of_volume(1.0, config.dimension),
                                                               require_lambda(config, "clt-poisson"));
  CltSummary summary = new_summary("clt-poisson", config);
  for (std::size_t j = 0; j < config.n_schedule.size(); ++j) {
    const double n = config.n_schedule[j];
    const DensityGrid intensity = f.scaled(n);
    const double scale = side_for_volume(n, config.dimension);
    const Series s = run_series(config.functional, n, "poisson", config.replications,
                                derive_seed(config.master_seed, "inhomogeneous", j), threads,
                                [&](RngStream& rng) { return scale_cloud(sample_inhomogeneous(intensity, rng), scale); });
    summary.rows.push_back(summarize_series(n, "poisson", s.values));
    append(summary.records, s.records);
  }
  finish_main_series(summary, "poisson");

  const double volume = config.levels.volume > 0.0 ? config.levels.volume : config.n_schedule.back();
  const std::size_t m = config.levels.replications > 0 ? config.levels.replications : config.replications;
  double predicted = 0.0;
  double predicted_var = 0.0;
  for (const auto& [value, mass] : level_masses(f)) {
    const LevelEntry level = estimate_level(config.functional, config.dimension, value, volume, m, config.master_seed,
                                            threads);
    predicted += level.sigma2_hat * mass;
    predicted_var += (level.sigma2_se * mass) * (level.sigma2_se * mass);
    summary.levels.push_back(level);
  }
  summary.predicted_sigma2 = predicted;
  summary.predicted_sigma2_se = std::sqrt(predicted_var);
  if (predicted > 0.0) summary.sigma2_relative_error = std::abs(*summary.sigma2_hat - predicted) / predicted;
  return summary;
}

DensityGrid experiment_density(const ExperimentConfig& config) {
  if (config.density) return *config.density;
  if (!config.lambda) throw InputError("config needs \"density\" or \"lambda\"");
  if (!(*config.lambda > 0.0)) throw InputError("fixed-count experiments need lambda > 0");
  return DensityGrid::constant(cube_of_volume(1.0 / *config.lambda, config.dimension), *config.lambda);
}

namespace {

CltSummary run_paired_experiment(const ExperimentConfig& config, unsigned threads, const char* name) {
  require_schedule(config, name);
  config.functional.validate(config.dimension);
  const DensityGrid f = experiment_density(config);
  if (!(f.total_mass() > 0.0)) throw InputError(std::string(name) + ": density has zero total mass");
  CltSummary summary = new_summary(name, config);
  PairedSeries last;
  for (std::size_t j = 0; j < config.n_schedule.size(); ++j) {
    const std::size_t n = integral_n(config.n_schedule[j], name);
    PairedSeries p = run_paired(config.functional, f, n, config.replications,
                                derive_seed(config.master_seed, "paired", j), threads);
    const double nd = static_cast<double>(n);
    summary.rows.push_back(summarize_series(nd, "binomial", p.binomial.values));
    summary.rows.push_back(summarize_series(nd, "poisson", p.poisson.values));
    append(summary.records, p.binomial.records);
    append(summary.records, p.poisson.records);
    last = std::move(p);
  }
  const double n = config.n_schedule.back();
  finish_main_series(summary, "binomial");
  summary.sigma2_hat = moments(last.poisson.values).variance / n;
  summary.count_variance_over_n = moments(last.counts).variance / n;
  summary.binomial_below_poisson = pitman_morgan_greater(last.poisson.values, last.binomial.values);

  const Moments mp = moments(last.poisson.values);
  const Moments mb = moments(last.binomial.values);
  std::vector<double> diff(last.poisson.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double a = last.poisson.values[i] - mp.mean;
    const double b = last.binomial.values[i] - mb.mean;
    diff[i] = a * a - b * b;
  }
  summary.variance_gap = (mp.variance - mb.variance) / n;
  summary.variance_gap_se = std::sqrt(moments(diff).variance / static_cast<double>(diff.size())) / n;
  return summary;
}

}  // namespace

CltSummary run_depoissonization(const ExperimentConfig& config, unsigned threads) {
  CltSummary summary = run_paired_experiment(config, threads, "clt-binomial");
  const DensityGrid f = experiment_density(config);
  const double mass = f.total_mass();
  double delta_bar = 0.0;
  double delta_var = 0.0;
  for (const auto& [value, volume] : level_masses(f)) {
    const double g = value / mass;  // probability density level
    if (g == 0.0) continue;
    const DeltaEstimate est = estimate_limit_delta(config.functional, config.dimension, g, config.delta.half_width,
                                                   config.delta.replications,
                                                   derive_seed(config.master_seed, "delta", level_salt(g)), threads);
    const double weight = g * volume;
    delta_bar += est.mean * weight;
    delta_var += (est.std_error * weight) * (est.std_error * weight);
  }
  summary.delta_bar = delta_bar;
  summary.delta_bar_se = std::sqrt(delta_var);
  const double predicted_gap = delta_bar * delta_bar;
  const double tau2 = *summary.sigma2_hat - predicted_gap;
  summary.tau2_clamped = tau2 < 0.0;
  summary.tau2_hat = std::max(0.0, tau2);
  if (summary.tau2_clamped) summary.warnings.push_back("predicted tau^2 was negative and has been clamped to 0");
  if (predicted_gap > 0.0) summary.gap_relative_error = std::abs(*summary.variance_gap - predicted_gap) / predicted_gap;
  return summary;
}

CltSummary run_betti_clt(const ExperimentConfig& config, unsigned threads) {
  if (config.functional.kind != FunctionalKind::betti) throw InputError("betti CLT needs a betti functional");
  if (config.functional.k >= config.dimension) {
    throw InputError("betti CLT: beta_" + std::to_string(config.functional.k) + " vanishes identically in dimension " +
                     std::to_string(config.dimension));
  }
  CltSummary summary = run_paired_experiment(config, threads, "clt-binomial");
  const DensityGrid f = experiment_density(config);
  const double sup = f.sup() / f.total_mass();
  const std::size_t d = config.dimension;
  double rc = std::numeric_limits<double>::infinity();
  if (config.critical_radius) {
    rc = *config.critical_radius;
  } else if (d >= 2) {
    const double side = d == 2 ? 16.0 : (d == 3 ? 10.0 : 6.0);
    const double r_max = d == 2 ? 2.0 : 1.0;
    const PercolationEstimate quick = estimate_percolation_radius(d, {side}, {0.5 * r_max, r_max}, 64,
                                                                  derive_seed(config.master_seed, "gate"), threads);
    rc = quick.curves.front().median_critical;
  }
  if (std::isfinite(rc)) {
    summary.critical_radius = rc;
    summary.gate_limit = std::pow(sup, -1.0 / static_cast<double>(d)) * rc;
    summary.gate_passed = config.functional.r < *summary.gate_limit;
    if (!*summary.gate_passed) {
      summary.warnings.push_back(std::string("r is not below Lambda^{-1/d} r_c") +
                                 (d == 2 ? " (advisory only in d=2)" : ""));
    }
  } else {
    summary.gate_passed = true;
    summary.warnings.push_back("no percolation threshold available; gate skipped");
  }
  return summary;
}

json block_table_to_json(const BlockTable& t) {
  json j;
  j["experiment"] = "clt-blocks";
  j["n"] = t.n;
  j["rows"] = json::array();
  for (const auto& r : t.rows) {
    j["rows"].push_back({{"L", r.L},
                         {"blocks_per_axis", r.blocks_per_axis},
                         {"covered_volume", r.covered_volume},
                         {"mean_difference", r.mean_difference},
                         {"difference_variance", r.difference_variance},
                         {"difference_variance_se", r.difference_variance_se},
                         {"difference_variance_over_n", r.difference_variance_over_n}});
  }
  j["warnings"] = t.warnings;
  return j;
}

BlockTable run_block_approximation(const ExperimentConfig& config, unsigned threads) {
  const double lambda = require_lambda(config, "clt-blocks");
  require_schedule(config, "clt-blocks");
  if (config.block_volumes.empty()) throw InputError("clt-blocks: config needs a nonempty \"block_volumes\"");
  config.functional.validate(config.dimension);
  const std::size_t d = config.dimension;
  BlockTable table;
  table.n = config.n_schedule.back();
  const double side = side_for_volume(table.n, d);

  std::vector<double> volumes;
  for (double L : config.block_volumes) {
    if (L > table.n) {
      table.warnings.push_back("block volume L=" + std::to_string(L) + " exceeds n; skipped");
    } else {
      volumes.push_back(L);
    }
  }
  std::vector<std::vector<Box>> blocks(volumes.size());
  for (std::size_t b = 0; b < volumes.size(); ++b) {
    const double ell = side_for_volume(volumes[b], d);
    const auto per_axis = static_cast<std::size_t>(std::floor(side / ell * (1.0 + 1e-12)));
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= per_axis;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<double> corner(d);
      std::size_t rest = code;
      for (std::size_t a = d; a-- > 0;) {
        corner[a] = static_cast<double>(rest % per_axis) * ell;
        rest /= per_axis;
      }
      blocks[b].push_back(Box::cube(Point(corner), ell));
    }
    BlockRow row;
    row.L = volumes[b];
    row.blocks_per_axis = per_axis;
    row.covered_volume = static_cast<double>(total) * volumes[b];
    table.rows.push_back(row);
  }

  const std::size_t m = config.replications;
  const std::size_t series = volumes.size() + 1;
  std::vector<std::vector<double>> values(series, std::vector<double>(m));
  std::vector<std::vector<ReplicationRecord>> records(series, std::vector<ReplicationRecord>(m));
  const Box box = cube_of_volume(table.n, d);
  const std::uint64_t seed = derive_seed(config.master_seed, "blocks");
  parallel_for(m, threads, [&](std::size_t i) {
    auto start = Clock::now();
    RngStream rng(seed, i);
    const PointCloud cloud = sample_homogeneous(lambda, box, rng);
    values[0][i] = evaluate(config.functional, cloud);
    records[0][i] = ReplicationRecord{i, table.n, "full", values[0][i], cloud.size(), elapsed_ms(start)};
    for (std::size_t b = 0; b < volumes.size(); ++b) {
      start = Clock::now();
      double x = 0.0;
      std::size_t count = 0;
      for (const Box& block : blocks[b]) {
        const PointCloud local = cloud.restricted_to(block);
        count += local.size();
        x += evaluate(config.functional, local);
      }
      values[b + 1][i] = x;
      records[b + 1][i] = ReplicationRecord{i, table.n, "blocks_L=" + json(volumes[b]).dump(), x, count,
                                            elapsed_ms(start)};
    }
  });
  for (const auto& r : records) append(table.records, r);
  for (std::size_t b = 0; b < volumes.size(); ++b) {
    std::vector<double> diff(m);
    for (std::size_t i = 0; i < m; ++i) diff[i] = values[0][i] - values[b + 1][i];
    const Moments mo = moments(diff);
    BlockRow& row = table.rows[b];
    row.mean_difference = mo.mean;
    row.difference_variance = mo.variance;
    row.difference_variance_se = variance_standard_error(diff);
    row.difference_variance_over_n = mo.variance / table.n;
  }
  return table;
}

json coupling_to_json(const CouplingReport& r) {
  return {{"experiment", "coupling-check"},
          {"trials", r.trials},
          {"l1_distance", r.l1_distance},
          {"expected_identity", r.expected_identity},
          {"identity_frequency", r.identity_frequency},
          {"std_error", r.std_error},
          {"first_mean_count", r.first_mean_count},
          {"second_mean_count", r.second_mean_count}};
}

CouplingReport run_coupling_check(const ExperimentConfig& config, unsigned threads) {
  if (!config.density || !config.second_density) {
    throw InputError("coupling-check: config needs \"density\" and \"second_density\"");
  }
  const DensityGrid& f = *config.density;
  const DensityGrid& g = *config.second_density;
  if (!f.same_grid(g)) throw InputError("coupling-check: densities must share support and grid");
  CouplingReport report;
  report.trials = config.coupling.trials;
  report.l1_distance = f.l1_distance(g);
  report.expected_identity = std::exp(-report.l1_distance);
  report.records.resize(report.trials);
  std::vector<double> first(report.trials);
  std::vector<double> second(report.trials);
  const std::uint64_t seed = derive_seed(config.master_seed, "coupling");
  parallel_for(report.trials, threads, [&](std::size_t i) {
    const auto start = Clock::now();
    RngStream rng(seed, i);
    const CoupledPair pair = sample_coupled_pair(f, g, rng);
    first[i] = static_cast<double>(pair.first.size());
    second[i] = static_cast<double>(pair.second.size());
    report.records[i] = ReplicationRecord{i, 0.0, "coupled", pair.identical() ? 1.0 : 0.0, pair.band_points,
                                          elapsed_ms(start)};
  });
  double identical = 0.0;
  for (const auto& r : report.records) identical += r.value;
  const auto m = static_cast<double>(report.trials);
  report.identity_frequency = identical / m;
  report.std_error = std::sqrt(report.expected_identity * (1.0 - report.expected_identity) / m);
  report.first_mean_count = moments(first).mean;
  report.second_mean_count = moments(second).mean;
  return report;
}

json stabilization_to_json(const StabilizationReport& r) {
  json j;
  j["experiment"] = "stabilization";
  j["lambda"] = r.lambda;
  j["traces"] = r.traces;
  j["settled"] = r.settled;
  j["settle_threshold"] = r.settle_threshold;
  j["settled_by_threshold"] = r.settled_by_threshold;
  j["tail"] = json::array();
  for (std::size_t i = 0; i < r.tail.size(); ++i) {
    j["tail"].push_back({{"half_width", r.tail_thresholds[i]}, {"fraction_exceeding", r.tail[i]}});
  }
  j["injection"] = {{"tested", r.injection_tested},
                    {"unchanged", r.injection_unchanged},
                    {"unchanged_fraction", r.injection_unchanged_fraction},
                    {"failures", r.injection_failures}};
  j["delta"] = {{"mean", r.delta.mean},
                {"std_error", r.delta.std_error},
                {"variance", r.delta.variance},
                {"replications", r.delta.replications},
                {"half_width", r.delta.half_width}};
  if (r.moments) {
    json rows = json::array();
    for (const auto& row : r.moments->rows) {
      rows.push_back({{"n", row.n},
                      {"samples", row.samples},
                      {"pth_moment", row.pth_moment},
                      {"p_norm", row.p_norm},
                      {"max_abs_cost", row.max_abs_cost},
                      {"local_moment", row.local_moment}});
    }
    j["moments"] = {{"p", r.moments->p}, {"sup_pth_moment", r.moments->sup_pth_moment}, {"rows", rows}};
  }
  j["warnings"] = r.warnings;
  return j;
}

StabilizationReport run_stabilization(const ExperimentConfig& config, unsigned threads) {
  const double lambda = require_lambda(config, "stabilization");
  config.functional.validate(config.dimension);
  const StabilizationSettings& s = config.stabilization;
  StabilizationReport report;
  report.lambda = lambda;
  report.traces = s.traces;
  report.settle_threshold = s.settle_threshold;
  report.trace_records.resize(s.traces);
  std::vector<StabilizationTrace> traces(s.traces);
  const std::uint64_t trace_seed = derive_seed(config.master_seed, "trace");
  const std::uint64_t inject_seed = derive_seed(config.master_seed, "inject");
  parallel_for(s.traces, threads, [&](std::size_t i) {
    RngStream rng(trace_seed, i);
    StabilizationTrace trace =
        trace_add_one_cost(config.functional, config.dimension, lambda, s.max_halfwidth, s.steps, rng);
    TraceRecord& rec = report.trace_records[i];
    rec.index = i;
    rec.settle_radius = trace.settle_radius;
    rec.final_d0 = trace.d0_values.back();
    rec.points = trace.sample.size();
    rec.half_widths = trace.half_widths;
    rec.d0_values = trace.d0_values;
    if (trace.settled() && s.inject > 0) {
      RngStream irng(inject_seed, i);
      rec.injection_tested = true;
      rec.injection_unchanged = inject_far_points(config.functional, trace, s.inject, irng).unchanged();
    }
    trace.sample = PointCloud(config.dimension);
    traces[i] = std::move(trace);
  });
  std::size_t by_threshold = 0;
  for (const auto& rec : report.trace_records) {
    if (rec.settle_radius) {
      ++report.settled;
      if (*rec.settle_radius <= s.settle_threshold) ++by_threshold;
    }
    if (rec.injection_tested) {
      ++report.injection_tested;
      if (rec.injection_unchanged) {
        ++report.injection_unchanged;
      } else {
        report.injection_failures.push_back(rec.index);
      }
    }
  }
  report.settled_by_threshold = static_cast<double>(by_threshold) / static_cast<double>(s.traces);
  if (report.injection_tested > 0) {
    report.injection_unchanged_fraction =
        static_cast<double>(report.injection_unchanged) / static_cast<double>(report.injection_tested);
  }
  if (!traces.empty()) {
    report.tail_thresholds = traces.front().half_widths;
    report.tail = settle_tail(traces, report.tail_thresholds);
  }
  report.delta = estimate_limit_delta(config.functional, config.dimension, lambda, config.delta.half_width,
                                      config.delta.replications, derive_seed(config.master_seed, "delta"), threads);
  if (s.moment_samples > 0) {
    if (config.n_schedule.empty()) {
      report.warnings.push_back("moment diagnostic skipped: empty n_schedule");
    } else {
      const DensityGrid f = config.density ? *config.density
                                           : DensityGrid::constant(cube_of_volume(1.0, config.dimension), lambda);
      report.moments = moment_diagnostic(config.functional, f, config.n_schedule, s.moment_p, s.moment_samples,
                                         s.moment_window, derive_seed(config.master_seed, "moments"), threads);
    }
  }
  return report;
}

json percolation_to_json(const PercolationEstimate& e) {
  json j;
  j["experiment"] = "percolation";
  j["dimension"] = e.dimension;
  j["relative_spread"] = e.relative_spread;
  j["curves"] = json::array();
  for (const auto& c : e.curves) {
    j["curves"].push_back({{"side", c.side},
                           {"radii", c.radii},
                           {"fraction", c.fraction},
                           {"std_error", c.std_error},
                           {"r_hat", c.r_hat},
                           {"band_low", c.band_low},
                           {"band_high", c.band_high},
                           {"median_critical", c.median_critical},
                           {"bracketed", c.bracketed}});
  }
  return j;
}

PercolationEstimate run_percolation(const ExperimentConfig& config, unsigned threads) {
  const PercolationSettings& p = config.percolation;
  return estimate_percolation_radius(config.dimension, p.sides, effective_radius_grid(p), p.replications,
                                     config.master_seed, threads);
}

}  // namespace stabclt
