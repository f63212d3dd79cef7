#include "stabclt/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "stabclt/cech.hpp"
#include "stabclt/error.hpp"
#include "stabclt/harness.hpp"
#include "stabclt/homology.hpp"
#include "stabclt/parallel.hpp"

namespace stabclt {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kReplicationColumns{"index", "n", "process", "H", "count"};
const std::vector<std::string> kTimingColumns{"index", "n", "process", "ms"};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Shortest round-trip decimal, "inf" for infinities.
std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw OutputError(dir_.string() + ": cannot create output directory");
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError(path.string() + ": cannot open for writing");
    out << content;
    out.close();
    if (!out) throw OutputError(path.string() + ": write failed");
    files_.push_back(name);
  }

  const fs::path& path() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void write_records(OutputDir& dir, const std::vector<ReplicationRecord>& records) {
  std::ostringstream rep;
  std::ostringstream tim;
  rep << "index,n,process,H,count\n";
  tim << "index,n,process,ms\n";
  for (const auto& r : records) {
    rep << r.index << ',' << num(r.n) << ',' << r.process << ',' << num(r.value) << ',' << r.count << '\n';
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.ms);
    tim << r.index << ',' << num(r.n) << ',' << r.process << ',' << ms << '\n';
  }
  dir.write("replications.csv", rep.str());
  dir.write("timings.csv", tim.str());
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string clt_table(const CltSummary& s) {
  std::ostringstream out;
  out << s.experiment << "  H=" << s.functional.name() << "  r=" << num(s.functional.r) << "  d=" << s.dimension
      << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%10s %-12s %12s %12s %12s %8s %8s\n", "n", "process", "mean", "var/n", "se",
                "KS", "KS p");
  out << line;
  for (const auto& r : s.rows) {
    std::snprintf(line, sizeof line, "%10g %-12s %12.5g %12.5g %12.3g %8.4f %8.4f%s\n", r.n, r.process.c_str(),
                  r.mean, r.variance_over_n, r.variance_over_n_se, r.ks_statistic, r.ks_p_value,
                  r.degenerate ? "  degenerate" : "");
    out << line;
  }
  auto opt = [&](const char* label, const std::optional<double>& v) {
    if (v) out << "  " << label << " = " << fmt("%.6g", *v) << "\n";
  };
  opt("sigma2_hat", s.sigma2_hat);
  opt("variance rel. change", s.variance_relative_change);
  opt("predicted sigma2", s.predicted_sigma2);
  opt("sigma2 rel. error", s.sigma2_relative_error);
  opt("delta_bar", s.delta_bar);
  opt("tau2_hat", s.tau2_hat);
  opt("variance gap", s.variance_gap);
  opt("gap rel. error", s.gap_relative_error);
  if (s.binomial_below_poisson) opt("Pitman-Morgan p", s.binomial_below_poisson->p_value);
  opt("critical radius", s.critical_radius);
  opt("gate limit", s.gate_limit);
  opt("SLLN rel. change", s.slln_relative_change);
  for (const auto& w : s.warnings) out << "  warning: " << w << "\n";
  return out.str();
}

PointCloud sample_for(const ExperimentConfig& c, RngStream& rng, double* n_out) {
  const std::size_t d = c.dimension;
  const double n = c.n_schedule.empty() ? 1.0 : c.n_schedule.back();
  *n_out = n;
  if (c.process == "homogeneous") {
    if (!c.lambda) throw InputError("sample: process \"homogeneous\" needs \"lambda\"");
    const Box box = c.density ? c.density->support()
                              : Box::cube(Point(std::vector<double>(d, 0.0)), std::pow(n, 1.0 / static_cast<double>(d)));
    return sample_homogeneous(*c.lambda, box, rng);
  }
  const DensityGrid f = experiment_density(c);
  if (c.process == "binomial") {
    if (n != std::floor(n)) throw InputError("sample: binomial n must be an integer");
    return sample_binomial(f, static_cast<std::size_t>(n), rng);
  }
  return sample_inhomogeneous(f.scaled(n), rng);
}

RunOutcome finish(OutputDir& dir, const RunRequest& req, json summary, std::string table, const std::string& started) {
  summary["experiment"] = req.experiment;
  dir.write("summary.json", summary.dump(2) + "\n");
  json manifest;
  manifest["manifest_version"] = kManifestVersion;
  manifest["tool"] = "stabclt";
  manifest["version"] = kToolVersion;
  manifest["experiment"] = req.experiment;
  manifest["config_hash"] = config_hash(req.config);
  manifest["master_seed"] = req.config.master_seed;
  manifest["threads"] = req.threads;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  std::vector<std::string> outputs = dir.files();
  outputs.push_back("manifest.json");
  manifest["outputs"] = outputs;
  manifest["csv_schema"] = {{"replications.csv", kReplicationColumns}, {"timings.csv", kTimingColumns}};
  manifest["config"] = config_to_json(req.config);
  dir.write("manifest.json", manifest.dump(2) + "\n");
  return RunOutcome{dir.path(), dir.files(), std::move(summary), std::move(table)};
}

}  // namespace

RunOutcome run_experiment(const RunRequest& req) {
  const ExperimentConfig& c = req.config;
  if (std::ranges::find(kExperimentKinds, req.experiment) == std::end(kExperimentKinds)) {
    throw InputError("unknown experiment \"" + req.experiment + "\"");
  }
  if (!c.experiment.empty() && c.experiment != req.experiment) {
    throw InputError("config is for experiment \"" + c.experiment + "\", not \"" + req.experiment + "\"");
  }
  const std::string started = utc_now();
  const unsigned threads = std::max(1u, req.threads);
  OutputDir dir(c.output_directory);
  const std::string& e = req.experiment;

  if (e == "sample") {
    RngStream rng(derive_seed(c.master_seed, "sample"), 0);
    double n = 0.0;
    const PointCloud cloud = sample_for(c, rng, &n);
    std::ostringstream csv;
    write_cloud_csv(csv, cloud);
    dir.write("points.csv", csv.str());
    const double value = evaluate(c.functional, scale_cloud(cloud, std::pow(n, 1.0 / static_cast<double>(c.dimension))));
    write_records(dir, {ReplicationRecord{0, n, c.process, value, cloud.size(), 0.0}});
    json summary = {{"process", c.process}, {"n", n}, {"count", cloud.size()}, {"H_scaled", value}};
    return finish(dir, req, summary,
                  "sample  process=" + c.process + "  n=" + num(n) + "  points=" + std::to_string(cloud.size()) + "\n",
                  started);
  }
  if (e == "betti") {
    PointCloud cloud(c.dimension);
    double n = 0.0;
    if (c.points) {
      cloud = *c.points;
    } else {
      RngStream rng(derive_seed(c.master_seed, "sample"), 0);
      cloud = sample_for(c, rng, &n);
      cloud = scale_cloud(cloud, std::pow(n, 1.0 / static_cast<double>(c.dimension)));
    }
    const SimplicialComplex complex = build_cech(cloud, c.functional.r, c.dimension);
    const std::size_t k_cap = std::min(c.dimension - 1, complex.dimension_cap() - 1);
    const BettiVector betti = betti_numbers(complex, k_cap);
    dir.write("complex.json", complex_to_json(complex).dump() + "\n");
    std::vector<std::size_t> counts;
    for (std::size_t k = 0; k <= complex.dimension_cap(); ++k) counts.push_back(complex.count(k));
    const auto b0 = betti0_unionfind(complex);
    write_records(dir, {ReplicationRecord{0, n, c.points ? "points" : c.process,
                                          static_cast<double>(betti[std::min(c.functional.k, k_cap)]), cloud.size(),
                                          0.0}});
    json summary = {{"r", c.functional.r},
                    {"vertex_count", complex.vertex_count()},
                    {"simplex_counts", counts},
                    {"betti", betti.values},
                    {"betti0_unionfind", b0},
                    {"euler_characteristic", euler_characteristic(complex)}};
    std::ostringstream table;
    table << "betti  r=" << num(c.functional.r) << "  vertices=" << complex.vertex_count() << "\n  beta = (";
    for (std::size_t k = 0; k < betti.size(); ++k) table << (k ? ", " : "") << betti[k];
    table << ")\n  simplices per dimension:";
    for (auto v : counts) table << ' ' << v;
    table << "\n";
    return finish(dir, req, summary, table.str(), started);
  }
  if (e == "clt-homogeneous" || e == "clt-poisson" || e == "clt-binomial") {
    CltSummary s;
    if (e == "clt-homogeneous") {
      s = run_homogeneous_clt(c, threads);
    } else if (e == "clt-poisson") {
      s = run_inhomogeneous_clt(c, threads);
    } else if (c.functional.kind == FunctionalKind::betti) {
      s = run_betti_clt(c, threads);
    } else {
      s = run_depoissonization(c, threads);
    }
    write_records(dir, s.records);
    return finish(dir, req, summary_to_json(s), clt_table(s), started);
  }
  if (e == "clt-blocks") {
    const BlockTable t = run_block_approximation(c, threads);
    write_records(dir, t.records);
    std::ostringstream table;
    table << "clt-blocks  n=" << num(t.n) << "  H=" << c.functional.name() << "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%10s %8s %12s %14s %12s\n", "L", "blocks", "covered", "Var[Y-X]", "se");
    table << line;
    for (const auto& r : t.rows) {
      std::snprintf(line, sizeof line, "%10g %8zu %12g %14.5g %12.3g\n", r.L, r.blocks_per_axis, r.covered_volume,
                    r.difference_variance, r.difference_variance_se);
      table << line;
    }
    for (const auto& w : t.warnings) table << "  notice: " << w << "\n";
    return finish(dir, req, block_table_to_json(t), table.str(), started);
  }
  if (e == "stabilization") {
    const StabilizationReport r = run_stabilization(c, threads);
    std::vector<ReplicationRecord> records;
    std::ostringstream traces;
    traces << "index,half_width,d0\n";
    for (const auto& t : r.trace_records) {
      records.push_back(ReplicationRecord{t.index, t.settle_radius.value_or(-1.0), "trace", t.final_d0, t.points, 0.0});
      for (std::size_t w = 0; w < t.half_widths.size(); ++w) {
        traces << t.index << ',' << num(t.half_widths[w]) << ',' << num(t.d0_values[w]) << '\n';
      }
    }
    write_records(dir, records);
    dir.write("traces.csv", traces.str());
    std::ostringstream table;
    table << "stabilization  H=" << c.functional.name() << "  lambda=" << num(r.lambda) << "\n"
          << "  traces=" << r.traces << "  settled=" << r.settled << "  settled by " << num(r.settle_threshold)
          << ": " << fmt("%.4f", r.settled_by_threshold) << "\n"
          << "  injection unchanged: " << r.injection_unchanged << "/" << r.injection_tested << "\n"
          << "  Delta estimate: " << fmt("%.5g", r.delta.mean) << " +- " << fmt("%.2g", r.delta.std_error) << "\n";
    if (r.moments) table << "  sup p-th moment (p=" << num(r.moments->p) << "): " << fmt("%.5g", r.moments->sup_pth_moment) << "\n";
    return finish(dir, req, stabilization_to_json(r), table.str(), started);
  }
  if (e == "percolation") {
    const PercolationEstimate p = run_percolation(c, threads);
    std::vector<ReplicationRecord> records;
    std::ostringstream curve;
    curve << "side,r,fraction,std_error\n";
    std::ostringstream table;
    table << "percolation  d=" << p.dimension << "\n";
    for (const auto& cv : p.curves) {
      for (std::size_t i = 0; i < cv.critical_radii.size(); ++i) {
        records.push_back(ReplicationRecord{i, cv.side, "torus", cv.critical_radii[i], 0, 0.0});
      }
      for (std::size_t g = 0; g < cv.radii.size(); ++g) {
        curve << num(cv.side) << ',' << num(cv.radii[g]) << ',' << num(cv.fraction[g]) << ',' << num(cv.std_error[g])
              << '\n';
      }
      table << "  side " << num(cv.side) << ": r_hat=" << fmt("%.4f", cv.r_hat) << "  band=[" << fmt("%.4f", cv.band_low)
            << ", " << fmt("%.4f", cv.band_high) << "]" << (cv.bracketed ? "" : "  (not bracketed by grid)") << "\n";
    }
    table << "  relative spread: " << fmt("%.4f", p.relative_spread) << "\n";
    write_records(dir, records);
    dir.write("curve.csv", curve.str());
    return finish(dir, req, percolation_to_json(p), table.str(), started);
  }
  // coupling-check
  const CouplingReport r = run_coupling_check(c, threads);
  write_records(dir, r.records);
  std::ostringstream table;
  table << "coupling-check  trials=" << r.trials << "\n  identity frequency " << fmt("%.4f", r.identity_frequency)
        << "  expected exp(-L1) " << fmt("%.4f", r.expected_identity) << "  (se " << fmt("%.4f", r.std_error) << ")\n";
  return finish(dir, req, coupling_to_json(r), table.str(), started);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo toolkit for CLTs of stabilizing functionals on random geometric complexes", "stabclt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = default_thread_count();
  std::string out_dir;
  const char* help[] = {
      "Draw one point cloud and write points.csv",
      "Build the Cech complex of a cloud and report its Betti numbers",
      "Variance/n and normality of H on homogeneous Poisson cubes",
      "Block approximation Var[Y_n - X_{n,L}] over block volumes L",
      "Inhomogeneous Poisson CLT with the level-table variance prediction",
      "Fixed-count process: de-Poissonization or the Betti-number pipeline",
      "Add-one cost traces, settle radii, far-point injection, Delta estimate",
      "Spanning-probability curves and critical radius on tori",
      "Identity frequency of the coupled pair against exp(-L1 distance)"};
  std::vector<CLI::App*> subs;
  std::size_t i = 0;
  for (std::string_view kind : kExperimentKinds) {
    CLI::App* sub = app.add_subcommand(std::string(kind), help[i++]);
    sub->add_option("--config", config_path, "Experiment config (JSON) or a run manifest")->required();
    sub->add_option("--seed", seed, "Override the master seed");
    sub->add_option("--threads", threads, "Worker threads (default: hardware concurrency)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  const CLI::App* chosen = nullptr;
  for (const CLI::App* sub : subs) {
    if (sub->parsed()) chosen = sub;
  }
  try {
    RunRequest req;
    req.experiment = chosen->get_name();
    req.config = load_config(config_path);
    if (chosen->count("--seed") > 0) req.config.master_seed = seed;
    if (!out_dir.empty()) req.config.output_directory = out_dir;
    req.threads = threads;
    const RunOutcome outcome = run_experiment(req);
    out << outcome.table << "outputs written to " << outcome.directory.string() << "\n";
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace stabclt
