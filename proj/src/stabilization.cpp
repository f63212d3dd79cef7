#include "stabclt/stabilization.hpp"

#include <algorithm>
#include <cmath>

#include "stabclt/error.hpp"
#include "stabclt/parallel.hpp"
#include "stabclt/stats.hpp"

namespace stabclt {

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

StabilizationTrace trace_add_one_cost(const FunctionalSpec& spec, std::size_t dimension, double lambda,
                                      double max_halfwidth, std::size_t steps, RngStream& rng) {
  spec.validate(dimension);
  if (!(lambda >= 0.0)) throw InputError("trace_add_one_cost: lambda must be >= 0");
  if (!(max_halfwidth > 0.0)) throw InputError("trace_add_one_cost: max_halfwidth must be positive");
  if (steps < 2) throw InputError("trace_add_one_cost: need at least 2 nested windows");

  StabilizationTrace trace;
  trace.lambda = lambda;
  trace.sample = sample_homogeneous(lambda, Box::centered_cube(dimension, max_halfwidth), rng);
  const std::vector<double> origin(dimension, 0.0);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double h = max_halfwidth * static_cast<double>(i) / static_cast<double>(steps);
    const PointCloud local = i == steps ? trace.sample : trace.sample.restricted_to(Box::centered_cube(dimension, h));
    trace.half_widths.push_back(h);
    trace.window_volumes.push_back(std::pow(2.0 * h, static_cast<double>(dimension)));
    trace.d0_values.push_back(add_one_cost_unrestricted(spec, local, origin));
  }
  const double final_value = trace.d0_values.back();
  std::size_t first = trace.d0_values.size() - 1;
  while (first > 0 && trace.d0_values[first - 1] == final_value) --first;
  if (first + 1 < trace.d0_values.size()) {
    trace.settle_radius = trace.half_widths[first];
  }
  return trace;
}

InjectionOutcome inject_far_points(const FunctionalSpec& spec, const StabilizationTrace& trace, std::size_t count,
                                   RngStream& rng) {
  if (!trace.settled()) throw InputError("inject_far_points: trace is not settled");
  const std::size_t d = trace.sample.dimension();
  const double settle = *trace.settle_radius;
  const double outer = trace.half_widths.back();
  const Box master = Box::centered_cube(d, outer);

  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < trace.sample.size(); ++i) {
    if (norm(trace.sample[i]) > settle) anchors.push_back(i);
  }

  InjectionOutcome outcome;
  outcome.before = trace.d0_values.back();
  outcome.injected = PointCloud(d);
  std::vector<double> x(d);
  for (std::size_t placed = 0; placed < count; ++placed) {
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !anchors.empty() && !ok; ++attempt) {
      const auto anchor = trace.sample[anchors[rng.below(anchors.size())]];
      double len = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        x[a] = rng.normal();
        len += x[a] * x[a];
      }
      len = std::sqrt(len);
      const double step = rng.uniform(0.0, 2.0 * spec.r);
      for (std::size_t a = 0; a < d; ++a) x[a] = anchor[a] + step * x[a] / len;
      ok = norm(x) > settle && master.contains(x);
    }
    while (!ok) {
      for (std::size_t a = 0; a < d; ++a) x[a] = rng.uniform(-outer, outer);
      ok = norm(x) > settle;
    }
    outcome.injected.push_back(x);
  }

  PointCloud augmented = trace.sample;
  for (std::size_t i = 0; i < outcome.injected.size(); ++i) augmented.push_back(outcome.injected[i]);
  const std::vector<double> origin(d, 0.0);
  outcome.after = add_one_cost_unrestricted(spec, augmented, origin);
  return outcome;
}

std::vector<double> settle_tail(const std::vector<StabilizationTrace>& traces, const std::vector<double>& thresholds) {
  std::vector<double> tail;
  tail.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t exceed = 0;
    for (const auto& trace : traces) {
      if (!trace.settled() || *trace.settle_radius > t) ++exceed;
    }
    tail.push_back(traces.empty() ? 0.0 : static_cast<double>(exceed) / static_cast<double>(traces.size()));
  }
  return tail;
}

DeltaEstimate estimate_limit_delta(const FunctionalSpec& spec, std::size_t dimension, double lambda,
                                   double half_width, std::size_t replications, std::uint64_t seed,
                                   unsigned threads) {
  spec.validate(dimension);
  if (replications < 2) throw InputError("estimate_limit_delta: need at least 2 replications");
  if (!(half_width > 0.0)) throw InputError("estimate_limit_delta: half_width must be positive");
  std::vector<double> values(replications);
  const Box window = Box::centered_cube(dimension, half_width);
  const std::vector<double> origin(dimension, 0.0);
  parallel_for(replications, threads, [&](std::size_t i) {
    RngStream rng(seed, i);
    const PointCloud cloud = sample_homogeneous(lambda, window, rng);
    values[i] = add_one_cost_unrestricted(spec, cloud, origin);
  });
  const Moments m = moments(values);
  DeltaEstimate est;
  est.mean = m.mean;
  est.variance = m.variance;
  est.std_error = std::sqrt(m.variance / static_cast<double>(replications));
  est.replications = replications;
  est.half_width = half_width;
  return est;
}

double empirical_p_norm(const std::vector<double>& abs_values, double p) {
  if (abs_values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : abs_values) sum += std::pow(std::abs(v), p);
  return std::pow(sum / static_cast<double>(abs_values.size()), 1.0 / p);
}

MomentTable moment_diagnostic(const FunctionalSpec& spec, const DensityGrid& f, const std::vector<double>& n_values,
                              double p, std::size_t samples_per_n, double window_side, std::uint64_t seed,
                              unsigned threads) {
  const std::size_t d = f.dimension();
  spec.validate(d);
  if (!(p > 2.0)) throw InputError("moment_diagnostic: p must exceed 2");
  if (!(window_side > 0.0)) throw InputError("moment_diagnostic: window_side must be positive");
  MomentTable table;
  table.p = p;
  for (std::size_t j = 0; j < n_values.size(); ++j) {
    const double n = n_values[j];
    if (!(n > 0.0)) throw InputError("moment_diagnostic: n values must be positive");
    const double scale = std::pow(n, 1.0 / static_cast<double>(d));
    const DensityGrid intensity = f.scaled(n);
    const std::uint64_t row_seed = derive_seed(seed, "moment-row", j);
    std::vector<double> costs(samples_per_n);
    std::vector<double> local(samples_per_n);
    parallel_for(samples_per_n, threads, [&](std::size_t s) {
      RngStream rng(row_seed, s);
      const PointCloud cloud = scale_cloud(sample_inhomogeneous(intensity, rng), scale);
      std::vector<double> y(d);
      std::vector<double> corner(d);
      const double side = rng.uniform(0.5 * window_side, window_side);
      for (std::size_t a = 0; a < d; ++a) {
        const double lo = f.support().lower(a) * scale;
        y[a] = lo + rng.uniform() * f.support().side_lengths()[a] * scale;
        corner[a] = y[a] - rng.uniform(0.0, 0.999) * side;
      }
      const Box window = Box::cube(Point(corner), side);
      const AddOneCostRecord rec = add_one_cost(spec, cloud, Point(y), window);
      costs[s] = std::abs(rec.value);
      local[s] = std::abs(evaluate(spec, cloud.restricted_to(window)));
    });
    MomentRow row;
    row.n = n;
    row.samples = samples_per_n;
    row.p_norm = empirical_p_norm(costs, p);
    row.pth_moment = std::pow(row.p_norm, p);
    row.max_abs_cost = costs.empty() ? 0.0 : *std::ranges::max_element(costs);
    row.local_moment = std::pow(empirical_p_norm(local, p), p);
    row.abs_costs = std::move(costs);
    table.sup_pth_moment = std::max(table.sup_pth_moment, row.pth_moment);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace stabclt
