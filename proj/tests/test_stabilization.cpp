#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stabclt/error.hpp"
#include "stabclt/stabilization.hpp"
#include "stabclt/stats.hpp"

using namespace stabclt;

namespace {

FunctionalSpec components(double r) { return FunctionalSpec{FunctionalKind::component_count, 0, r}; }

std::vector<StabilizationTrace> traces(const FunctionalSpec& spec, double lambda, std::size_t count,
                                       std::uint64_t seed) {
  std::vector<StabilizationTrace> out;
  for (std::size_t i = 0; i < count; ++i) {
    RngStream rng(seed, i);
    out.push_back(trace_add_one_cost(spec, 2, lambda, 6.0, 12, rng));
  }
  return out;
}

double settle_or_cap(const StabilizationTrace& t) { return t.settle_radius.value_or(7.0); }

}  // namespace

TEST_CASE("empty process settles at the first window") {
  RngStream rng(1, 0);
  const StabilizationTrace t = trace_add_one_cost(components(0.3), 2, 0.0, 4.0, 8, rng);
  CHECK(t.settled());
  CHECK(*t.settle_radius == doctest::Approx(0.5));
  for (double v : t.d0_values) CHECK(v == 1.0);
  CHECK(t.sample.empty());
  for (std::size_t i = 1; i < t.half_widths.size(); ++i) {
    CHECK(t.half_widths[i] > t.half_widths[i - 1]);
    CHECK(t.window_volumes[i] > t.window_volumes[i - 1]);
  }
}

TEST_CASE("trace validation") {
  RngStream rng(1, 1);
  CHECK_THROWS_AS(trace_add_one_cost(components(0.3), 2, 1.0, 4.0, 1, rng), InputError);
  CHECK_THROWS_AS(trace_add_one_cost(components(0.3), 2, -1.0, 4.0, 8, rng), InputError);
  CHECK_THROWS_AS(trace_add_one_cost(components(0.3), 2, 1.0, 0.0, 8, rng), InputError);
}

TEST_CASE("component-count traces settle by half-width 3") {
  const auto all = traces(components(0.3), 1.0, 500, 2);
  const std::vector<double> thresholds{3.0};
  const double late = settle_tail(all, thresholds)[0];
  MESSAGE("fraction unsettled at 3.0: " << late);
  CHECK(late < 0.05);
}

TEST_CASE("settle tail is nonincreasing") {
  const auto all = traces(FunctionalSpec{FunctionalKind::betti, 1, 0.3}, 1.0, 100, 3);
  const auto tail = settle_tail(all, all.front().half_widths);
  for (std::size_t i = 1; i < tail.size(); ++i) CHECK(tail[i] <= tail[i - 1]);
}

TEST_CASE("settle radius is stochastically smaller far below percolation") {
  const auto low = traces(components(0.15), 1.0, 300, 4);
  const auto high = traces(components(0.55), 1.0, 300, 5);
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& t : low) a.push_back(settle_or_cap(t));
  for (const auto& t : high) b.push_back(settle_or_cap(t));
  const std::vector<double> grid{0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0};
  const auto tail_low = settle_tail(low, grid);
  const auto tail_high = settle_tail(high, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(tail_low[i] <= tail_high[i] + 0.02);
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double z = (mb.mean - ma.mean) / std::sqrt(ma.variance / a.size() + mb.variance / b.size());
  CHECK(z > 3.0);
}

TEST_CASE("far-point injection leaves D_0 unchanged on settled traces") {
  for (const FunctionalSpec& spec : {components(0.3), FunctionalSpec{FunctionalKind::betti, 1, 0.3}}) {
    const auto all = traces(spec, 1.0, 200, 6);
    std::size_t tested = 0;
    std::size_t unchanged = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (!all[i].settled()) continue;
      RngStream rng(7, i);
      const InjectionOutcome out = inject_far_points(spec, all[i], 10, rng);
      CHECK(out.injected.size() == 10);
      for (std::size_t p = 0; p < out.injected.size(); ++p) {
        double norm = 0.0;
        for (double x : out.injected[p]) norm += x * x;
        CHECK(std::sqrt(norm) > *all[i].settle_radius);
      }
      ++tested;
      unchanged += out.unchanged() ? 1 : 0;
    }
    REQUIRE(tested > 0);
    CHECK(static_cast<double>(unchanged) >= 0.99 * static_cast<double>(tested));
  }
}

TEST_CASE("injection requires a settled trace") {
  StabilizationTrace t;
  t.sample = PointCloud(2);
  t.half_widths = {1.0, 2.0};
  t.d0_values = {0.0, 1.0};
  RngStream rng(8, 0);
  CHECK_THROWS_AS(inject_far_points(components(0.3), t, 3, rng), InputError);
}

TEST_CASE("estimate_limit_delta trivial cases") {
  const DeltaEstimate c = estimate_limit_delta(components(0.3), 2, 0.0, 3.0, 50, 9, 1);
  CHECK(c.mean == 1.0);
  CHECK(c.std_error == 0.0);
  const DeltaEstimate b = estimate_limit_delta(FunctionalSpec{FunctionalKind::betti, 1, 0.3}, 2, 0.0, 3.0, 50, 9, 1);
  CHECK(b.mean == 0.0);
}

TEST_CASE("estimate_limit_delta agrees with an independent implementation") {
  const std::size_t m = 10000;
  const double h = 3.0;
  const DeltaEstimate est = estimate_limit_delta(components(0.3), 2, 1.0, h, m, 10, 2);
  std::mt19937_64 engine(2024);
  std::vector<double> ref(m);
  for (auto& v : ref) v = oracle::component_d0(engine, 1.0, h, 2, 0.3);
  const Moments mr = moments(ref);
  const double se_ref = std::sqrt(mr.variance / static_cast<double>(m));
  MESSAGE("library " << est.mean << " +- " << est.std_error << ", oracle " << mr.mean << " +- " << se_ref);
  CHECK(std::abs(est.mean - mr.mean) <= 3.0 * std::sqrt(est.std_error * est.std_error + se_ref * se_ref));
}

TEST_CASE("moment diagnostic") {
  const FunctionalSpec spec{FunctionalKind::edge_count, 0, 0.3};
  const DensityGrid f = DensityGrid::constant(Box::cube(Point{0, 0}, 1.0), 0.5);
  const MomentTable table = moment_diagnostic(spec, f, {50.0, 100.0}, 3.0, 100, 4.0, 11, 1);
  REQUIRE(table.rows.size() == 2);
  for (const auto& row : table.rows) {
    CHECK(std::isfinite(row.pth_moment));
    CHECK(row.samples == 100);
    CHECK(table.sup_pth_moment >= row.pth_moment);
    // Normalised p-norms are nondecreasing in p.
    double previous = 0.0;
    for (double p : {3.0, 4.0, 6.0, 8.0}) {
      const double norm = empirical_p_norm(row.abs_costs, p);
      CHECK(norm >= previous - 1e-12);
      previous = norm;
    }
  }
  const DensityGrid empty = DensityGrid::constant(Box::cube(Point{0, 0}, 1.0), 0.0);
  const MomentTable zero = moment_diagnostic(FunctionalSpec{FunctionalKind::betti, 1, 0.3}, empty, {50.0}, 3.0, 20,
                                             4.0, 12, 1);
  CHECK(zero.sup_pth_moment == 0.0);
  CHECK_THROWS_AS(moment_diagnostic(spec, f, {50.0}, 2.0, 10, 4.0, 13, 1), InputError);
}
