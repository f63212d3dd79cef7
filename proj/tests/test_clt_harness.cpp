#include <doctest.h>

#include <cmath>
#include <deque>

#include <boost/math/distributions/normal.hpp>

#include "generators.hpp"
#include "oracles.hpp"
#include "stabclt/error.hpp"
#include "stabclt/harness.hpp"
#include "stabclt/percolation.hpp"
#include "stabclt/rng.hpp"
#include "stabclt/stats.hpp"

using namespace stabclt;

namespace {

ExperimentConfig base_config(FunctionalSpec spec, std::size_t d = 2) {
  ExperimentConfig c;
  c.functional = spec;
  c.dimension = d;
  c.master_seed = 99;
  return c;
}

// Wrap detection by breadth-first search with unwrapped positions.
bool oracle_spans(const std::vector<std::vector<double>>& pts, double side, double r) {
  const std::size_t n = pts.size();
  const std::size_t d = n ? pts[0].size() : 0;
  std::vector<bool> seen(n, false);
  std::vector<std::vector<double>> pos(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = true;
    pos[s] = pts[s];
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t w = 0; w < n; ++w) {
        if (w == v) continue;
        std::vector<double> delta(d);
        double sq = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
          double x = pts[w][a] - pts[v][a];
          x -= side * std::round(x / side);
          delta[a] = x;
          sq += x * x;
        }
        if (sq > 4.0 * r * r) continue;
        std::vector<double> target(d);
        for (std::size_t a = 0; a < d; ++a) target[a] = pos[v][a] + delta[a];
        if (!seen[w]) {
          seen[w] = true;
          pos[w] = target;
          queue.push_back(w);
        } else if (std::abs(target[0] - pos[w][0]) > 0.5 * side) {
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

TEST_CASE("moments and standardisation") {
  const std::vector<double> x{1, 2, 3, 4, 10};
  const Moments m = moments(x);
  CHECK(m.mean == doctest::Approx(4.0));
  CHECK(m.variance == doctest::Approx(12.5));
  CHECK(m.skewness > 0.0);
  CHECK_THROWS_AS(moments(std::vector<double>{}), InputError);
  const auto z = standardize(x);
  CHECK(moments(z).variance == doctest::Approx(1.0));
  CHECK(standardize(std::vector<double>{2, 2, 2}) == std::vector<double>{0, 0, 0});
}

TEST_CASE("ks statistic on exact quantiles") {
  const boost::math::normal normal;
  for (std::size_t n : {10u, 100u, 1000u}) {
    std::vector<double> q;
    for (std::size_t i = 0; i < n; ++i) q.push_back(boost::math::quantile(normal, (i + 0.5) / static_cast<double>(n)));
    CHECK(ks_statistic(q, standard_normal_cdf) <= 1.0 / (2.0 * static_cast<double>(n)) + 1e-12);
  }
  CHECK(two_sample_ks(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}).statistic == 0.0);
  CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.26999967).epsilon(1e-6));
  CHECK(kolmogorov_survival(1.3580986) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, standard_normal_cdf), InputError);
}

TEST_CASE("ks calibration battery") {
  int accepted = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    RngStream rng(31, run);
    std::vector<double> z(10000);
    for (auto& v : z) v = rng.normal();
    accepted += ks_test(z, standard_normal_cdf).p_value > 0.01 ? 1 : 0;
  }
  CHECK(accepted >= 98);
}

TEST_CASE("chi-square and Pitman-Morgan") {
  CHECK_THROWS_AS(chi_square_gof(std::vector<double>{3, 7}, std::vector<double>{4, 6}), InputError);
  const TestResult fit = chi_square_gof(std::vector<double>{50, 50}, std::vector<double>{50, 50});
  CHECK(fit.statistic == 0.0);
  CHECK(fit.p_value == doctest::Approx(1.0));
  RngStream rng(32, 0);
  std::vector<double> a(500);
  std::vector<double> b(500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double common = rng.normal();
    a[i] = common + 1.0 * rng.normal();
    b[i] = common + 0.5 * rng.normal();
  }
  CHECK(pitman_morgan_greater(a, b).p_value < 0.01);
  CHECK(pitman_morgan_greater(b, a).p_value > 0.99);
}

TEST_CASE("torus wrapping radius") {
  std::vector<std::vector<double>> row;
  for (int i = 0; i < 10; ++i) row.push_back({i + 0.5, 3.0});
  CHECK(wrapping_radius(gen::cloud(row, 2), 10.0, 1.0) == doctest::Approx(0.5));
  std::vector<std::vector<double>> column;
  for (int i = 0; i < 10; ++i) column.push_back({3.0, i + 0.5});
  CHECK(std::isinf(wrapping_radius(gen::cloud(column, 2), 10.0, 0.6)));

  gen::Engine e(33);
  for (int trial = 0; trial < 60; ++trial) {
    const double side = trial % 2 == 0 ? 3.0 : 8.0;  // brute-force and grid paths
    const std::size_t d = trial % 3 == 0 ? 3 : 2;
    const auto pts = gen::points(e, static_cast<std::size_t>(std::pow(side, static_cast<double>(d))), d, 0.0, side);
    for (double r : {0.3, 0.45, 0.6, 0.8}) {
      CHECK(spans_torus(gen::cloud(pts, d), side, r) == oracle_spans(pts, side, r));
    }
  }
}

TEST_CASE("spanning fractions in the sub- and supercritical regimes") {
  const PercolationEstimate low = estimate_percolation_radius(2, {20.0}, {0.1, 0.15}, 50, 34, 1);
  CHECK(low.curves[0].fraction[1] == 0.0);
  const PercolationEstimate high = estimate_percolation_radius(2, {20.0}, {1.1, 1.2}, 50, 35, 1);
  CHECK(high.curves[0].fraction[0] == 1.0);
}

TEST_CASE("spanning curve is monotone and the crossing lies on the grid") {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.45 + 0.03 * i);
  const PercolationEstimate est = estimate_percolation_radius(2, {10.0, 14.0}, grid, 60, 36, 2);
  for (const auto& c : est.curves) {
    for (std::size_t i = 1; i < c.fraction.size(); ++i) CHECK(c.fraction[i] >= c.fraction[i - 1]);
    CHECK(c.r_hat >= grid.front());
    CHECK(c.r_hat <= grid.back());
    CHECK(c.band_low <= c.r_hat);
    CHECK(c.band_high >= c.r_hat);
  }
  bool bracketed = false;
  CHECK(crossing_point({1.0, 2.0, 3.0}, {0.0, 0.25, 0.75}, 0.5, &bracketed) == doctest::Approx(2.5));
  CHECK(bracketed);
}

TEST_CASE("homogeneous CLT: empty process is flagged, not a crash") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::betti, 1, 0.3});
  c.lambda = 0.0;
  c.n_schedule = {10.0, 20.0};
  c.replications = 5;
  const CltSummary s = run_homogeneous_clt(c, 1);
  for (const auto& row : s.rows) {
    CHECK(row.variance_over_n == 0.0);
    CHECK(row.degenerate);
  }
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("homogeneous CLT: edge count mean matches the closed form in d = 1") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::edge_count, 0, 0.25}, 1);
  c.lambda = 1.0;
  c.n_schedule = {50.0, 100.0, 200.0};
  c.replications = 400;
  const CltSummary s = run_homogeneous_clt(c, 2);
  for (const auto& row : s.rows) {
    const double expected = oracle::expected_edges_interval(1.0, 0.25, row.n);
    const double se = std::sqrt(row.variance / static_cast<double>(row.replications));
    CHECK(std::abs(row.mean - expected) <= 3.0 * se);
  }
}

TEST_CASE("inhomogeneous CLT reproduces the homogeneous one for constant f") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::edge_count, 0, 0.3});
  c.lambda = 1.0;
  c.n_schedule = {100.0};
  c.replications = 400;
  const CltSummary hom = run_homogeneous_clt(c, 1);
  c.density = DensityGrid::constant(Box::cube(Point{0, 0}, 1.0), 1.0);
  c.levels.replications = 400;
  const CltSummary inh = run_inhomogeneous_clt(c, 1);
  const auto& a = hom.rows[0];
  const auto& b = inh.rows[0];
  CHECK(std::abs(a.variance_over_n - b.variance_over_n) <=
        3.0 * std::hypot(a.variance_over_n_se, b.variance_over_n_se));
  REQUIRE(inh.levels.size() == 1);
  CHECK(std::abs(*inh.predicted_sigma2 - b.variance_over_n) <=
        3.0 * std::hypot(*inh.predicted_sigma2_se, b.variance_over_n_se));
}

TEST_CASE("zero-level region contributes nothing to the prediction") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::edge_count, 0, 0.3});
  c.density = DensityGrid(Box::cube(Point{0, 0}, 1.0), {2, 1}, {0.0, 1.0});
  c.n_schedule = {100.0};
  c.replications = 50;
  const CltSummary s = run_inhomogeneous_clt(c, 1);
  REQUIRE(s.levels.size() == 2);
  CHECK(s.levels[0].lambda == 0.0);
  CHECK(s.levels[0].sigma2_hat == 0.0);
  CHECK(*s.predicted_sigma2 == doctest::Approx(0.5 * s.levels[1].sigma2_hat));
}

TEST_CASE("de-Poissonization: degenerate functional and paired coupling") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::edge_count, 0, 1e-9});
  c.lambda = 0.01;
  c.n_schedule = {20.0};
  c.replications = 3000;
  c.delta.replications = 200;
  const CltSummary s = run_depoissonization(c, 1);
  CHECK(*s.sigma2_hat == 0.0);
  CHECK(*s.delta_bar == 0.0);
  CHECK(*s.tau2_hat == 0.0);
  CHECK(std::abs(*s.count_variance_over_n - 1.0) < 4.0 * std::sqrt(2.0 / 3000.0));

  // With N_n = n the two values coincide.
  ExperimentConfig b = base_config(FunctionalSpec{FunctionalKind::component_count, 0, 0.4});
  b.lambda = 1.0;
  b.n_schedule = {30.0};
  b.replications = 200;
  b.delta.replications = 50;
  const CltSummary p = run_depoissonization(b, 1);
  std::size_t equal_counts = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto& bin = p.records[i];
    const auto& poi = p.records[200 + i];
    REQUIRE(bin.process == "binomial");
    REQUIRE(poi.process == "poisson");
    if (poi.count == 30) {
      ++equal_counts;
      CHECK(poi.value == bin.value);
    }
  }
  CHECK(equal_counts > 0);
  ExperimentConfig bad = b;
  bad.n_schedule = {30.5};
  CHECK_THROWS_AS(run_depoissonization(bad, 1), InputError);
}

TEST_CASE("betti CLT rejects k >= d and reports the gate") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::betti, 2, 0.3});
  c.lambda = 1.0;
  c.n_schedule = {20.0};
  c.replications = 10;
  CHECK_THROWS_AS(run_betti_clt(c, 1), InputError);
  c.functional.k = 1;
  c.critical_radius = 0.6;
  const CltSummary s = run_betti_clt(c, 1);
  CHECK(*s.gate_limit == doctest::Approx(0.6));
  CHECK(*s.gate_passed);
  c.functional.r = 0.7;
  const CltSummary warned = run_betti_clt(c, 1);
  CHECK_FALSE(*warned.gate_passed);
  CHECK_FALSE(warned.warnings.empty());
}

TEST_CASE("block approximation edge cases") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::betti, 1, 0.3});
  c.lambda = 1.0;
  c.n_schedule = {64.0};
  c.block_volumes = {16.0, 64.0, 100.0};
  c.replications = 40;
  const BlockTable t = run_block_approximation(c, 1);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.warnings.size() == 1);
  CHECK(t.rows[1].L == 64.0);
  CHECK(t.rows[1].difference_variance == 0.0);
  CHECK(t.rows[0].blocks_per_axis == 2);

  // Nearly no interaction across block faces: the difference is tiny.
  ExperimentConfig tiny = c;
  tiny.functional = FunctionalSpec{FunctionalKind::edge_count, 0, 1e-4};
  tiny.block_volumes = {16.0};
  CHECK(run_block_approximation(tiny, 1).rows[0].difference_variance <= 1e-2);
}

TEST_CASE("coupling check with equal densities") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::edge_count, 0, 0.3});
  c.density = DensityGrid::constant(Box::cube(Point{0, 0}, 1.0), 1.0);
  c.second_density = c.density;
  c.coupling.trials = 100;
  const CouplingReport r = run_coupling_check(c, 1);
  CHECK(r.identity_frequency == 1.0);
  CHECK(r.expected_identity == 1.0);
  c.second_density.reset();
  CHECK_THROWS_AS(run_coupling_check(c, 1), InputError);
}

TEST_CASE("summaries do not depend on the worker count") {
  ExperimentConfig c = base_config(FunctionalSpec{FunctionalKind::betti, 1, 0.3});
  c.lambda = 1.0;
  c.n_schedule = {30.0, 60.0};
  c.replications = 30;
  const CltSummary one = run_homogeneous_clt(c, 1);
  const CltSummary four = run_homogeneous_clt(c, 4);
  CHECK(summary_to_json(one).dump() == summary_to_json(four).dump());
  REQUIRE(one.records.size() == four.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) CHECK(one.records[i].value == four.records[i].value);
}
