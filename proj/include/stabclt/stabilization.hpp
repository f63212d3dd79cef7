#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "stabclt/functionals.hpp"
#include "stabclt/point_process.hpp"
#include "stabclt/rng.hpp"

namespace stabclt {

/// Add-one cost at the origin on nested centred cubes cut from one
/// homogeneous sample.
struct StabilizationTrace {
  double lambda = 0.0;
  std::vector<double> half_widths;     // strictly increasing
  std::vector<double> window_volumes;  // (2 h)^d
  std::vector<double> d0_values;
  /// Half-width of the smallest window from which every later value equals
  /// the final one. Empty when the last two windows still disagree.
  std::optional<double> settle_radius;
  PointCloud sample{1};  // the master sample on the largest cube

  bool settled() const { return settle_radius.has_value(); }
};

/// Windows have half-widths max_halfwidth * i / steps, i = 1..steps.
StabilizationTrace trace_add_one_cost(const FunctionalSpec& spec, std::size_t dimension, double lambda,
                                      double max_halfwidth, std::size_t steps, RngStream& rng);

struct InjectionOutcome {
  double before = 0.0;
  double after = 0.0;
  PointCloud injected{1};

  bool unchanged() const { return before == after; }
};

/// Far-point injection probe of strong stabilization. Places `count` points
/// outside the closed ball of radius settle_radius, each within distance 2r
/// of a sample point that itself lies outside that ball (so they attach to
/// existing structure), and recomputes D_0 on the master sample plus the
/// injected points. Requires a settled trace.
InjectionOutcome inject_far_points(const FunctionalSpec& spec, const StabilizationTrace& trace, std::size_t count,
                                   RngStream& rng);

/// Empirical P(settle_radius > t) for each t; unsettled traces count as
/// exceeding every t.
std::vector<double> settle_tail(const std::vector<StabilizationTrace>& traces, const std::vector<double>& thresholds);

struct DeltaEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
  std::size_t replications = 0;
  double half_width = 0.0;
};

/// Monte Carlo mean and standard error of D_0(P(lambda) restricted to the cube
/// [-half_width, half_width)^d), the proxy for the limiting add-one cost.
/// Replication i draws from stream (seed, i).
DeltaEstimate estimate_limit_delta(const FunctionalSpec& spec, std::size_t dimension, double lambda,
                                   double half_width, std::size_t replications, std::uint64_t seed,
                                   unsigned threads);

struct MomentRow {
  double n = 0.0;
  std::size_t samples = 0;
  double pth_moment = 0.0;    // mean |D_y|^p
  double p_norm = 0.0;        // (mean |D_y|^p)^{1/p}
  double max_abs_cost = 0.0;
  double local_moment = 0.0;  // mean |H(window)|^p, the local moment diagnostic
  std::vector<double> abs_costs;  // |D_y| per sample, kept for re-evaluation at other p
};

struct MomentTable {
  double p = 0.0;
  std::vector<MomentRow> rows;
  double sup_pth_moment = 0.0;
};

/// For each n: samples the rescaled process n^{1/d} P(n f), draws y uniform in
/// the rescaled support and a cube W containing y (side uniform in
/// [window_side/2, window_side]), and records |D_y(process|W)|. Reported, not
/// asserted. Requires p > 2.
MomentTable moment_diagnostic(const FunctionalSpec& spec, const DensityGrid& f, const std::vector<double>& n_values,
                              double p, std::size_t samples_per_n, double window_side, std::uint64_t seed,
                              unsigned threads);

/// (mean |x|^p)^{1/p}.
double empirical_p_norm(const std::vector<double>& abs_values, double p);

}  // namespace stabclt
