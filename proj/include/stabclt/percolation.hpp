#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stabclt/point_process.hpp"

namespace stabclt {

/// Smallest r at which the union of radius-r balls around the cloud, taken
/// on the flat torus [0, side)^d, contains a component that wraps around
/// axis 0. Returns +infinity when no wrap appears for r <= r_max.
double wrapping_radius(const PointCloud& cloud, double side, double r_max);

/// True iff a component of the radius-r union of balls wraps around axis 0.
bool spans_torus(const PointCloud& cloud, double side, double r);

struct SpanningCurve {
  double side = 0.0;
  std::vector<double> radii;
  std::vector<double> fraction;   // fraction of samples spanning at radii[i]
  std::vector<double> std_error;  // binomial standard error per grid point
  std::vector<double> critical_radii;  // per replication, in index order
  double r_hat = 0.0;       // 0.5 crossing of the spanning curve
  double band_low = 0.0;    // crossing of fraction + 2 SE
  double band_high = 0.0;   // crossing of fraction - 2 SE
  double median_critical = 0.0;
  bool bracketed = false;   // false when the grid never straddles 0.5
};

struct PercolationEstimate {
  std::size_t dimension = 0;
  std::vector<SpanningCurve> curves;  // one per side, in input order
  /// |r_hat(first) - r_hat(last)| / mean of the two.
  double relative_spread = 0.0;
};

/// Unit-intensity Poisson samples on tori of the given sides. Samples on
/// side index a use streams derive_seed(seed, "percolation", a), replication
/// i. Every grid point uses the same samples, so the curve is monotone.
PercolationEstimate estimate_percolation_radius(std::size_t dimension, const std::vector<double>& sides,
                                                const std::vector<double>& radius_grid, std::size_t replications,
                                                std::uint64_t seed, unsigned threads);

/// 0.5 crossing of a nondecreasing curve on the grid: bisection for the
/// bracketing interval, then linear interpolation inside it.
double crossing_point(const std::vector<double>& radii, const std::vector<double>& values, double level,
                      bool* bracketed = nullptr);

}  // namespace stabclt
