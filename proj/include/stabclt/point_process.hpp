#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "stabclt/geometry.hpp"
#include "stabclt/rng.hpp"

namespace stabclt {

/// Finite set of points in R^d stored contiguously (point i occupies
/// coordinates [i*d, (i+1)*d)).
class PointCloud {
 public:
  explicit PointCloud(std::size_t dimension);
  PointCloud(std::size_t dimension, std::vector<double> flat_coords);

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return coords_.size() / dim_; }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  const double* data(std::size_t i) const { return coords_.data() + i * dim_; }
  const std::vector<double>& flat() const { return coords_; }
  Point point(std::size_t i) const { return Point((*this)[i]); }

  void reserve(std::size_t count) { coords_.reserve(count * dim_); }
  void push_back(std::span<const double> x);
  void push_back(const Point& x) { push_back(x.coords()); }
  /// First `count` points (or all when count exceeds size()).
  PointCloud prefix(std::size_t count) const;

  PointCloud restricted_to(const Box& window) const;
  PointCloud translated(std::span<const double> shift) const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

/// Multiply every coordinate by `factor` (> 0).
PointCloud scale_cloud(const PointCloud& cloud, double factor);

/// Piecewise-constant nonnegative density on a regular grid over a box.
/// Cell values are stored row-major: axis 0 varies slowest, the last axis
/// fastest.
class DensityGrid {
 public:
  DensityGrid(Box support, std::vector<std::size_t> cells_per_axis, std::vector<double> values);

  /// Constant density `value` on a single-cell grid.
  static DensityGrid constant(Box support, double value);

  const Box& support() const { return support_; }
  const std::vector<std::size_t>& cells_per_axis() const { return cells_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t dimension() const { return support_.dimension(); }
  std::size_t cell_count() const { return values_.size(); }
  double cell_volume() const { return cell_volume_; }
  /// Integral of the density over its support.
  double total_mass() const { return total_mass_; }
  /// Lambda = sup f.
  double sup() const { return sup_; }

  Box cell_box(std::size_t cell) const;
  /// Value at x; zero outside the support.
  double value_at(std::span<const double> x) const;

  bool same_grid(const DensityGrid& other) const;
  /// Same grid, every value multiplied by factor.
  DensityGrid scaled(double factor) const;
  /// Integral of |f - g| over the common support.
  double l1_distance(const DensityGrid& other) const;

  friend bool operator==(const DensityGrid&, const DensityGrid&) = default;

 private:
  Box support_;
  std::vector<std::size_t> cells_;
  std::vector<double> values_;
  std::vector<double> cell_sides_;
  std::vector<double> cumulative_;  // running cell masses, for exact sampling
  double cell_volume_ = 0.0;
  double total_mass_ = 0.0;
  double sup_ = 0.0;

  friend PointCloud sample_binomial(const DensityGrid&, std::size_t, RngStream&);
};

/// n i.i.d. points from f / total_mass: pick a cell by mass, then uniform in it.
PointCloud sample_binomial(const DensityGrid& f, std::size_t n, RngStream& rng);

/// N ~ Poisson(n) followed by N i.i.d. points from f / total_mass, i.e. a
/// Poisson process with intensity n f / total_mass.
PointCloud sample_poissonized(const DensityGrid& f, double n, RngStream& rng);

/// Homogeneous Poisson process of density lambda restricted to the box.
PointCloud sample_homogeneous(double lambda, const Box& box, RngStream& rng);

/// Poisson process whose intensity is the grid itself (already multiplied by
/// n where that applies): independent Poisson(value * cell_volume) counts per
/// cell, uniform inside each cell.
PointCloud sample_inhomogeneous(const DensityGrid& intensity, RngStream& rng);

struct CoupledPair {
  PointCloud first;
  PointCloud second;
  /// Generating points under one graph but not the other. The clouds are
  /// identical exactly when this is zero.
  std::size_t band_points = 0;

  bool identical() const { return band_points == 0; }
};

/// Both processes read off a single unit-rate Poisson process on
/// support x [0, inf): P(f) keeps points with height <= f(x), P(g) those with
/// height <= g(x). Requires identical grids.
CoupledPair sample_coupled_pair(const DensityGrid& f, const DensityGrid& g, RngStream& rng);

// Serialization. Densities use {"support": {"min": [...], "sides": [...]},
// "cells_per_axis": [...], "values": [...]}.
nlohmann::json density_to_json(const DensityGrid& f);
DensityGrid density_from_json(const nlohmann::json& j);
nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& j);

/// CSV with header x0,...,x{d-1}; one point per row.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_csv(std::istream& in);

}  // namespace stabclt
