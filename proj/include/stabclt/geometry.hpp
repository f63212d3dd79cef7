#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace stabclt {

/// Absolute tolerance used for every closed-ball comparison (tangency counts
/// as contact).
inline constexpr double kGeometryTolerance = 1e-12;

/// A point of R^d with finite coordinates.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);

  std::size_t dimension() const { return coords_.size(); }
  double operator[](std::size_t axis) const { return coords_[axis]; }
  std::span<const double> coords() const { return coords_; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<double> coords_;
};

/// Axis-aligned half-open box  min_corner + [0, side_0) x ... x [0, side_{d-1}).
class Box {
 public:
  Box(Point min_corner, std::vector<double> side_lengths);

  /// The cube  min_corner + [0, side)^d.
  static Box cube(Point min_corner, double side);
  /// The cube  [-half_width, half_width)^d  centred at the origin.
  static Box centered_cube(std::size_t dimension, double half_width);

  std::size_t dimension() const { return min_corner_.dimension(); }
  const Point& min_corner() const { return min_corner_; }
  const std::vector<double>& side_lengths() const { return sides_; }
  double lower(std::size_t axis) const { return min_corner_[axis]; }
  double upper(std::size_t axis) const { return min_corner_[axis] + sides_[axis]; }
  double volume() const;

  /// Half-open membership test.
  bool contains(std::span<const double> x) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  Point min_corner_;
  std::vector<double> sides_;
};

/// Closed ball.
struct Ball {
  Point center;
  double radius = 0.0;

  bool contains(std::span<const double> x, double tol = kGeometryTolerance) const;
};

double distance(std::span<const double> a, std::span<const double> b);
double distance(const Point& a, const Point& b);
double squared_distance(const double* a, const double* b, std::size_t dimension);

/// Smallest closed ball containing all points (move-to-front recursion with
/// support sets of at most d+1 points).
Ball min_enclosing_ball(const std::vector<Point>& points);

/// Radius of the smallest enclosing ball of points given as raw coordinate
/// pointers of a common dimension. Used by the complex builder on flat
/// storage.
double min_enclosing_radius(std::span<const double* const> points, std::size_t dimension);

/// True iff the closed radius-r balls around the points share a common point,
/// i.e. the minimal enclosing radius is at most r.
bool simplex_in_cech(const std::vector<Point>& points, double r);
bool simplex_in_cech(std::span<const double* const> points, std::size_t dimension, double r);

/// Pair form of the Cech test: distance <= 2r, with the same tolerance as the
/// enclosing-ball comparison.
inline bool pair_in_cech(double dist, double r) {
  return 0.5 * dist <= r + kGeometryTolerance;
}

}  // namespace stabclt
