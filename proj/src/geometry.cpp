#include "stabclt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stabclt/error.hpp"

namespace stabclt {

namespace {

void require_finite(std::span<const double> coords) {
  if (coords.empty()) throw InputError("point must have dimension >= 1");
  for (double c : coords) {
    if (!std::isfinite(c)) throw InputError("point coordinates must be finite");
  }
}

struct RawBall {
  std::vector<double> center;
  double radius = -1.0;  // negative: the empty ball
  bool valid = true;
};

bool raw_contains(const RawBall& ball, const double* p, std::size_t dim) {
  if (ball.radius < 0.0) return false;
  return std::sqrt(squared_distance(ball.center.data(), p, dim)) <= ball.radius + kGeometryTolerance;
}

// Ball whose boundary passes through every support point, centred in their
// affine hull. Marked invalid when the support is affinely dependent.
RawBall circumball(const std::vector<const double*>& support, std::size_t dim) {
  RawBall ball;
  if (support.empty()) return ball;
  const double* origin = support.front();
  ball.center.assign(origin, origin + dim);
  ball.radius = 0.0;
  const std::size_t m = support.size() - 1;
  if (m == 0) return ball;

  std::vector<std::vector<double>> q(m, std::vector<double>(dim));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t a = 0; a < dim; ++a) q[j][a] = support[j + 1][a] - origin[a];
  }
  // Augmented Gram system  2 <q_j, q_k> lambda_k = |q_j|^2.
  std::vector<std::vector<double>> g(m, std::vector<double>(m + 1));
  double scale = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      double dot = 0.0;
      for (std::size_t a = 0; a < dim; ++a) dot += q[j][a] * q[k][a];
      g[j][k] = 2.0 * dot;
    }
    g[j][m] = 0.5 * g[j][j];
    scale = std::max(scale, std::abs(g[j][j]));
  }
  const double pivot_floor = 1e-12 * std::max(scale, 1e-300);
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t best = col;
    for (std::size_t row = col + 1; row < m; ++row) {
      if (std::abs(g[row][col]) > std::abs(g[best][col])) best = row;
    }
    if (std::abs(g[best][col]) <= pivot_floor) {
      ball.valid = false;
      return ball;
    }
    std::swap(g[col], g[best]);
    for (std::size_t row = 0; row < m; ++row) {
      if (row == col) continue;
      const double factor = g[row][col] / g[col][col];
      if (factor == 0.0) continue;
      for (std::size_t k = col; k <= m; ++k) g[row][k] -= factor * g[col][k];
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double lambda = g[j][m] / g[j][j];
    for (std::size_t a = 0; a < dim; ++a) ball.center[a] += lambda * q[j][a];
  }
  ball.radius = std::sqrt(squared_distance(ball.center.data(), origin, dim));
  return ball;
}

// Affinely dependent supports only arise from exact ties; fall back to the
// smallest valid sub-support ball that still covers the whole support.
RawBall support_ball(const std::vector<const double*>& support, std::size_t dim) {
  RawBall ball = circumball(support, dim);
  if (ball.valid) return ball;
  RawBall best;
  best.radius = std::numeric_limits<double>::infinity();
  const std::size_t count = support.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << count); ++mask) {
    std::vector<const double*> subset;
    for (std::size_t i = 0; i < count; ++i) {
      if (mask & (std::size_t{1} << i)) subset.push_back(support[i]);
    }
    RawBall candidate = circumball(subset, dim);
    if (!candidate.valid || candidate.radius >= best.radius) continue;
    bool covers = true;
    for (const double* p : support) covers = covers && raw_contains(candidate, p, dim);
    if (covers) best = std::move(candidate);
  }
  return best;
}

RawBall move_to_front(std::vector<const double*>& order, std::size_t end,
                      std::vector<const double*>& support, std::size_t dim) {
  RawBall ball = support_ball(support, dim);
  if (support.size() == dim + 1) return ball;
  for (std::size_t i = 0; i < end; ++i) {
    const double* p = order[i];
    if (raw_contains(ball, p, dim)) continue;
    support.push_back(p);
    ball = move_to_front(order, i, support, dim);
    support.pop_back();
    std::rotate(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i),
                order.begin() + static_cast<std::ptrdiff_t>(i + 1));
  }
  return ball;
}

RawBall raw_min_ball(std::span<const double* const> points, std::size_t dim) {
  if (points.empty()) throw InputError("min_enclosing_ball: empty point set");
  std::vector<const double*> order(points.begin(), points.end());
  std::vector<const double*> support;
  support.reserve(dim + 1);
  return move_to_front(order, order.size(), support, dim);
}

}  // namespace

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) { require_finite(coords_); }

Point::Point(std::initializer_list<double> coords) : coords_(coords) { require_finite(coords_); }

Point::Point(std::span<const double> coords) : coords_(coords.begin(), coords.end()) {
  require_finite(coords_);
}

Box::Box(Point min_corner, std::vector<double> side_lengths)
    : min_corner_(std::move(min_corner)), sides_(std::move(side_lengths)) {
  if (sides_.size() != min_corner_.dimension()) {
    throw InputError("box: side length count does not match corner dimension");
  }
  for (double s : sides_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("box: side lengths must be positive and finite");
  }
}

Box Box::cube(Point min_corner, double side) {
  const std::size_t d = min_corner.dimension();
  return Box(std::move(min_corner), std::vector<double>(d, side));
}

Box Box::centered_cube(std::size_t dimension, double half_width) {
  return cube(Point(std::vector<double>(dimension, -half_width)), 2.0 * half_width);
}

double Box::volume() const {
  double v = 1.0;
  for (double s : sides_) v *= s;
  return v;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dimension()) throw InputError("box: dimension mismatch");
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (x[a] < lower(a) || x[a] >= upper(a)) return false;
  }
  return true;
}

bool Ball::contains(std::span<const double> x, double tol) const {
  return distance(center.coords(), x) <= radius + tol;
}

double squared_distance(const double* a, const double* b, std::size_t dimension) {
  double sum = 0.0;
  for (std::size_t i = 0; i < dimension; ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  return std::sqrt(squared_distance(a.data(), b.data(), a.size()));
}

double distance(const Point& a, const Point& b) { return distance(a.coords(), b.coords()); }

Ball min_enclosing_ball(const std::vector<Point>& points) {
  if (points.empty()) throw InputError("min_enclosing_ball: empty point set");
  const std::size_t dim = points.front().dimension();
  std::vector<const double*> raw;
  raw.reserve(points.size());
  for (const Point& p : points) {
    if (p.dimension() != dim) throw InputError("min_enclosing_ball: mixed dimensions");
    raw.push_back(p.coords().data());
  }
  RawBall ball = raw_min_ball(raw, dim);
  return Ball{Point(std::move(ball.center)), ball.radius};
}

double min_enclosing_radius(std::span<const double* const> points, std::size_t dimension) {
  return raw_min_ball(points, dimension).radius;
}

bool simplex_in_cech(const std::vector<Point>& points, double r) {
  return min_enclosing_ball(points).radius <= r + kGeometryTolerance;
}

bool simplex_in_cech(std::span<const double* const> points, std::size_t dimension, double r) {
  return min_enclosing_radius(points, dimension) <= r + kGeometryTolerance;
}

}  // namespace stabclt
