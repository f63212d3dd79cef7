#include "stabclt/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stabclt/error.hpp"
#include "stabclt/parallel.hpp"
#include "stabclt/rng.hpp"

namespace stabclt {

namespace {

struct TorusEdge {
  double length;
  std::uint32_t a;
  std::uint32_t b;
  std::vector<double> shift;  // minimal-image displacement from a to b
};

// Union-find that also stores each node's displacement from its root in the
// unwrapped cover, so a cycle closing with a nonzero lattice vector is a wrap.
class OffsetUnionFind {
 public:
  OffsetUnionFind(std::size_t count, std::size_t dim)
      : parent_(count), size_(count, 1), offset_(count * dim, 0.0), dim_(dim) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    if (parent_[x] == x) return x;
    const std::uint32_t p = parent_[x];
    const std::uint32_t root = find(p);
    for (std::size_t a = 0; a < dim_; ++a) offset_[x * dim_ + a] += offset_[p * dim_ + a];
    parent_[x] = root;
    return root;
  }

  // Returns the loop displacement along axis 0 when a and b are already
  // joined, or 0 after merging them.
  double unite(std::uint32_t a, std::uint32_t b, const std::vector<double>& shift) {
    const std::uint32_t ra = find(a);
    const std::uint32_t rb = find(b);
    if (ra == rb) return offset_[a * dim_] + shift[0] - offset_[b * dim_];
    // position(b) = position(a) + shift, positions measured from each root.
    std::vector<double> rel(dim_);
    for (std::size_t k = 0; k < dim_; ++k) rel[k] = offset_[a * dim_ + k] + shift[k] - offset_[b * dim_ + k];
    if (size_[ra] >= size_[rb]) {
      parent_[rb] = ra;
      size_[ra] += size_[rb];
      for (std::size_t k = 0; k < dim_; ++k) offset_[rb * dim_ + k] = rel[k];
    } else {
      parent_[ra] = rb;
      size_[rb] += size_[ra];
      for (std::size_t k = 0; k < dim_; ++k) offset_[ra * dim_ + k] = -rel[k];
    }
    return 0.0;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::size_t> size_;
  std::vector<double> offset_;
  std::size_t dim_;
};

void consider_pair(const PointCloud& cloud, double side, double reach_sq, std::uint32_t i, std::uint32_t j,
                   std::vector<TorusEdge>& edges) {
  const std::size_t d = cloud.dimension();
  std::vector<double> shift(d);
  double sq = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    double dx = cloud[j][a] - cloud[i][a];
    dx -= side * std::round(dx / side);
    shift[a] = dx;
    sq += dx * dx;
  }
  if (sq <= reach_sq) edges.push_back(TorusEdge{std::sqrt(sq), i, j, std::move(shift)});
}

std::vector<TorusEdge> torus_edges(const PointCloud& cloud, double side, double r_max) {
  const std::size_t d = cloud.dimension();
  const double reach = 2.0 * r_max;
  const double reach_sq = reach * reach * (1.0 + 1e-12);
  std::vector<TorusEdge> edges;
  const auto cells = static_cast<std::size_t>(std::floor(side / reach));
  const auto n = static_cast<std::uint32_t>(cloud.size());
  if (cells < 3) {
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) consider_pair(cloud, side, reach_sq, i, j, edges);
    }
    return edges;
  }
  const double cell_side = side / static_cast<double>(cells);
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) total *= cells;
  std::vector<std::vector<std::uint32_t>> buckets(total);
  std::vector<std::size_t> home(n);
  auto cell_coord = [&](double x) {
    auto c = static_cast<std::int64_t>(std::floor(x / cell_side));
    return static_cast<std::size_t>(std::clamp<std::int64_t>(c, 0, static_cast<std::int64_t>(cells) - 1));
  };
  for (std::uint32_t i = 0; i < n; ++i) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < d; ++a) idx = idx * cells + cell_coord(cloud[i][a]);
    home[i] = idx;
    buckets[idx].push_back(i);
  }
  std::vector<std::size_t> base(d);
  std::vector<int> step(d);
  std::size_t neighbours = 1;
  for (std::size_t a = 0; a < d; ++a) neighbours *= 3;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) base[a] = cell_coord(cloud[i][a]);
    for (std::size_t code = 0; code < neighbours; ++code) {
      std::size_t rest = code;
      std::size_t idx = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const auto delta = static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
        const auto c = (static_cast<std::int64_t>(base[a]) + delta + static_cast<std::int64_t>(cells)) %
                       static_cast<std::int64_t>(cells);
        idx = idx * cells + static_cast<std::size_t>(c);
      }
      for (std::uint32_t j : buckets[idx]) {
        if (j > i) consider_pair(cloud, side, reach_sq, i, j, edges);
      }
    }
  }
  return edges;
}

}  // namespace

double wrapping_radius(const PointCloud& cloud, double side, double r_max) {
  if (!(side > 0.0)) throw InputError("wrapping_radius: side must be positive");
  if (!(r_max > 0.0)) throw InputError("wrapping_radius: r_max must be positive");
  std::vector<TorusEdge> edges = torus_edges(cloud, side, r_max);
  std::ranges::sort(edges, [](const TorusEdge& x, const TorusEdge& y) {
    if (x.length != y.length) return x.length < y.length;
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  OffsetUnionFind uf(cloud.size(), cloud.dimension());
  for (const TorusEdge& e : edges) {
    if (std::abs(uf.unite(e.a, e.b, e.shift)) > 0.5 * side) return 0.5 * e.length;
  }
  return std::numeric_limits<double>::infinity();
}

bool spans_torus(const PointCloud& cloud, double side, double r) { return wrapping_radius(cloud, side, r) <= r; }

double crossing_point(const std::vector<double>& radii, const std::vector<double>& values, double level,
                      bool* bracketed) {
  if (radii.empty() || radii.size() != values.size()) throw InputError("crossing_point: grid/value size mismatch");
  if (bracketed) *bracketed = values.front() < level && values.back() >= level;
  if (values.front() >= level) return radii.front();
  if (values.back() < level) return radii.back();
  std::size_t lo = 0;
  std::size_t hi = radii.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (values[mid] < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = (level - values[lo]) / (values[hi] - values[lo]);
  return radii[lo] + t * (radii[hi] - radii[lo]);
}

PercolationEstimate estimate_percolation_radius(std::size_t dimension, const std::vector<double>& sides,
                                                const std::vector<double>& radius_grid, std::size_t replications,
                                                std::uint64_t seed, unsigned threads) {
  if (dimension < 1) throw InputError("percolation: dimension must be >= 1");
  if (sides.empty()) throw InputError("percolation: need at least one torus side");
  if (radius_grid.size() < 2) throw InputError("percolation: radius grid needs at least 2 points");
  if (!std::ranges::is_sorted(radius_grid) || radius_grid.front() <= 0.0) {
    throw InputError("percolation: radius grid must be positive and increasing");
  }
  if (replications < 2) throw InputError("percolation: need at least 2 replications");

  PercolationEstimate estimate;
  estimate.dimension = dimension;
  for (std::size_t s = 0; s < sides.size(); ++s) {
    const double side = sides[s];
    if (!(side > 0.0)) throw InputError("percolation: sides must be positive");
    const std::uint64_t side_seed = derive_seed(seed, "percolation", s);
    const Box torus = Box::cube(Point(std::vector<double>(dimension, 0.0)), side);
    SpanningCurve curve;
    curve.side = side;
    curve.radii = radius_grid;
    curve.critical_radii.assign(replications, 0.0);
    parallel_for(replications, threads, [&](std::size_t i) {
      RngStream rng(side_seed, i);
      curve.critical_radii[i] = wrapping_radius(sample_homogeneous(1.0, torus, rng), side, radius_grid.back());
    });
    const auto m = static_cast<double>(replications);
    for (double r : radius_grid) {
      const auto hits = std::ranges::count_if(curve.critical_radii, [r](double c) { return c <= r; });
      const double p = static_cast<double>(hits) / m;
      curve.fraction.push_back(p);
      curve.std_error.push_back(std::sqrt(p * (1.0 - p) / m));
    }
    curve.r_hat = crossing_point(curve.radii, curve.fraction, 0.5, &curve.bracketed);
    std::vector<double> upper(curve.fraction.size());
    std::vector<double> lower(curve.fraction.size());
    for (std::size_t g = 0; g < upper.size(); ++g) {
      upper[g] = curve.fraction[g] + 2.0 * curve.std_error[g];
      lower[g] = curve.fraction[g] - 2.0 * curve.std_error[g];
    }
    curve.band_low = crossing_point(curve.radii, upper, 0.5);
    curve.band_high = crossing_point(curve.radii, lower, 0.5);
    std::vector<double> sorted = curve.critical_radii;
    std::ranges::sort(sorted);
    const std::size_t mid = sorted.size() / 2;
    curve.median_critical = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    estimate.curves.push_back(std::move(curve));
  }
  const double a = estimate.curves.front().r_hat;
  const double b = estimate.curves.back().r_hat;
  estimate.relative_spread = std::abs(a - b) / (0.5 * (a + b));
  return estimate;
}

}  // namespace stabclt
