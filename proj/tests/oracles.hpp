#pragma once

// Straightforward reference implementations used only by the tests. None of
// them calls into the library: they take plain coordinates and recompute
// everything from definitions, trading speed for obviousness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using Coords = std::vector<double>;
using Simplex = std::vector<std::uint32_t>;

inline double dist(const Coords& a, const Coords& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Solves A x = b by Gaussian elimination; false when (near) singular.
inline bool solve(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[best][c])) best = r;
    }
    if (std::abs(a[best][c]) < 1e-10) return false;
    std::swap(a[c], a[best]);
    std::swap(b[c], b[best]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

struct Sphere {
  Coords center;
  double radius = 0.0;
};

// Circumsphere of the subset within its affine hull.
inline bool circumsphere(const std::vector<Coords>& pts, Sphere& out) {
  const Coords& p0 = pts[0];
  const std::size_t k = pts.size() - 1;
  std::vector<std::vector<double>> g(k, std::vector<double>(k));
  std::vector<double> rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t a = 0; a < p0.size(); ++a) dot += (pts[i + 1][a] - p0[a]) * (pts[j + 1][a] - p0[a]);
      g[i][j] = 2.0 * dot;
    }
    double sq = 0.0;
    for (std::size_t a = 0; a < p0.size(); ++a) sq += (pts[i + 1][a] - p0[a]) * (pts[i + 1][a] - p0[a]);
    rhs[i] = sq;
  }
  std::vector<double> lam;
  if (k > 0 && !solve(g, rhs, lam)) return false;
  out.center = p0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t a = 0; a < p0.size(); ++a) out.center[a] += lam[i] * (pts[i + 1][a] - p0[a]);
  }
  out.radius = dist(out.center, p0);
  return true;
}

// Smallest enclosing ball by trying the circumsphere of every subset of at
// most d+1 points and keeping the smallest that covers everything.
inline Sphere min_ball(const std::vector<Coords>& pts) {
  const std::size_t n = pts.size();
  const std::size_t d = pts[0].size();
  Sphere best{pts[0], INFINITY};
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > d + 1) continue;
    std::vector<Coords> sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) sub.push_back(pts[i]);
    }
    Sphere s;
    if (!circumsphere(sub, s) || s.radius >= best.radius) continue;
    bool covers = true;
    for (const auto& p : pts) covers = covers && dist(p, s.center) <= s.radius + 1e-9;
    if (covers) best = s;
  }
  return best;
}

// min over x of max_i |x - p_i|, by repeatedly refined grid search. The
// objective is convex, so shrinking the box around the best node converges.
inline double grid_min_max_distance(const std::vector<Coords>& pts) {
  const std::size_t d = pts[0].size();
  Coords lo = pts[0];
  Coords hi = pts[0];
  for (const auto& p : pts) {
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  Coords best(d);
  for (std::size_t a = 0; a < d; ++a) best[a] = 0.5 * (lo[a] + hi[a]);
  double half = 0.0;
  for (std::size_t a = 0; a < d; ++a) half = std::max(half, 0.5 * (hi[a] - lo[a]));
  half = std::max(half, 1e-6);
  const int steps = 16;
  auto objective = [&](const Coords& x) {
    double m = 0.0;
    for (const auto& p : pts) m = std::max(m, dist(x, p));
    return m;
  };
  double best_value = objective(best);
  for (int round = 0; round < 60; ++round) {
    const Coords centre = best;
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= steps + 1;
    for (std::size_t code = 0; code < total; ++code) {
      Coords x(d);
      std::size_t rest = code;
      for (std::size_t a = 0; a < d; ++a) {
        const double t = static_cast<double>(rest % (steps + 1)) / steps;
        rest /= steps + 1;
        x[a] = centre[a] - half + 2.0 * half * t;
      }
      const double v = objective(x);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    }
    half *= 0.5;
  }
  return best_value;
}

// Cech complex by testing every vertex subset of size <= k_max + 1.
inline std::vector<std::vector<Simplex>> cech(const std::vector<Coords>& pts, double r, std::size_t k_max) {
  std::vector<std::vector<Simplex>> out(k_max + 1);
  const std::size_t n = pts.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
    if (size > k_max + 1) continue;
    Simplex s;
    std::vector<Coords> sub;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) {
        s.push_back(i);
        sub.push_back(pts[i]);
      }
    }
    if (min_ball(sub).radius <= r + 1e-12) out[size - 1].push_back(s);
  }
  for (auto& level : out) std::sort(level.begin(), level.end());
  return out;
}

// Rank over GF(2) of a dense 0/1 matrix by plain Gaussian elimination.
inline std::size_t dense_rank_mod2(std::vector<std::vector<std::uint8_t>> m) {
  std::size_t rank = 0;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && !m[pivot][c]) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r != rank && m[r][c]) {
        for (std::size_t k = c; k < cols; ++k) m[r][k] ^= m[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

// Betti numbers of a downward-closed complex given as per-dimension lists.
inline std::vector<std::int64_t> betti(const std::vector<std::vector<Simplex>>& levels, std::size_t k_cap) {
  std::vector<std::size_t> ranks(levels.size() + 1, 0);
  for (std::size_t k = 1; k < levels.size(); ++k) {
    std::map<Simplex, std::size_t> index;
    for (std::size_t i = 0; i < levels[k - 1].size(); ++i) index[levels[k - 1][i]] = i;
    std::vector<std::vector<std::uint8_t>> m(levels[k - 1].size(), std::vector<std::uint8_t>(levels[k].size(), 0));
    for (std::size_t j = 0; j < levels[k].size(); ++j) {
      for (std::size_t drop = 0; drop < levels[k][j].size(); ++drop) {
        Simplex face = levels[k][j];
        face.erase(face.begin() + static_cast<std::ptrdiff_t>(drop));
        m[index.at(face)][j] = 1;
      }
    }
    ranks[k] = dense_rank_mod2(m);
  }
  std::vector<std::int64_t> out;
  for (std::size_t k = 0; k <= k_cap; ++k) {
    const auto s = static_cast<std::int64_t>(k < levels.size() ? levels[k].size() : 0);
    out.push_back(s - static_cast<std::int64_t>(ranks[k]) - static_cast<std::int64_t>(ranks[k + 1]));
  }
  return out;
}

// Connected components of the graph joining points at distance <= 2r, by
// depth-first search over all pairs.
inline std::size_t components(const std::vector<Coords>& pts, double r) {
  std::vector<bool> seen(pts.size(), false);
  std::size_t count = 0;
  for (std::size_t s = 0; s < pts.size(); ++s) {
    if (seen[s]) continue;
    ++count;
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < pts.size(); ++w) {
        if (!seen[w] && dist(pts[v], pts[w]) <= 2.0 * r) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return count;
}

// D_0 of the component count on a homogeneous Poisson sample of the cube
// [-h, h)^d, with its own random source.
inline double component_d0(std::mt19937_64& gen, double lambda, double h, std::size_t d, double r) {
  std::poisson_distribution<long> count(lambda * std::pow(2.0 * h, static_cast<double>(d)));
  std::uniform_real_distribution<double> u(-h, h);
  std::vector<Coords> pts(static_cast<std::size_t>(count(gen)), Coords(d));
  for (auto& p : pts) {
    for (auto& x : p) x = u(gen);
  }
  const double without = static_cast<double>(components(pts, r));
  pts.push_back(Coords(d, 0.0));
  return static_cast<double>(components(pts, r)) - without;
}

// E[#pairs at distance <= 2r] for a rate-lambda Poisson process on [0, n):
// lambda^2 / 2 * |{(x, y) : |x - y| <= 2r}| = lambda^2 (2 r n - 2 r^2).
inline double expected_edges_interval(double lambda, double r, double n) {
  const double s = 2.0 * r;
  return lambda * lambda * (s * n - 0.5 * s * s);
}

}  // namespace oracle
