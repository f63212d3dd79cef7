#pragma once

// Hand-rolled generators for property tests. Every generator takes the
// engine explicitly so each test case is reproducible from its seed.

#include <cmath>
#include <random>
#include <vector>

#include "stabclt/point_process.hpp"

namespace gen {

using Engine = std::mt19937_64;

inline double uniform(Engine& e, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(e); }

inline std::size_t index(Engine& e, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(e);
}

inline std::vector<double> point(Engine& e, std::size_t d, double lo = 0.0, double hi = 1.0) {
  std::vector<double> x(d);
  for (auto& v : x) v = uniform(e, lo, hi);
  return x;
}

inline std::vector<std::vector<double>> points(Engine& e, std::size_t count, std::size_t d, double lo = 0.0,
                                               double hi = 1.0) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(point(e, d, lo, hi));
  return out;
}

inline stabclt::PointCloud cloud(const std::vector<std::vector<double>>& pts, std::size_t d) {
  stabclt::PointCloud c(d);
  for (const auto& p : pts) c.push_back(p);
  return c;
}

inline stabclt::PointCloud cloud(Engine& e, std::size_t count, std::size_t d, double lo = 0.0, double hi = 1.0) {
  return cloud(points(e, count, d, lo, hi), d);
}

// Haar-ish random orthogonal matrix by Gram-Schmidt on Gaussian columns,
// with a random reflection half the time.
inline std::vector<std::vector<double>> orthogonal(Engine& e, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> q(d, std::vector<double>(d));
  for (std::size_t c = 0; c < d; ++c) {
    for (;;) {
      std::vector<double> v(d);
      for (auto& x : v) x = n(e);
      for (std::size_t p = 0; p < c; ++p) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += v[i] * q[p][i];
        for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q[p][i];
      }
      double len = 0.0;
      for (double x : v) len += x * x;
      len = std::sqrt(len);
      if (len < 1e-6) continue;
      for (std::size_t i = 0; i < d; ++i) q[c][i] = v[i] / len;
      break;
    }
  }
  if (uniform(e, 0.0, 1.0) < 0.5) {
    for (auto& x : q[0]) x = -x;
  }
  return q;
}

inline std::vector<double> rigid_motion(const std::vector<std::vector<double>>& q, const std::vector<double>& shift,
                                        const std::vector<double>& x) {
  std::vector<double> y(shift);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += q[i][j] * x[j];
  }
  return y;
}

}  // namespace gen
