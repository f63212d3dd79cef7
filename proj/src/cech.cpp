#include "stabclt/cech.hpp"

#include <algorithm>
#include <cmath>

#include "stabclt/error.hpp"

namespace stabclt {

void SimplexList::push_back(std::span<const VertexId> simplex) {
  if (simplex.size() != width_) throw InputError("simplex has the wrong number of vertices for this list");
  flat_.insert(flat_.end(), simplex.begin(), simplex.end());
}

std::optional<std::size_t> SimplexList::find(std::span<const VertexId> simplex) const {
  if (simplex.size() != width_) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto probe = (*this)[mid];
    if (std::lexicographical_compare(probe.begin(), probe.end(), simplex.begin(), simplex.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size() && std::ranges::equal((*this)[lo], simplex)) return lo;
  return std::nullopt;
}

SimplicialComplex::SimplicialComplex(std::size_t vertex_count, std::size_t dimension_cap)
    : vertex_count_(vertex_count) {
  levels_.reserve(dimension_cap + 1);
  for (std::size_t k = 0; k <= dimension_cap; ++k) levels_.emplace_back(k);
}

bool SimplicialComplex::contains(std::span<const VertexId> simplex) const {
  if (simplex.empty() || simplex.size() > levels_.size()) return false;
  return levels_[simplex.size() - 1].contains(simplex);
}

bool SimplicialComplex::is_downward_closed() const {
  std::vector<VertexId> face;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    const SimplexList& list = levels_[k];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto s = list[i];
      if (s.back() >= vertex_count_) return false;
      for (std::size_t j = 1; j < s.size(); ++j) {
        if (s[j - 1] >= s[j]) return false;
      }
      if (i > 0 && !std::ranges::lexicographical_compare(list[i - 1], s)) return false;
      if (k == 0) continue;
      for (std::size_t drop = 0; drop < s.size(); ++drop) {
        face.clear();
        for (std::size_t j = 0; j < s.size(); ++j) {
          if (j != drop) face.push_back(s[j]);
        }
        if (!levels_[k - 1].contains(face)) return false;
      }
    }
  }
  return true;
}

namespace {

// Hash grid stored as point ids sorted by integer cell tuple.
class CellGrid {
 public:
  CellGrid(const PointCloud& cloud, double side) : dim_(cloud.dimension()), cells_(cloud.size() * dim_) {
    std::vector<double> lo(dim_, 0.0);
    for (std::size_t a = 0; a < dim_; ++a) {
      lo[a] = cloud.empty() ? 0.0 : cloud[0][a];
      for (std::size_t i = 1; i < cloud.size(); ++i) lo[a] = std::min(lo[a], cloud[i][a]);
    }
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      for (std::size_t a = 0; a < dim_; ++a) {
        cells_[i * dim_ + a] = static_cast<std::int64_t>(std::floor((cloud[i][a] - lo[a]) / side));
      }
    }
    order_.resize(cloud.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<VertexId>(i);
    std::ranges::stable_sort(order_, [this](VertexId a, VertexId b) {
      return std::ranges::lexicographical_compare(cell(a), cell(b));
    });
  }

  std::span<const std::int64_t> cell(VertexId i) const { return {cells_.data() + i * dim_, dim_}; }

  // Ids in the given cell tuple.
  std::span<const VertexId> members(std::span<const std::int64_t> key) const {
    auto less = [this](VertexId id, std::span<const std::int64_t> k) {
      return std::ranges::lexicographical_compare(cell(id), k);
    };
    auto greater = [this](std::span<const std::int64_t> k, VertexId id) {
      return std::ranges::lexicographical_compare(k, cell(id));
    };
    auto first = std::lower_bound(order_.begin(), order_.end(), key, less);
    auto last = std::upper_bound(first, order_.end(), key, greater);
    return {order_.data() + (first - order_.begin()), static_cast<std::size_t>(last - first)};
  }

 private:
  std::size_t dim_;
  std::vector<std::int64_t> cells_;
  std::vector<VertexId> order_;
};

}  // namespace

std::vector<Edge> neighbor_pairs(const PointCloud& cloud, double r) {
  if (!(r > 0.0)) throw InputError("neighbor_pairs: radius must be positive");
  std::vector<Edge> edges;
  if (cloud.size() < 2) return edges;
  const std::size_t d = cloud.dimension();
  const double reach = 2.0 * (r + kGeometryTolerance);
  const CellGrid grid(cloud, reach);

  std::size_t offsets = 1;
  for (std::size_t a = 0; a < d; ++a) offsets *= 3;
  std::vector<std::int64_t> key(d);
  for (VertexId i = 0; i < cloud.size(); ++i) {
    const auto home = grid.cell(i);
    for (std::size_t code = 0; code < offsets; ++code) {
      std::size_t rest = code;
      for (std::size_t a = 0; a < d; ++a) {
        key[a] = home[a] + static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
      for (VertexId j : grid.members(key)) {
        if (j <= i) continue;
        if (pair_in_cech(std::sqrt(squared_distance(cloud.data(i), cloud.data(j), d)), r)) edges.emplace_back(i, j);
      }
    }
  }
  std::ranges::sort(edges);
  return edges;
}

SimplicialComplex build_cech(const PointCloud& cloud, double r, std::size_t k_max) {
  if (!(r > 0.0)) throw InputError("build_cech: radius must be positive");
  if (k_max < 1) throw InputError("build_cech: k_max must be >= 1");
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dimension();
  SimplicialComplex complex(n, k_max);

  for (VertexId v = 0; v < n; ++v) complex.simplices(0).push_back(std::span<const VertexId>(&v, 1));

  const std::vector<Edge> edges = neighbor_pairs(cloud, r);
  std::vector<std::vector<VertexId>> adjacency(n);
  for (const auto& [a, b] : edges) {
    const VertexId pair[2] = {a, b};
    complex.simplices(1).push_back(pair);
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  for (auto& list : adjacency) std::ranges::sort(list);

  std::vector<VertexId> candidate;
  std::vector<VertexId> facet;
  std::vector<const double*> coords;
  for (std::size_t k = 1; k < k_max; ++k) {
    const SimplexList& lower = complex.simplices(k);
    SimplexList& upper = complex.simplices(k + 1);
    if (lower.empty()) break;
    const bool needs_ball_test = k + 2 <= d + 1;
    for (std::size_t s = 0; s < lower.size(); ++s) {
      const auto sigma = lower[s];
      const auto& first_adj = adjacency[sigma[0]];
      auto start = std::upper_bound(first_adj.begin(), first_adj.end(), sigma.back());
      for (auto it = start; it != first_adj.end(); ++it) {
        const VertexId v = *it;
        bool clique = true;
        for (std::size_t j = 1; j < sigma.size() && clique; ++j) {
          clique = std::ranges::binary_search(adjacency[sigma[j]], v);
        }
        if (!clique) continue;
        candidate.assign(sigma.begin(), sigma.end());
        candidate.push_back(v);
        if (k >= 2) {
          bool facets_present = true;
          for (std::size_t drop = 0; drop + 1 < candidate.size() && facets_present; ++drop) {
            facet.clear();
            for (std::size_t j = 0; j < candidate.size(); ++j) {
              if (j != drop) facet.push_back(candidate[j]);
            }
            facets_present = lower.contains(facet);
          }
          if (!facets_present) continue;
        }
        if (needs_ball_test) {
          coords.clear();
          for (VertexId id : candidate) coords.push_back(cloud.data(id));
          if (!simplex_in_cech(coords, d, r)) continue;
        }
        upper.push_back(candidate);
      }
    }
  }
  return complex;
}

std::int64_t euler_characteristic(const SimplicialComplex& complex) {
  std::int64_t chi = 0;
  for (std::size_t k = 0; k <= complex.dimension_cap(); ++k) {
    const auto c = static_cast<std::int64_t>(complex.count(k));
    chi += (k % 2 == 0) ? c : -c;
  }
  return chi;
}

nlohmann::json complex_to_json(const SimplicialComplex& complex) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t k = 0; k <= complex.dimension_cap(); ++k) {
    nlohmann::json list = nlohmann::json::array();
    const SimplexList& simplices = complex.simplices(k);
    for (std::size_t i = 0; i < simplices.size(); ++i) {
      const auto s = simplices[i];
      list.push_back(std::vector<VertexId>(s.begin(), s.end()));
    }
    levels.push_back(std::move(list));
  }
  return {{"vertex_count", complex.vertex_count()}, {"dimension_cap", complex.dimension_cap()}, {"simplices", levels}};
}

}  // namespace stabclt
