#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stabclt/point_process.hpp"

namespace stabclt {

using VertexId = std::uint32_t;

/// All simplices of one dimension as strictly increasing vertex tuples, kept
/// in lexicographic order so membership is a binary search.
class SimplexList {
 public:
  explicit SimplexList(std::size_t dimension) : width_(dimension + 1) {}

  std::size_t dimension() const { return width_ - 1; }
  std::size_t size() const { return flat_.size() / width_; }
  bool empty() const { return flat_.empty(); }
  std::span<const VertexId> operator[](std::size_t i) const { return {flat_.data() + i * width_, width_}; }

  /// Appends a simplex; callers must keep lexicographic order.
  void push_back(std::span<const VertexId> simplex);
  std::optional<std::size_t> find(std::span<const VertexId> simplex) const;
  bool contains(std::span<const VertexId> simplex) const { return find(simplex).has_value(); }

  friend bool operator==(const SimplexList&, const SimplexList&) = default;

 private:
  std::size_t width_;
  std::vector<VertexId> flat_;
};

/// Abstract simplicial complex truncated at `dimension_cap`.
class SimplicialComplex {
 public:
  SimplicialComplex(std::size_t vertex_count, std::size_t dimension_cap);

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t dimension_cap() const { return levels_.size() - 1; }
  /// Number of k-simplices (0 above the cap).
  std::size_t count(std::size_t k) const { return k < levels_.size() ? levels_[k].size() : 0; }
  const SimplexList& simplices(std::size_t k) const { return levels_.at(k); }
  SimplexList& simplices(std::size_t k) { return levels_.at(k); }

  bool contains(std::span<const VertexId> simplex) const;
  /// The cap admits every subset of the vertices, so nothing was truncated.
  bool is_full() const { return dimension_cap() + 1 >= vertex_count_; }
  /// Every face of every stored simplex is stored; tuples strictly increasing.
  bool is_downward_closed() const;

  friend bool operator==(const SimplicialComplex&, const SimplicialComplex&) = default;

 private:
  std::size_t vertex_count_;
  std::vector<SimplexList> levels_;
};

using Edge = std::pair<VertexId, VertexId>;

/// All pairs i < j whose closed radius-r balls meet (distance <= 2r, ties
/// included), found through a hash grid of cell side 2r. Sorted.
std::vector<Edge> neighbor_pairs(const PointCloud& cloud, double r);

/// Cech complex C(cloud, r) with simplices up to dimension k_max. Candidate
/// (k+1)-simplices extend a k-simplex by a common neighbour larger than its
/// last vertex, require all facets present, then pass the enclosing-ball
/// test (or Helly's theorem once the simplex has more than d+1 vertices).
SimplicialComplex build_cech(const PointCloud& cloud, double r, std::size_t k_max);

/// Sum over k of (-1)^k times the number of k-simplices.
std::int64_t euler_characteristic(const SimplicialComplex& complex);

nlohmann::json complex_to_json(const SimplicialComplex& complex);

}  // namespace stabclt
