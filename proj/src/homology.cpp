#include "stabclt/homology.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "stabclt/error.hpp"
#include "stabclt/union_find.hpp"

namespace stabclt {

BoundaryMatrix boundary_matrix(const SimplicialComplex& complex, std::size_t k) {
  if (k < 1 || k > complex.dimension_cap()) {
    throw InputError("boundary_matrix: dimension " + std::to_string(k) + " outside [1, cap]");
  }
  const SimplexList& faces = complex.simplices(k - 1);
  const SimplexList& cells = complex.simplices(k);
  BoundaryMatrix m;
  m.dimension = k;
  m.rows = faces.size();
  m.columns.resize(cells.size());
  std::vector<VertexId> face;
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const auto s = cells[j];
    auto& col = m.columns[j];
    col.reserve(s.size());
    for (std::size_t drop = 0; drop < s.size(); ++drop) {
      face.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i != drop) face.push_back(s[i]);
      }
      const auto row = faces.find(face);
      if (!row) throw InputError("boundary_matrix: complex is not downward closed");
      col.push_back(static_cast<std::uint32_t>(*row));
    }
    std::ranges::sort(col);
  }
  return m;
}

std::size_t rank_mod2(BoundaryMatrix matrix) {
  constexpr std::int64_t kNone = -1;
  std::vector<std::int64_t> pivot_column(matrix.rows, kNone);
  std::vector<std::uint32_t> merged;
  std::size_t rank = 0;
  for (std::size_t j = 0; j < matrix.columns.size(); ++j) {
    auto& col = matrix.columns[j];
    while (!col.empty() && pivot_column[col.back()] != kNone) {
      const auto& other = matrix.columns[static_cast<std::size_t>(pivot_column[col.back()])];
      merged.clear();
      std::ranges::set_symmetric_difference(col, other, std::back_inserter(merged));
      col.swap(merged);
    }
    if (!col.empty()) {
      pivot_column[col.back()] = static_cast<std::int64_t>(j);
      ++rank;
    }
  }
  return rank;
}

BettiVector betti_numbers(const SimplicialComplex& complex, std::size_t k_cap) {
  const std::size_t cap = complex.dimension_cap();
  const bool ok = k_cap < cap || (k_cap == cap && complex.is_full());
  if (!ok) {
    throw InputError("betti_numbers: k_cap " + std::to_string(k_cap) + " needs simplices of dimension " +
                     std::to_string(k_cap + 1) + " but the complex stops at " + std::to_string(cap));
  }
  // rank[k] = rank of d_k; d_0 and maps above the cap are zero.
  std::vector<std::size_t> rank(k_cap + 2, 0);
  for (std::size_t k = 1; k <= k_cap + 1 && k <= cap; ++k) {
    if (complex.count(k) == 0) break;
    rank[k] = rank_mod2(boundary_matrix(complex, k));
  }
  BettiVector betti;
  betti.values.resize(k_cap + 1);
  for (std::size_t k = 0; k <= k_cap; ++k) {
    betti.values[k] = static_cast<std::int64_t>(complex.count(k)) - static_cast<std::int64_t>(rank[k]) -
                      static_cast<std::int64_t>(rank[k + 1]);
  }
  return betti;
}

std::size_t betti0_unionfind(const SimplicialComplex& complex) {
  UnionFind uf(complex.vertex_count());
  if (complex.dimension_cap() >= 1) {
    const SimplexList& edges = complex.simplices(1);
    for (std::size_t i = 0; i < edges.size(); ++i) uf.unite(edges[i][0], edges[i][1]);
  }
  return uf.components();
}

}  // namespace stabclt
