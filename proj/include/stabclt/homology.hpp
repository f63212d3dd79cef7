#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stabclt/cech.hpp"

namespace stabclt {

/// Betti numbers beta_0 ... beta_{k_cap} over the two-element field.
struct BettiVector {
  std::vector<std::int64_t> values;

  std::int64_t operator[](std::size_t k) const { return k < values.size() ? values[k] : 0; }
  std::size_t size() const { return values.size(); }
  friend bool operator==(const BettiVector&, const BettiVector&) = default;
};

/// Boundary map d_k : C_k -> C_{k-1} over GF(2). Column j lists, in
/// increasing order, the row indices of the (k-1)-faces of k-simplex j.
struct BoundaryMatrix {
  std::size_t dimension = 0;
  std::size_t rows = 0;
  std::vector<std::vector<std::uint32_t>> columns;
};

/// Requires 1 <= k <= dimension_cap.
BoundaryMatrix boundary_matrix(const SimplicialComplex& complex, std::size_t k);

/// Rank over GF(2) by left-to-right column reduction with lowest-entry
/// pivots; columns are sorted index lists added by symmetric difference.
std::size_t rank_mod2(BoundaryMatrix matrix);

/// beta_k = #k-simplices - rank d_k - rank d_{k+1}, with rank d_0 = 0.
/// Valid for k_cap < dimension_cap, or k_cap <= dimension_cap on a full
/// complex; anything larger is an InputError.
BettiVector betti_numbers(const SimplicialComplex& complex, std::size_t k_cap);

/// Connected components of the 1-skeleton, by disjoint-set union.
std::size_t betti0_unionfind(const SimplicialComplex& complex);

}  // namespace stabclt
