#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

#include "stabclt/geometry.hpp"
#include "stabclt/point_process.hpp"

namespace stabclt {

enum class FunctionalKind { betti, component_count, edge_count };

/// A translation-invariant functional H on finite point sets, parameterised
/// by the connection radius r (balls of radius r; points connect at 2r).
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::betti;
  std::size_t k = 0;  // homology degree, betti only
  double r = 1.0;

  /// Throws InputError unless r > 0 and, for betti, k <= dimension - 1.
  void validate(std::size_t dimension) const;
  std::string name() const;

  friend bool operator==(const FunctionalSpec&, const FunctionalSpec&) = default;
};

nlohmann::json functional_to_json(const FunctionalSpec& spec);
FunctionalSpec functional_from_json(const nlohmann::json& j);

/// H(cloud). betti: beta_k of the Cech complex built to dimension k+1;
/// component_count: components of the radius-2r graph; edge_count: pairs at
/// distance <= 2r.
double evaluate(const FunctionalSpec& spec, const PointCloud& cloud);

struct AddOneCostRecord {
  Point location;
  Box window;
  double value = 0.0;
};

/// D_x(cloud|window) = H(cloud|window + {x}) - H(cloud|window). The cloud is
/// restricted to the window before both evaluations.
AddOneCostRecord add_one_cost(const FunctionalSpec& spec, const PointCloud& cloud, const Point& x, const Box& window);

/// Same difference without a window (x appended to the whole cloud).
double add_one_cost_unrestricted(const FunctionalSpec& spec, const PointCloud& cloud, std::span<const double> x);

/// True iff H(cloud) == H(shift + cloud) exactly.
bool translation_invariance_check(const FunctionalSpec& spec, const PointCloud& cloud, const Point& shift);

}  // namespace stabclt
