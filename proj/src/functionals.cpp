#include "stabclt/functionals.hpp"
#include <cmath>

#include "stabclt/cech.hpp"
#include "stabclt/error.hpp"
#include "stabclt/homology.hpp"
#include "stabclt/union_find.hpp"

namespace stabclt {

void FunctionalSpec::validate(std::size_t dimension) const {
  if (!(r > 0.0) || !std::isfinite(r)) throw InputError("functional: radius r must be positive and finite");
  if (kind == FunctionalKind::betti && k + 1 > dimension) {
    throw InputError("functional: betti_" + std::to_string(k) + " vanishes identically in dimension " +
                     std::to_string(dimension) + " (need k <= d-1)");
  }
}

std::string FunctionalSpec::name() const {
  switch (kind) {
    case FunctionalKind::betti:
      return "betti_" + std::to_string(k);
    case FunctionalKind::component_count:
      return "component_count";
    case FunctionalKind::edge_count:
      return "edge_count";
  }
  return "unknown";
}

nlohmann::json functional_to_json(const FunctionalSpec& spec) {
  nlohmann::json j;
  switch (spec.kind) {
    case FunctionalKind::betti:
      j["kind"] = "betti";
      j["k"] = spec.k;
      break;
    case FunctionalKind::component_count:
      j["kind"] = "component_count";
      break;
    case FunctionalKind::edge_count:
      j["kind"] = "edge_count";
      break;
  }
  j["r"] = spec.r;
  return j;
}

FunctionalSpec functional_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("functional must be an object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw InputError("functional.kind must be a string");
  if (!j.contains("r") || !j.at("r").is_number()) throw InputError("functional.r must be a number");
  FunctionalSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "betti") {
    spec.kind = FunctionalKind::betti;
    if (!j.contains("k") || !j.at("k").is_number_unsigned()) {
      throw InputError("functional.k must be a nonnegative integer for kind \"betti\"");
    }
    spec.k = j.at("k").get<std::size_t>();
  } else if (kind == "component_count") {
    spec.kind = FunctionalKind::component_count;
  } else if (kind == "edge_count") {
    spec.kind = FunctionalKind::edge_count;
  } else {
    throw InputError("functional.kind \"" + kind + "\" is not one of betti, component_count, edge_count");
  }
  spec.r = j.at("r").get<double>();
  if (!(spec.r > 0.0)) throw InputError("functional.r must be positive");
  return spec;
}

double evaluate(const FunctionalSpec& spec, const PointCloud& cloud) {
  spec.validate(cloud.dimension());
  switch (spec.kind) {
    case FunctionalKind::betti: {
      if (cloud.empty()) return 0.0;
      const SimplicialComplex complex = build_cech(cloud, spec.r, spec.k + 1);
      return static_cast<double>(betti_numbers(complex, spec.k)[spec.k]);
    }
    case FunctionalKind::component_count: {
      UnionFind uf(cloud.size());
      for (const auto& [a, b] : neighbor_pairs(cloud, spec.r)) uf.unite(a, b);
      return static_cast<double>(uf.components());
    }
    case FunctionalKind::edge_count:
      return static_cast<double>(neighbor_pairs(cloud, spec.r).size());
  }
  throw InputError("functional: unknown kind");
}

double add_one_cost_unrestricted(const FunctionalSpec& spec, const PointCloud& cloud, std::span<const double> x) {
  PointCloud augmented = cloud;
  augmented.push_back(x);
  return evaluate(spec, augmented) - evaluate(spec, cloud);
}

AddOneCostRecord add_one_cost(const FunctionalSpec& spec, const PointCloud& cloud, const Point& x, const Box& window) {
  if (!window.contains(x.coords())) throw InputError("add_one_cost: location lies outside the window");
  const PointCloud local = cloud.restricted_to(window);
  return AddOneCostRecord{x, window, add_one_cost_unrestricted(spec, local, x.coords())};
}

bool translation_invariance_check(const FunctionalSpec& spec, const PointCloud& cloud, const Point& shift) {
  return evaluate(spec, cloud) == evaluate(spec, cloud.translated(shift.coords()));
}

}  // namespace stabclt
