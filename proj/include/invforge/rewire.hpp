#pragma once

#include "invforge/combination.hpp"

namespace invforge {

// One alternative in a single-factor rewrite: the factor is replaced by a set
// of new factors, its original slots rerouted onto their slots.
struct ReplaceSpec {
  std::vector<Factor> new_factors;
  // original slot index -> (new factor local index, slot). size == old slot count
  std::vector<SlotRef> slot_map;
  // extra edges among the new factors' slots (local factor indices)
  std::vector<Edge> extra_edges;
  DimensionCoefficient coeff = DimensionCoefficient(1);
};

// Applies the replacement; metric factors are NOT resolved here.
// Returns the rewired term; coefficient handling is the caller's.
Term apply_replacement(const Term& t, int factor, const ReplaceSpec& spec);

// definitional expansion alternatives for one factor (Weyl/Schouten/...)
std::vector<ReplaceSpec> curvature_expansion_specs(const Factor& f, bool stop_at_riemann_trace);

// metric elimination without canonicalization (single deterministic output)
std::pair<Term, DimensionCoefficient> resolve_metrics_raw(Term t, DimensionCoefficient c);

}  // namespace invforge
