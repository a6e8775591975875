#pragma once

#include "invforge/combination.hpp"

namespace invforge {

// Eliminates Metric factors whose slots touch anything else: traces give a
// factor of n, contracted slots rewire. Fully-free metrics survive.
LinearCombination resolve_metrics(const Term& t, const DimensionCoefficient& c);

// Exact single-factor definitional expansions (metrics resolved eagerly):
//   Ricci   -> Riemann trace               Ric_ik = R_ijkl g^jl
//   ScalarR -> double Riemann trace
//   Weyl    -> Riemann - Schouten/\g       (2.4)
//   Schouten-> (Ric - R g/(2(n-1)))/(n-2)  (2.3)
//   TrP     -> R / (2(n-1))
//   Cotton  -> nabla P antisymmetrized     (2.6)
// `stop_at_riemann_trace` keeps Ricci/ScalarR as factor kinds instead of
// flattening them into Riemann traces.
LinearCombination expand_factor(const Term& t, int factor, bool stop_at_riemann_trace);

// Expands every non-flat factor. With stop_at_riemann_trace the target world
// is {Riemann, Ricci, ScalarR, FunctionJet, SymField} ("curvature world");
// without it only {Riemann, FunctionJet, SymField} remain ("flat world").
LinearCombination expand_flat(const Term& t);
LinearCombination expand_flat(const LinearCombination& lc);
LinearCombination expand_curvature(const Term& t);
LinearCombination expand_curvature(const LinearCombination& lc);

// Inverse substitution: rewrites Riemann/Ricci/ScalarR in terms of
// Weyl/Schouten/TracedSchouten (trace-free reconstruction). Exact.
LinearCombination to_weyl_world(const Term& t);
LinearCombination to_weyl_world(const LinearCombination& lc);

// Display aid: turns Riemann factors whose internal block carries trace edges
// back into Ricci / ScalarR factors (exact, definitional).
LinearCombination absorb_traces(const LinearCombination& lc);

// graded projection: marks every term Graded (derivative order forgotten)
LinearCombination to_graded(const LinearCombination& lc);
Term to_graded(Term t);

}  // namespace invforge
