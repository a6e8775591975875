#pragma once

#include "invforge/combination.hpp"

namespace invforge {

// Result of a directed rewrite. In graded mode `output` is the same-length
// image and `corrections` holds the strictly longer commutator terms; exact
// re-evaluation of the input equals output + corrections.
struct RewriteReport {
  LinearCombination output;
  LinearCombination corrections;
  std::vector<std::string> rules_applied;
  bool pattern_matched = true;
};

// Swaps the adjacent derivative slots (positions pos, pos+1) of one factor in
// exact mode; corrections carry one extra curvature factor each.
RewriteReport commute_derivatives(const Term& t, int factor, int pos);

// brings the derivative slot at `from` to position `to` (exact corrections)
RewriteReport move_derivative(const Term& t, int factor, int from, int to);

// definitional expansions at the combination level (exact, no corrections)
LinearCombination weyl_expand(const LinearCombination& lc);
LinearCombination schouten_expand(const LinearCombination& lc);

enum class NormalForm { Ens, WNormalized };

// Factor-level normalization toward the (2.2)/(4.7) or (5.16) shapes:
//  - Riemann internal-internal traces become Ricci / ScalarR factors
//  - Ricci divergences and traces become scalar-curvature factors (1/2 nabla R)
//  - Weyl traces vanish; Schouten traces become TracedSchouten
//  - optional first-Bianchi basis reduction (stays in the structured world)
// Graded corrections (from commuting contracted derivatives innermost) are
// reported; they are exact for the order-pinned input.
RewriteReport normalize(const LinearCombination& lc, NormalForm target,
                        bool bianchi_basis = true);

// Decomposition (5.1)/(5.2) of one Weyl factor carrying x internal
// contractions: leading nabla^(m)R term (coefficient 1, or (n-3)/(n-2) when an
// internal index is contracted) plus Ricci-class and scalar-class terms whose
// internal-contraction counts are the stated ones. Exact.
struct WeylDecomposition {
  LinearCombination leading;      // the nabla^(m)R image
  LinearCombination ricci_terms;  // delta = x+1 class (or x for the (5.2) drop)
  LinearCombination scalar_terms; // delta = x+2 class
  DimensionCoefficient leading_coefficient;
  LinearCombination all() const;
};
WeylDecomposition decompose_weyl_factor(const Term& t, int factor);

enum class FakeBianchi { Free, OneTrace, KTrace, MixedTrace, Laplacian };
const char* fake_bianchi_rule_id(FakeBianchi v);

// Applies the chosen fake second Bianchi identity at a Weyl factor: the term
// is rewritten into minus the two cyclic partners plus the identity's
// remainder, computed exactly (expanded curvature world). `deriv_a` / the
// pattern slots are located automatically; no-op with pattern_matched=false
// when the variant's pattern is absent.
RewriteReport fake_bianchi(const Term& t, int factor, FakeBianchi variant);

// the identity's exact remainder for a standalone pattern instance, used by
// tests and golden files: lhs(sum of the three cyclic terms) in curvature form
LinearCombination fake_bianchi_remainder(const Term& t, int factor, FakeBianchi variant);

}  // namespace invforge
