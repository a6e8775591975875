#pragma once

#include <functional>
#include <vector>

#include "invforge/combination.hpp"

namespace invforge {

// Enumeration of all pairings of a fixed factor multiset.
//
// A "signature" is the factor list plus the free arity; relations generated by
// the first and second Bianchi identities stay inside one signature, so the
// basis reduction is cached per signature key.

struct EnumOptions {
  int free_labels = 0;
  bool forbid_internal_contractions = false;  // acceptability: no within-factor edges
  bool forbid_upsilon_rules = false;  // no ups-ups edges, no free slot on ups factors
  std::string upsilon_label = "ups";
  // extra per-term predicate; empty = accept all
  std::function<bool(const Term&)> filter;
};

// all canonical representatives of pairings of `factors` (graded mode)
std::vector<Term> enumerate_pairings(const std::vector<Factor>& factors, const EnumOptions& opt);

// Reduction of flat-world combinations modulo the span of first + second
// Bianchi identity instances (graded: corrections of length > sigma dropped).
// Input terms must be flat (Riemann / FunctionJet / SymField / free Metric).
LinearCombination reduce_bianchi(const LinearCombination& lc);

// Reduction by first-Bianchi relations only, applied in the structured world
// (Riemann and Weyl factors both satisfy it exactly). Used by normalize().
LinearCombination reduce_first_bianchi(const LinearCombination& lc);

// basis of the signature's span modulo both Bianchi identities
std::vector<Term> bianchi_basis(const std::vector<Factor>& factors, int free_labels);

// convenience: expand to the flat world, split into length strata below
// `threshold`, reduce each; true iff everything cancels.
bool is_zero_mod_length(const LinearCombination& lc, int threshold);

// residual (reduced, flat) of the part below `threshold`
LinearCombination residual_mod_length(const LinearCombination& lc, int threshold);

void clear_relation_cache();

}  // namespace invforge
