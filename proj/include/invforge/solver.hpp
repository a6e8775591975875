#pragma once

#include <optional>

#include "invforge/combination.hpp"
#include "invforge/relations.hpp"

namespace invforge {

// Candidate-field shape: the (5.29) data plus knobs the desk-scale solver needs.
struct ShapeSpec {
  int weight = 0;
  int rank = 0;                        // free indices alpha
  int riemann_factors = 0;             // sigma_1
  std::vector<std::string> jet_labels; // one entry per function-jet factor
  int upsilon_count = 0;               // factors nabla(ups)
  bool acceptable = true;              // each jet >= 2 derivatives, no internal contractions
  int min_jet_derivs = 2;              // relaxed (>=1) for the s=sigma special cases
  bool reduce_to_basis = true;         // quotient candidates by the Bianchi lattice
  std::string upsilon_label = "ups";

  int length() const { return riemann_factors + (int)jet_labels.size() + upsilon_count; }
};

// complete, duplicate-free, deterministic list of canonical candidates
std::vector<Term> enumerate_fields(const ShapeSpec& spec);

struct SolveResult {
  bool success = false;
  // candidate term (canonical representative) and its coefficient
  std::vector<std::pair<Term, DimensionCoefficient>> coefficients;
  LinearCombination residual;  // reduced flat residual in the quotient
  int threshold = 0;
  LinearCombination realized;  // sum coeff * candidate, for convenience
};

// exact Gaussian elimination over Q(n): find x with target = sum x_k images[k]
// in the flat quotient below `threshold`. No tolerance anywhere.
SolveResult solve_linear_in_quotient(const LinearCombination& target,
                                     const std::vector<LinearCombination>& images,
                                     const std::vector<Term>& tags, int threshold);

// lhs = Xdiv(sum coeff * candidate) modulo length >= threshold
SolveResult solve_divergence(const LinearCombination& lhs, const ShapeSpec& candidates,
                             int threshold);

// Iterated Xdiv over all free indices of every term (standard variant).
LinearCombination xdiv_all(const LinearCombination& fields, bool upsilon_excluding = false,
                           const std::string& upsilon_label = "ups");

// Prop. 5.2 instance checker: verifies the hypothesis (5.30) in the graded
// quotient, then realizes the conclusion (5.31) with symmetrized free indices.
struct PregiadeInstance {
  // rank-alpha fields with coefficients (hypothesis L1 part)
  std::vector<std::pair<LinearCombination, int>> unused;  // (placeholder, unused)
  LinearCombination l1_fields;  // rank alpha
  std::vector<LinearCombination> l2_fields;  // ranks beta_l >= alpha+1, each homogeneous
  ShapeSpec conclusion_candidates;  // rank alpha+1
  int sigma = 0;
  int alpha = 0;
};

SolveResult check_pregiade_instance(const PregiadeInstance& inst);

// symmetrization over the first `count` free labels (average over permutations)
LinearCombination symmetrize_free(const LinearCombination& lc, int count);

}  // namespace invforge
