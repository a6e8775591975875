#pragma once

#include "invforge/solver.hpp"
#include "invforge/transport.hpp"

namespace invforge {

enum class PipelineKind { CorolaMain, Cancwant, Vasko, Timgow };

// Input of the 5.33/5.37-style reductions: tensor fields (all internal
// contractions already freed) whose iterated Xdiv combination vanishes in the
// graded quotient. The first block carries delta = mu free indices, the rest
// more.
struct PipelineInput {
  PipelineKind kind = PipelineKind::Cancwant;
  LinearCombination mu_fields;                // rank mu, no Ricci/scalar factors
  std::vector<LinearCombination> rest_fields; // ranks > mu (contributors etc.)
  int sigma = 0;
  int mu = 0;
  std::string psi_family = "psi";
};

struct PipelineResult {
  bool certified = false;
  int delta_max = 0;                     // |Delta|_Max of the input
  std::vector<SolveResult> chain;        // the pregiade instances executed
  LinearCombination realized;            // final vector field (rank mu+1 form,
                                         // nabla(ups)-contracted formulation)
};

// Executes the |Delta|-stratified reduction: factor out Delta-psi / R factors
// (Erase), run the main algebraic proposition on the reduced instance, and
// rebuild the divergence by the nabla(ups) multiplication-back construction.
// Throws OutOfScopeError when |Delta|_Max > sigma - 3.
PipelineResult lemma_pipeline(const PipelineInput& in);

}  // namespace invforge
