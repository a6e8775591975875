#pragma once

#include "invforge/combination.hpp"

namespace invforge {

// d-th lambda-derivative at 0 of e^{n lambda psi} P(e^{2 lambda psi} g),
// computed by pushing the transformation laws (2.5), (2.8)-(2.11) through
// every factor and contraction. Exact in lambda; the result carries the d!
// of the derivative. Output terms are exact-mode (derivative order explicit).
LinearCombination image_conformal(const LinearCombination& P, int order,
                                  const std::string& psi_label = "psi");

// first variation d/dt|_0 of the term under g -> g + t v for the labeled
// symmetric 2-tensor; the quadratic curvature remainder of (2.12) is explicit
LinearCombination metric_variation(const Term& t, const std::string& v_label);
LinearCombination metric_variation(const LinearCombination& lc, const std::string& v_label);

}  // namespace invforge
