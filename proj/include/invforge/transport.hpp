#pragma once

#include "invforge/ops.hpp"
#include "invforge/solver.hpp"

namespace invforge {

// Identity input for the transport lemmas 5.1 / 5.2: the combination
//   scalars - Xdiv_i(fields)  vanishes modulo length >= (term length)+1,
// with every term in the (5.9)/(5.13) upsilon form.
struct TransportInput {
  LinearCombination scalars;      // rank 0
  LinearCombination fields;       // rank 1
  UpsilonOptions upsilon;
};

enum class CorrectionClass { D1, D2 };

struct TransportResult {
  LinearCombination image_scalars;  // Weylify/Riccify of the scalars
  LinearCombination image_fields;   // Weylify/Riccify of the fields
  // solved correction terms with their Lemma class
  std::vector<std::tuple<Term, DimensionCoefficient, CorrectionClass>> corrections;
  LinearCombination correction_sum;
  bool success = false;
};

// Lemma 5.1: Weylified identity with D1 (< q Schouten factors) and
// D2 (= q Schouten factors, delta_W + delta_P >= a+1) corrections.
TransportResult weylify_transport(const TransportInput& in);

// Lemma 5.2: Riccified identity with D1 (< q Ricci factors and
// delta >= a) and D2 (= q, delta >= a+1) corrections.
TransportResult riccify_transport(const TransportInput& in);

}  // namespace invforge
