#pragma once

#include "invforge/jet.hpp"
#include "invforge/term.hpp"

namespace invforge {

// Curvature machinery over a polynomial metric jet. All tensors are lowered;
// index order matches the term model (derivative slots outermost-first, then
// the factor's internal indices).
class CurvatureJets {
 public:
  explicit CurvatureJets(const JetPoint& jet);

  int n() const { return jet_.dimension; }
  const JetPoint& jet() const { return jet_; }

  const TensorField& metric() const { return g_; }
  const TensorField& inverse_metric() const { return ginv_; }
  const TensorField& christoffel() const { return gamma_; }  // Gamma^k_ij as (k,i,j)
  const TensorField& riemann() const { return riem_; }       // R_ijkl per (2.1)

  // covariant derivative, new index prepended (outermost)
  TensorField covariant_derivative(const TensorField& t) const;

  // nabla^(m) of the factor kind, evaluated at the base point.
  // Throws EvalError when the jet order cannot support the derivative count.
  NumTensor factor_tensor(const Factor& f, long long dim_check) const;

  NumTensor inverse_metric_at_zero() const { return ginv_.at_zero(); }

 private:
  JetPoint jet_;
  TensorField g_, ginv_, gamma_, riem_;
  mutable std::map<std::string, TensorField> field_cache_;

  const TensorField& field_for(FactorKind kind, const std::string& label) const;
  TensorField base_field(FactorKind kind, const std::string& label) const;
};

// full contraction of a term on a jet; coefficients evaluated at the jet's
// integer dimension. Returns the eps-graded value; free slots must be empty.
EpsPoly evaluate(const Term& t, const CurvatureJets& cj);
EpsPoly evaluate(const class LinearCombination& lc, const CurvatureJets& cj);

// rank-alpha evaluation: returns the tensor over the free slots
NumTensor evaluate_tensor(const Term& t, const CurvatureJets& cj);
NumTensor evaluate_tensor(const class LinearCombination& lc, const CurvatureJets& cj);

// coefficient of eps^d
double graded_evaluate(const LinearCombination& lc, const CurvatureJets& cj, int degree);

// max |difference| of the eps-polynomials of two tensors, relative to scale
double tensor_rel_error(const NumTensor& a, const NumTensor& b);

}  // namespace invforge
