#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invforge/conformal.hpp"
#include "invforge/curvature.hpp"
#include "invforge/flatten.hpp"
#include "invforge/relations.hpp"

using namespace invforge;

namespace {

Term schouten_sq() {
  Term t;
  t.factors = {{FactorKind::Schouten, 0, ""}, {FactorKind::Schouten, 0, ""}};
  t.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  return t;
}

Term traced_schouten_sq() {
  Term t;
  t.factors = {{FactorKind::TracedSchouten, 0, ""}, {FactorKind::TracedSchouten, 0, ""}};
  return t;
}

Term weyl_sq() {
  Term t;
  t.factors = {{FactorKind::Weyl, 0, ""}, {FactorKind::Weyl, 0, ""}};
  t.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
  return t;
}

// numeric image: e^{w lam psi(0)} * value(P at e^{2 lam psi} g), w = n symbolically
double numeric_image(const LinearCombination& P, const JetPoint& jp, double lam, int eps_order) {
  JetPoint scaled = jp;
  scaled.functions["confscale"] = jp.functions.at("psi").scaled(EpsPoly(lam));
  JetPoint jp2 = scaled.conformally_scaled("confscale");
  CurvatureJets cj(jp2);
  EpsPoly val = evaluate(P, cj);
  // multiply by e^{n lam psi(0)} in the eps-truncated ring
  EpsPoly psi0 = jp.functions.at("psi").at_zero();
  EpsPoly expf(1.0), pw(1.0);
  double fact = 1;
  for (int k = 1; k <= EpsPoly::kMaxDeg; ++k) {
    pw = pw * psi0;
    fact *= k;
    expf += (std::pow((double)jp.dimension * lam, k) / fact) * pw;
  }
  EpsPoly total = expf * val;
  double acc = 0;
  for (int d = 0; d <= eps_order; ++d) acc += total[d];
  return acc;
}

double image_value(const LinearCombination& img, const JetPoint& jp, int eps_order) {
  CurvatureJets cj(jp);
  EpsPoly v = evaluate(img, cj);
  double acc = 0;
  for (int d = 0; d <= eps_order; ++d) acc += v[d];
  return acc;
}

}  // namespace

TEST_CASE("image order 0 is the identity") {
  LinearCombination P = LinearCombination::of(schouten_sq());
  CHECK(image_conformal(P, 0) == P);
}

TEST_CASE("Weyl squared at n=4: first image vanishes identically") {
  LinearCombination P = LinearCombination::of(weyl_sq());
  LinearCombination img = image_conformal(P, 1);
  // at symbolic n the naked-psi terms carry (n-4)-type coefficients; at n=4
  // every coefficient vanishes exactly
  bool all_zero_at_4 = true;
  for (const auto& [k, e] : img.terms())
    if (!e.coeff.at_dimension(4).is_zero()) all_zero_at_4 = false;
  CHECK(all_zero_at_4);
}

TEST_CASE("eq. (4.4): length-2 part of the second image of P_ij P^ij") {
  LinearCombination P = LinearCombination::of(schouten_sq());
  LinearCombination img = image_conformal(P, 2);
  LinearCombination len2 = to_graded(img).stratum(2);
  // expected: 2! * (P_ij -> -nabla^2_ij psi twice) = 2 contr(dd psi dd psi)
  Term jets;
  jets.factors = {{FactorKind::FunctionJet, 2, "psi"}, {FactorKind::FunctionJet, 2, "psi"}};
  jets.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  LinearCombination want = DimensionCoefficient(2) * LinearCombination::of(jets);
  CHECK(len2 == want);
  // and for (P^a_a)^2: 2 (Delta psi)^2
  LinearCombination P2 = LinearCombination::of(traced_schouten_sq());
  LinearCombination img2 = to_graded(image_conformal(P2, 2)).stratum(2);
  Term lap2;
  lap2.factors = {{FactorKind::FunctionJet, 2, "psi"}, {FactorKind::FunctionJet, 2, "psi"}};
  lap2.edges = {{{0, 0}, {0, 1}}, {{1, 0}, {1, 1}}};
  LinearCombination want2 = DimensionCoefficient(2) * LinearCombination::of(lap2);
  CHECK(img2 == want2);
}

TEST_CASE("image numeric cross-check (order 1, Schouten squared)") {
  JetPoint jp = JetPoint::random(51, 5, 4, {"psi"});
  LinearCombination P = LinearCombination::of(schouten_sq());
  LinearCombination img = image_conformal(P, 1);
  double sym = image_value(img, jp, 4);
  // centered finite difference in lambda with Richardson extrapolation
  auto fd = [&](double lam) {
    return (numeric_image(P, jp, lam, 4) - numeric_image(P, jp, -lam, 4)) / (2 * lam);
  };
  double d1 = fd(1e-3), d2 = fd(5e-4);
  double extrap = (4 * d2 - d1) / 3;
  CHECK(sym == doctest::Approx(extrap).epsilon(1e-6));
}

TEST_CASE("image numeric cross-check (order 2, traced Schouten squared)") {
  JetPoint jp = JetPoint::random(52, 5, 4, {"psi"});
  LinearCombination P = LinearCombination::of(traced_schouten_sq());
  LinearCombination img = image_conformal(P, 2);
  double sym = image_value(img, jp, 4);
  auto sec = [&](double lam) {
    return (numeric_image(P, jp, lam, 4) - 2 * numeric_image(P, jp, 0, 4) +
            numeric_image(P, jp, -lam, 4)) /
           (lam * lam);
  };
  double d1 = sec(2e-3), d2 = sec(1e-3);
  double extrap = (4 * d2 - d1) / 3;
  CHECK(sym == doctest::Approx(extrap).epsilon(1e-5));
}

TEST_CASE("metric variation of the scalar curvature matches finite differences") {
  JetPoint jp = JetPoint::random(61, 4, 4, {}, {"v"});
  Term scal;
  scal.mode = Mode::Exact;
  scal.factors = {{FactorKind::ScalarR, 0, ""}};
  LinearCombination var = metric_variation(scal, "v");
  CurvatureJets cj(jp);
  double sym = evaluate(var, cj).value_sum();
  auto value_at = [&](double tt) {
    CurvatureJets c2(jp.perturbed("v", tt));
    return evaluate(LinearCombination::of(scal), c2).value_sum();
  };
  double h = 1e-4;
  double fd = (value_at(h) - value_at(-h)) / (2 * h);
  CHECK(sym == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("metric variation of |R|^2 matches finite differences") {
  JetPoint jp = JetPoint::random(62, 4, 4, {}, {"v"});
  Term r2;
  r2.mode = Mode::Exact;
  r2.factors = {{FactorKind::Riemann, 0, ""}, {FactorKind::Riemann, 0, ""}};
  r2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
  LinearCombination var = metric_variation(r2, "v");
  CurvatureJets cj(jp);
  double sym = evaluate(var, cj).value_sum();
  auto value_at = [&](double tt) {
    CurvatureJets c2(jp.perturbed("v", tt));
    return evaluate(LinearCombination::of(r2), c2).value_sum();
  };
  double h = 1e-4;
  double fd = (value_at(h) - value_at(-h)) / (2 * h);
  CHECK(sym == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("metric variation of a derived term (nabla R * nabla psi)") {
  JetPoint jp = JetPoint::random(63, 4, 5, {"psi1"}, {"v"});
  Term t;
  t.mode = Mode::Exact;
  t.factors = {{FactorKind::ScalarR, 1, ""}, {FactorKind::FunctionJet, 1, "psi1"}};
  t.edges = {{{0, 0}, {1, 0}}};
  LinearCombination var = metric_variation(t, "v");
  CurvatureJets cj(jp);
  double sym = evaluate(var, cj).value_sum();
  auto value_at = [&](double tt) {
    CurvatureJets c2(jp.perturbed("v", tt));
    return evaluate(LinearCombination::of(t), c2).value_sum();
  };
  double h = 1e-4;
  double fd = (value_at(h) - value_at(-h)) / (2 * h);
  CHECK(sym == doctest::Approx(fd).epsilon(1e-6));
}
