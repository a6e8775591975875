#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invforge/curvature.hpp"
#include "invforge/flatten.hpp"
#include "invforge/relations.hpp"

using namespace invforge;

namespace {

Term riemann_sq() {
  Term t;
  t.factors = {{FactorKind::Riemann, 0, ""}, {FactorKind::Riemann, 0, ""}};
  t.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
  return t;
}

Term scalar_term(FactorKind kind, int deriv = 0) {
  Term t;
  t.factors = {{kind, deriv, ""}};
  // fully self-contract derivative slots pairwise (deriv must be even)
  for (int s = 0; s < deriv; s += 2) t.edges.push_back({{0, s}, {0, s + 1}});
  return t;
}

}  // namespace

TEST_CASE("flat jet: all curvature vanishes") {
  JetPoint jp = JetPoint::flat(5, 4);
  CurvatureJets cj(jp);
  CHECK(evaluate(riemann_sq(), cj).max_abs() == doctest::Approx(0.0).epsilon(1e-14));
  Term sc = scalar_term(FactorKind::ScalarR);
  CHECK(evaluate(sc, cj).max_abs() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("space form: R = K n(n-1), |R|^2 = 2 K^2 n(n-1)") {
  const int n = 5;
  const double K = 1.0;
  JetPoint jp = JetPoint::space_form(n, K, 4);
  CurvatureJets cj(jp);
  double scal = evaluate(scalar_term(FactorKind::ScalarR), cj).value_sum();
  CHECK(scal == doctest::Approx(K * n * (n - 1)).epsilon(1e-10));
  double rsq = evaluate(riemann_sq(), cj).value_sum();
  CHECK(rsq == doctest::Approx(2.0 * K * K * n * (n - 1)).epsilon(1e-10));
}

TEST_CASE("curvature commutator convention holds numerically") {
  // [nabla_j nabla_i - nabla_i nabla_j] X_l = R_ijkl X^k for a random covector
  JetPoint jp = JetPoint::random(3, 5, 4, {"xi"});
  CurvatureJets cj(jp);
  const int n = jp.dimension;
  // X_l := nabla_l xi (any covector field built from the jet data)
  TensorField X = cj.covariant_derivative(
      [&] {
        TensorField f(n, 0);
        f.at({}) = jp.functions.at("xi");
        return f;
      }());
  TensorField ddX = cj.covariant_derivative(cj.covariant_derivative(X));
  NumTensor lhs0 = ddX.at_zero();
  NumTensor riem = cj.riemann().at_zero();
  NumTensor x0 = X.at_zero();
  NumTensor ginv = cj.inverse_metric_at_zero();
  double err = 0, scale = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        EpsPoly lhs = lhs0.at({j, i, l}) - lhs0.at({i, j, l});
        EpsPoly rhs;
        for (int k = 0; k < n; ++k)
          for (int m = 0; m < n; ++m)
            rhs += riem.at({i, j, k, l}) * ginv.at({k, m}) * x0.at({m});
        err = std::max(err, (lhs - rhs).max_abs());
        scale = std::max(scale, lhs.max_abs());
      }
  CHECK(err / std::max(scale, 1e-12) < 1e-10);
}

TEST_CASE("numeric first and second Bianchi on random jets") {
  for (uint64_t seed : {11u, 12u}) {
    JetPoint jp = JetPoint::random(seed, 4, 4);
    CurvatureJets cj(jp);
    NumTensor r = cj.riemann().at_zero();
    TensorField nr_f = cj.covariant_derivative(cj.riemann());
    NumTensor nr = nr_f.at_zero();
    const int n = jp.dimension;
    double e1 = 0, e2 = 0, scale = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            scale = std::max(scale, r.at({i, j, k, l}).max_abs());
            EpsPoly b1 = r.at({i, j, k, l}) + r.at({i, k, l, j}) + r.at({i, l, j, k});
            e1 = std::max(e1, b1.max_abs());
            for (int a = 0; a < n; ++a) {
              EpsPoly b2 = nr.at({a, i, j, k, l}) + nr.at({i, j, a, k, l}) +
                           nr.at({j, a, i, k, l});
              e2 = std::max(e2, b2.max_abs());
            }
          }
    CHECK(e1 / scale < 1e-10);
    CHECK(e2 / scale < 1e-10);
  }
}

TEST_CASE("graded order: 3-factor curvature term has leading eps order 3") {
  JetPoint jp = JetPoint::random(7, 4, 4);
  CurvatureJets cj(jp);
  Term t;
  t.factors = {{FactorKind::ScalarR, 0, ""}, {FactorKind::ScalarR, 0, ""},
               {FactorKind::ScalarR, 0, ""}};
  EpsPoly v = evaluate(t, cj);
  CHECK(v[0] == doctest::Approx(0.0));
  CHECK(v[1] == doctest::Approx(0.0));
  CHECK(v[2] == doctest::Approx(0.0));
  CHECK(std::abs(v[3]) > 1e-12);
}

TEST_CASE("symbolic expansions match numerically: Ricci and Weyl") {
  JetPoint jp = JetPoint::random(21, 5, 4);
  CurvatureJets cj(jp);
  // |Ric|^2 via Ricci factors vs flat expansion
  Term ric2;
  ric2.factors = {{FactorKind::Ricci, 0, ""}, {FactorKind::Ricci, 0, ""}};
  ric2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  double direct = evaluate(ric2, cj).value_sum();
  double flat = evaluate(expand_flat(ric2), cj).value_sum();
  CHECK(direct == doctest::Approx(flat).epsilon(1e-10));
  // |W|^2 via Weyl factors vs flat expansion
  Term w2;
  w2.factors = {{FactorKind::Weyl, 0, ""}, {FactorKind::Weyl, 0, ""}};
  w2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
  double wdirect = evaluate(w2, cj).value_sum();
  double wflat = evaluate(expand_flat(w2), cj).value_sum();
  CHECK(wdirect == doctest::Approx(wflat).epsilon(1e-10));
}

TEST_CASE("conformal transformation laws (2.5) and (2.10)") {
  for (int n : {5, 6}) {
    JetPoint jp = JetPoint::random(100 + n, n, 4, {"phi"});
    CurvatureJets cj(jp);
    CurvatureJets cj2(jp.conformally_scaled("phi"));
    // Weyl: W(e^{2phi} g) = e^{2phi} W(g)
    NumTensor w1 = cj.factor_tensor({FactorKind::Weyl, 0, ""}, n);
    NumTensor w2 = cj2.factor_tensor({FactorKind::Weyl, 0, ""}, n);
    // e^{2 phi(0)} as eps series
    SpatialPoly phi = jp.functions.at("phi");
    EpsPoly p0 = phi.at_zero();
    EpsPoly e2p(1.0);
    EpsPoly pw(1.0);
    double fact = 1;
    for (int k = 1; k <= EpsPoly::kMaxDeg; ++k) {
      pw = pw * p0;
      fact *= k;
      e2p += (std::pow(2.0, k) / fact) * pw;
    }
    NumTensor w1s = w1;
    for (size_t i = 0; i < w1s.size(); ++i) w1s.flat(i) = e2p * w1.flat(i);
    CHECK(tensor_rel_error(w1s, w2) < 1e-9);
  }
}
