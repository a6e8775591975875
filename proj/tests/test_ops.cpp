#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invforge/curvature.hpp"
#include "invforge/flatten.hpp"
#include "invforge/ops.hpp"
#include "invforge/relations.hpp"
#include "invforge/rewrite.hpp"
#include "invforge/solver.hpp"

using namespace invforge;

namespace {

Term jet(const std::string& label, int deriv) {
  Term t;
  t.factors = {{FactorKind::FunctionJet, deriv, label}};
  for (int s = 0; s < deriv; ++s) t.free.push_back({0, s});
  return t;
}

// contr(Delta Omega * X) with X = |nabla^2 psi|^2-ish partner so the term closes
Term delta_omega_times(const Term& closed_partner) {
  Term t = closed_partner;
  int f = (int)t.factors.size();
  t.factors.push_back({FactorKind::FunctionJet, 2, "Omega1"});
  t.edges.push_back({{f, 0}, {f, 1}});
  return t;
}

Term scal_sq() {
  Term t;
  t.factors = {{FactorKind::ScalarR, 0, ""}, {FactorKind::ScalarR, 0, ""}};
  return t;
}

double eval_sum(const LinearCombination& lc, const CurvatureJets& cj) {
  return evaluate(lc, cj).value_sum();
}

}  // namespace

TEST_CASE("make_free / restore_internal round trip") {
  // Delta Omega x Delta psi: free the Omega contraction, restore it
  Term base = delta_omega_times(delta_omega_times(scal_sq()));
  Rng rng(77);
  int tested = 0;
  for (int it = 0; it < 40; ++it) {
    // random small field: pick a random enumerated pairing of a random shape
    std::vector<Factor> fs = {{FactorKind::Riemann, (int)rng.range(0, 1), ""},
                              {FactorKind::FunctionJet, (int)rng.range(2, 3), "psi1"},
                              {FactorKind::FunctionJet, 2, "Omega1"}};
    EnumOptions opt;
    opt.filter = [](const Term& t) {
      for (const Edge& e : t.edges)
        if (e.a.factor == e.b.factor && !t.is_deriv_slot(e.a) && !t.is_deriv_slot(e.b))
          return false;  // internal-internal traces are outside make_free's domain
      return true;
    };
    auto reps = enumerate_pairings(fs, opt);
    if (reps.empty()) continue;
    const Term& t = reps[rng.range(0, (long long)reps.size() - 1)];
    // free every (nabla^a,_a) contraction then restore
    Term freed = make_all_free(t);
    Term back = restore_all_internal(freed);
    CHECK(canonicalize(back).key == canonicalize(t).key);
    CHECK(canonicalize(back).sign == canonicalize(t).sign);
    CHECK(weight(freed) == weight(t) + (int)freed.free.size());
    ++tested;
  }
  CHECK(tested >= 15);
  (void)base;
}

TEST_CASE("xdiv: single allowed target") {
  // C^i = nabla^i Omega1 (x) Delta Omega2 -> one term
  Term t;
  t.factors = {{FactorKind::FunctionJet, 1, "Omega1"}, {FactorKind::FunctionJet, 2, "Omega2"}};
  t.edges = {{{1, 0}, {1, 1}}};
  t.free = {{0, 0}};
  LinearCombination dv = xdiv(t, 0);
  CHECK(dv.size() == 1);
  CHECK(dv.terms().begin()->second.term.factors[1].deriv == 3);
}

TEST_CASE("xdiv + own-factor hits = total divergence (numeric Leibniz)") {
  JetPoint jp = JetPoint::random(5, 4, 5, {"psi1", "Omega1"});
  CurvatureJets cj(jp);
  Rng rng(123);
  int tested = 0;
  for (int it = 0; it < 60 && tested < 12; ++it) {
    std::vector<Factor> fs = {{FactorKind::Riemann, (int)rng.range(0, 1), ""},
                              {FactorKind::FunctionJet, (int)rng.range(2, 3), "psi1"}};
    EnumOptions opt;
    opt.free_labels = 1;
    auto reps = enumerate_pairings(fs, opt);
    if (reps.empty()) continue;
    const Term& f = reps[rng.range(0, (long long)reps.size() - 1)];
    LinearCombination total = total_divergence(f, 0);
    LinearCombination xd = xdiv(f, 0);
    // difference = own-factor hits; all three agree as evaluated sums
    double t_val = eval_sum(total, cj);
    LinearCombination own = total - xd;
    double sum = eval_sum(xd, cj) + eval_sum(own, cj);
    CHECK(t_val == doctest::Approx(sum).epsilon(1e-10));
    ++tested;
  }
  CHECK(tested >= 8);
}

TEST_CASE("ric_to_omega substitutions") {
  // R scalar -> -2 Delta Omega
  Term r = scal_sq();
  LinearCombination sub = ric_to_omega(r, "Omega", 2);
  REQUIRE(sub.size() == 1);
  const auto& e = sub.terms().begin()->second;
  CHECK(e.coeff == DimensionCoefficient(4));  // (-2)^2
  CHECK(e.term.factors[0].kind == FactorKind::FunctionJet);
  CHECK(e.term.factors[0].deriv == 2);
  // Ric_ij (x) nabla^ij psi -> -nabla^2_ij Omega nabla^ij psi
  Term t;
  t.factors = {{FactorKind::Ricci, 0, ""}, {FactorKind::FunctionJet, 2, "psi1"}};
  t.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  LinearCombination s2 = ric_to_omega(t, "Omega", 1);
  REQUIRE(s2.size() == 1);
  CHECK(s2.terms().begin()->second.coeff == DimensionCoefficient(-1));
  CHECK(s2.terms().begin()->second.term.factors[0].deriv == 2);
  CHECK_THROWS_AS(ric_to_omega(t, "Omega", 2), CountError);
}

TEST_CASE("erase deletes the nabla phi factor and its derivative slot") {
  // contr(nabla^a R_ijkl nabla_a phi1 (x) R^ijkl)
  Term t;
  t.factors = {{FactorKind::Riemann, 1, ""},
               {FactorKind::Riemann, 0, ""},
               {FactorKind::FunctionJet, 1, "phi1"}};
  t.edges = {{{0, 1}, {1, 0}}, {{0, 2}, {1, 1}}, {{0, 3}, {1, 2}},
             {{0, 4}, {1, 3}}, {{0, 0}, {2, 0}}};
  LinearCombination e = erase(t, "phi1");
  REQUIRE(e.size() == 1);
  const Term& out = e.terms().begin()->second.term;
  CHECK(out.length() == 2);
  CHECK(weight(out) == weight(t) + 2);
  // erasing a phi contracted against an internal index is a precondition error
  Term bad;
  bad.factors = {{FactorKind::Riemann, 0, ""},
                 {FactorKind::Riemann, 1, ""},
                 {FactorKind::FunctionJet, 1, "phi1"}};
  bad.edges = {{{0, 0}, {2, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}},
               {{0, 3}, {1, 3}}, {{1, 0}, {1, 4}}};
  CHECK_THROWS_AS(erase(bad, "phi1"), PreconditionError);
}

TEST_CASE("sub_omega branches") {
  // D2: contr(Delta Omega1 nabla phi1 ... ) -> nabla_s Omega1 nabla^s omega ...
  Term t;
  t.factors = {{FactorKind::FunctionJet, 2, "Omega1"},
               {FactorKind::Riemann, 1, ""},
               {FactorKind::FunctionJet, 1, "phi1"}};
  t.edges = {{{0, 0}, {0, 1}}, {{1, 0}, {2, 0}}};
  t.free = {{1, 1}, {1, 2}, {1, 3}, {1, 4}};
  LinearCombination d2 = sub_omega(t, "omega");
  REQUIRE(d2.size() == 1);
  const Term& o2 = d2.terms().begin()->second.term;
  CHECK(o2.length() == 4);
  bool has_omega = false;
  for (const Factor& f : o2.factors)
    if (f.label == "omega" && f.deriv == 1) has_omega = true;
  CHECK(has_omega);
  // D1: Ricci-bearing term -> -nabla^2 omega
  Term t1;
  t1.factors = {{FactorKind::Ricci, 0, ""}, {FactorKind::FunctionJet, 2, "Omega1"}};
  t1.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  LinearCombination d1 = sub_omega(t1, "omega");
  REQUIRE(d1.size() == 1);
  CHECK(d1.terms().begin()->second.coeff == DimensionCoefficient(-1));
  CHECK(d1.terms().begin()->second.term.factors[0].kind == FactorKind::FunctionJet);
  // two internal contractions -> count error
  Term t2 = delta_omega_times(delta_omega_times(Term{}));
  t2.factors.push_back({FactorKind::FunctionJet, 0, "psi9"});
  CHECK_THROWS_AS(sub_omega(t2, "omega"), CountError);
}

TEST_CASE("inflate_upsilon") {
  // Delta Omega (x) Delta psi -> two nabla(ups) factors, length sigma + mu
  Term t = delta_omega_times(Term{});
  t.factors.push_back({FactorKind::FunctionJet, 2, "psi1"});
  t.edges.push_back({{1, 0}, {1, 1}});
  Term inf = inflate_upsilon(t);
  CHECK(inf.length() == 4);
  int ups = 0;
  for (const Factor& f : inf.factors)
    if (f.label == "ups") ++ups;
  CHECK(ups == 2);
  // round trip via riccify (ups contacts back to internal contractions)
  LinearCombination back = riccify(inf);
  REQUIRE(back.size() == 1);
  // Omega jet became a Ricci-kind factor is wrong here: Delta Omega has its
  // contraction on the derivative pair; riccify turns the contact back into an
  // internal contraction on the Omega jet — but Omega jets become Ricci, so
  // compare weights only
  CHECK(weight(back.terms().begin()->second.term) == weight(t));
}

TEST_CASE("weylify dictionary") {
  UpsilonOptions opt;
  // nabla_i psi nabla^i ups -> P^a_a
  Term t;
  t.factors = {{FactorKind::FunctionJet, 1, "psi1"},
               {FactorKind::FunctionJet, 1, "ups"},
               {FactorKind::FunctionJet, 2, "psi2"}};
  t.edges = {{{0, 0}, {1, 0}}, {{2, 0}, {2, 1}}};
  LinearCombination w = weylify(t, opt);
  REQUIRE(w.size() == 1);
  const Term& wt = w.terms().begin()->second.term;
  int trp = 0, jets = 0;
  for (const Factor& f : wt.factors) {
    if (f.kind == FactorKind::TracedSchouten) ++trp;
    if (f.kind == FactorKind::FunctionJet) ++jets;
  }
  CHECK(trp == 2);  // nabla psi1 nabla ups and Delta psi2 both give P^a_a
  CHECK(jets == 0);
  // R_ijkl with no ups contact -> W_ijkl
  Term r;
  r.factors = {{FactorKind::Riemann, 0, ""}, {FactorKind::Riemann, 0, ""},
               {FactorKind::FunctionJet, 2, "psi1"}};
  r.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}},
             {{0, 3}, {2, 0}}, {{1, 3}, {2, 1}}};
  LinearCombination wr = weylify(r, opt);
  REQUIRE(wr.size() == 1);
  CHECK(wr.terms().begin()->second.term.factors[0].kind == FactorKind::Weyl);
  CHECK(wr.terms().begin()->second.coeff == DimensionCoefficient(1));
  // internal index against ups -> (n-2)/(n-3) coefficient; wire the Riemann
  // internals against two different jets so the term does not vanish
  Term ri;
  ri.factors = {{FactorKind::Riemann, 0, ""},
                {FactorKind::FunctionJet, 1, "ups"},
                {FactorKind::FunctionJet, 2, "psi1"},
                {FactorKind::FunctionJet, 2, "psi2"}};
  ri.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {2, 0}}, {{0, 2}, {3, 0}}, {{0, 3}, {2, 1}}};
  ri.free = {{3, 1}};
  LinearCombination wi = weylify(ri, opt);
  REQUIRE(wi.size() == 1);
  auto n = DimensionCoefficient::n();
  auto want = (n - DimensionCoefficient(2)) / (n - DimensionCoefficient(3));
  auto got = wi.terms().begin()->second.coeff;
  CHECK((got == want || got == -want));
  // ups contracting ups is a form error
  Term uu;
  uu.factors = {{FactorKind::FunctionJet, 1, "ups"}, {FactorKind::FunctionJet, 1, "ups"}};
  uu.edges = {{{0, 0}, {1, 0}}};
  CHECK_THROWS_AS(weylify(uu, opt), FormError);
}

TEST_CASE("riccify dictionary") {
  UpsilonOptions opt;
  // nabla_i Omega nabla^i ups -> R/2
  Term t;
  t.factors = {{FactorKind::FunctionJet, 1, "Omega1"},
               {FactorKind::FunctionJet, 1, "ups"},
               {FactorKind::FunctionJet, 2, "psi1"}};
  t.edges = {{{0, 0}, {1, 0}}, {{2, 0}, {2, 1}}};
  LinearCombination rc = riccify(t, opt);
  REQUIRE(rc.size() == 1);
  CHECK(rc.terms().begin()->second.coeff == DimensionCoefficient::rational(1, 2));
  bool scal = false;
  for (const Factor& f : rc.terms().begin()->second.term.factors)
    if (f.kind == FactorKind::ScalarR && f.deriv == 0) scal = true;
  CHECK(scal);
  // Omega 2-jet with one ups contact -> Ricci divergence-type factor
  Term t2;
  t2.factors = {{FactorKind::FunctionJet, 3, "Omega1"},
                {FactorKind::FunctionJet, 1, "ups"},
                {FactorKind::FunctionJet, 2, "psi1"}};
  t2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {2, 0}}, {{0, 2}, {2, 1}}};
  LinearCombination rc2 = riccify(t2, opt);
  REQUIRE(rc2.size() == 1);
  bool ric = false;
  for (const Factor& f : rc2.terms().begin()->second.term.factors)
    if (f.kind == FactorKind::Ricci) ric = true;
  CHECK(ric);
  // riccify'' consumes the contacted slot into nabla^(p-1) R
  LinearCombination rdp = riccify_dprime(t2, opt);
  REQUIRE(rdp.size() == 1);
  bool scal2 = false;
  for (const Factor& f : rdp.terms().begin()->second.term.factors)
    if (f.kind == FactorKind::ScalarR && f.deriv == 2) scal2 = true;
  CHECK(scal2);
}

TEST_CASE("normalize: ricci divergence becomes half nabla R") {
  CHECK(DimensionCoefficient::rational(1, 2).to_string() == "1/2");
  // nabla^j Ric_ij nabla^i psi — normalized to 1/2 nabla_i R nabla^i psi
  Term t;
  t.factors = {{FactorKind::Ricci, 1, ""}, {FactorKind::FunctionJet, 1, "psi1"}};
  t.edges = {{{0, 0}, {0, 2}}, {{0, 1}, {1, 0}}};
  RewriteReport r = normalize(LinearCombination::of(t), NormalForm::Ens);
  REQUIRE(r.output.size() == 1);
  const auto& e = r.output.terms().begin()->second;
  CHECK(e.term.factors[0].kind == FactorKind::ScalarR);
  CHECK(e.coeff == DimensionCoefficient::rational(1, 2));
  // idempotence
  RewriteReport r2 = normalize(r.output, NormalForm::Ens);
  CHECK(r2.output == r.output);
  CHECK(r2.rules_applied.empty());
}

TEST_CASE("normalize example: traced Riemann becomes Ricci") {
  Term t;
  t.factors = {{FactorKind::Riemann, 0, ""}, {FactorKind::Ricci, 0, ""}};
  t.edges = {{{0, 1}, {0, 3}}, {{0, 0}, {1, 0}}, {{0, 2}, {1, 1}}};
  RewriteReport r = normalize(LinearCombination::of(t), NormalForm::Ens);
  REQUIRE(r.output.size() == 1);
  CHECK(r.output.terms().begin()->second.term.factors[0].kind == FactorKind::Ricci);
  CHECK(r.output.terms().begin()->second.term.factors[1].kind == FactorKind::Ricci);
}

TEST_CASE("normalize preserves value (numeric, graded leading order)") {
  JetPoint jp = JetPoint::random(31, 5, 5, {"psi1"});
  CurvatureJets cj(jp);
  Term t;  // nabla^j Ric_ij nabla^i psi
  t.factors = {{FactorKind::Ricci, 1, ""}, {FactorKind::FunctionJet, 1, "psi1"}};
  t.edges = {{{0, 0}, {0, 2}}, {{0, 1}, {1, 0}}};
  RewriteReport r = normalize(LinearCombination::of(t), NormalForm::Ens);
  LinearCombination in = LinearCombination::of(t);
  double a = graded_evaluate(in, cj, 2);
  double b = graded_evaluate(r.output, cj, 2);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("cotton relation (2.6): div W - (3-n) C reduces to zero") {
  // closed instance: contract both sides against the same three 1-jets
  auto close = [](Term t) {
    Term out = t;
    int base = (int)out.factors.size();
    int slot = 0;
    for (SlotRef fr : t.free) {
      out.factors.push_back({FactorKind::FunctionJet, 1, "f" + std::to_string(slot)});
      out.edges.push_back({fr, {base + slot, 0}});
      ++slot;
    }
    out.free.clear();
    return out;
  };
  Term wdiv;
  wdiv.factors = {{FactorKind::Weyl, 1, ""}};
  wdiv.edges = {{{0, 0}, {0, 1}}};
  wdiv.free = {{0, 2}, {0, 3}, {0, 4}};
  Term cot;
  cot.factors = {{FactorKind::Cotton, 0, ""}};
  cot.free = {{0, 0}, {0, 1}, {0, 2}};
  auto n = DimensionCoefficient::n();
  LinearCombination rel = LinearCombination::of(close(wdiv));
  rel.add(close(cot), -(DimensionCoefficient(3) - n));
  LinearCombination red = reduce_bianchi(expand_flat(rel));
  CHECK(red.empty());
}

TEST_CASE("n=4 classical identity: |W|^2 = |R|^2 - 2|Ric|^2 + R^2/3") {
  Term w2;
  w2.factors = {{FactorKind::Weyl, 0, ""}, {FactorKind::Weyl, 0, ""}};
  w2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
  LinearCombination lhs = expand_flat(Term(w2));
  Term r2;
  r2.factors = {{FactorKind::Riemann, 0, ""}, {FactorKind::Riemann, 0, ""}};
  r2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
  Term ric2;
  ric2.factors = {{FactorKind::Ricci, 0, ""}, {FactorKind::Ricci, 0, ""}};
  ric2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  LinearCombination rhs = expand_flat(Term(r2));
  rhs.add(expand_flat(Term(ric2)), DimensionCoefficient(-2));
  rhs.add(expand_flat(scal_sq()), DimensionCoefficient::rational(1, 3));
  // identical at n = 4: substitute and compare every coefficient
  LinearCombination diff = lhs - rhs;
  for (const auto& [k, e] : diff.terms())
    CHECK(e.coeff.at_dimension(4).to_string() == "0");
}

TEST_CASE("commute_derivatives: scalar Hessian symmetric, exact elsewhere") {
  Term hess;  // nabla_a nabla_b psi, both free
  hess.mode = Mode::Exact;
  hess.factors = {{FactorKind::FunctionJet, 2, "psi1"}};
  hess.free = {{0, 0}, {0, 1}};
  RewriteReport r = commute_derivatives(hess, 0, 0);
  CHECK(r.corrections.empty());
  // nabla_a nabla_b X_l with X = nabla psi: one correction term
  Term t;
  t.mode = Mode::Exact;
  t.factors = {{FactorKind::FunctionJet, 3, "psi1"}};
  t.free = {{0, 0}, {0, 1}, {0, 2}};
  RewriteReport r2 = commute_derivatives(t, 0, 0);
  CHECK(r2.corrections.size() == 1);
  // numeric exactness at a random jet: evaluate as rank-3 tensors
  JetPoint jp = JetPoint::random(9, 4, 5, {"psi1"});
  CurvatureJets cj(jp);
  NumTensor lhs = evaluate_tensor(LinearCombination::of(t), cj);
  LinearCombination rhsc = r2.output;
  rhsc.add(r2.corrections);
  NumTensor rhs = evaluate_tensor(rhsc, cj);
  CHECK(tensor_rel_error(lhs, rhs) < 1e-10);
}

TEST_CASE("fake bianchi free variant: exact, corrections only lengthen") {
  // nabla_r W_ijkl closed against three small jets
  Term t;
  t.factors = {{FactorKind::Weyl, 1, ""},
               {FactorKind::FunctionJet, 2, "psi1"},
               {FactorKind::FunctionJet, 2, "psi2"},
               {FactorKind::FunctionJet, 1, "psi3"}};
  t.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {2, 0}},
             {{0, 3}, {2, 1}}, {{0, 4}, {3, 0}}};
  RewriteReport r = fake_bianchi(t, 0, FakeBianchi::Free);
  CHECK(r.pattern_matched);
  for (const auto& [k, e] : r.corrections.terms()) CHECK(e.term.length() > t.length());
  // numeric identity check: input = output + corrections, all eps orders
  JetPoint jp = JetPoint::random(14, 5, 4, {"psi1", "psi2", "psi3"});
  CurvatureJets cj(jp);
  LinearCombination in = LinearCombination::of(t);
  LinearCombination both = r.output;
  both.add(r.corrections);
  EpsPoly lhs = evaluate(in, cj);
  EpsPoly rhs = evaluate(both, cj);
  CHECK((lhs - rhs).max_abs() / std::max(1e-12, lhs.max_abs()) < 1e-8);
}

TEST_CASE("weyl decomposition (5.1): x=0 leading coefficient 1") {
  // W_iajb nabla^ij psi nabla^ab phi (nonzero wiring across two jets)
  Term t;
  t.factors = {{FactorKind::Weyl, 0, ""},
               {FactorKind::FunctionJet, 2, "psi1"},
               {FactorKind::FunctionJet, 2, "psi2"}};
  t.edges = {{{0, 0}, {1, 0}}, {{0, 2}, {1, 1}}, {{0, 1}, {2, 0}}, {{0, 3}, {2, 1}}};
  WeylDecomposition d = decompose_weyl_factor(t, 0);
  CHECK(d.leading_coefficient == DimensionCoefficient(1));
  CHECK(d.leading.size() == 1);
  // counts: the ricci class carries one more internal contraction than x=0
  for (const auto& [k, e] : d.ricci_terms.terms()) {
    Counts c = counts(e.term);
    CHECK(c.deltaRic == 1);
  }
  for (const auto& [k, e] : d.scalar_terms.terms()) {
    Counts c = counts(e.term);
    CHECK(c.deltaRic == 2);
  }
  // exactness: expansion equals the original (flat compare)
  CHECK(expand_flat(d.all()) == expand_flat(Term(t)));
}

TEST_CASE("weyl decomposition (5.2): internal contraction case") {
  // nabla^a W_ajkl with (j,k) against one jet, l against another
  Term t;
  t.factors = {{FactorKind::Weyl, 1, ""},
               {FactorKind::FunctionJet, 2, "psi1"},
               {FactorKind::FunctionJet, 2, "psi2"},
               {FactorKind::FunctionJet, 1, "psi3"}};
  t.edges = {{{0, 0}, {0, 1}}, {{0, 2}, {1, 0}}, {{0, 3}, {1, 1}},
             {{0, 4}, {2, 0}}, {{2, 1}, {3, 0}}};
  WeylDecomposition d = decompose_weyl_factor(t, 0);
  auto n = DimensionCoefficient::n();
  CHECK(d.leading_coefficient == (n - DimensionCoefficient(3)) / (n - DimensionCoefficient(2)));
  // graded identity: decomposition equals the original below length sigma+1
  LinearCombination diff = LinearCombination::of(t) - d.all();
  CHECK(is_zero_mod_length(diff, t.length() + 1));
  // numeric cross-check at leading eps order
  JetPoint jp = JetPoint::random(25, 6, 5, {"psi1", "psi2", "psi3"});
  CurvatureJets cj(jp);
  double a = graded_evaluate(LinearCombination::of(t), cj, 3);
  double b = graded_evaluate(d.all(), cj, 3);
  CHECK(a == doctest::Approx(b).epsilon(1e-8));
}

TEST_CASE("enumerate_fields ground truth at weight -4") {
  ShapeSpec s1;
  s1.weight = -4;
  s1.rank = 0;
  s1.riemann_factors = 1;
  s1.acceptable = false;
  ShapeSpec s2 = s1;
  s2.riemann_factors = 2;
  auto f1 = enumerate_fields(s1);
  auto f2 = enumerate_fields(s2);
  CHECK(f1.size() + f2.size() == 4);
  // weight -2 rank 0: only the scalar curvature
  ShapeSpec s0;
  s0.weight = -2;
  s0.rank = 0;
  s0.riemann_factors = 1;
  s0.acceptable = false;
  CHECK(enumerate_fields(s0).size() == 1);
  // infeasible: weight too shallow for the rank
  ShapeSpec bad;
  bad.weight = -1;
  bad.rank = 3;
  bad.riemann_factors = 1;
  CHECK(enumerate_fields(bad).empty());
}

TEST_CASE("solve_divergence completeness on a constructed instance") {
  // lhs := Xdiv of a chosen enumerated field must always be solvable
  ShapeSpec cand;
  cand.weight = -3;
  cand.rank = 1;
  cand.riemann_factors = 0;
  cand.jet_labels = {"psi1", "psi2"};
  cand.acceptable = false;
  cand.min_jet_derivs = 1;
  auto fields = enumerate_fields(cand);
  REQUIRE(fields.size() >= 2);
  LinearCombination lhs = xdiv_all(LinearCombination::of(fields[0]));
  lhs.add(xdiv_all(LinearCombination::of(fields[1])), DimensionCoefficient::rational(3, 2));
  SolveResult res = solve_divergence(lhs, cand, 3);
  CHECK(res.success);
  CHECK(res.residual.empty());
  // and the zero lhs solves trivially
  SolveResult triv = solve_divergence(LinearCombination(), cand, 3);
  CHECK(triv.success);
  CHECK(triv.coefficients.empty());
}
