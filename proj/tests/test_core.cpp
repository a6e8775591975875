#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invforge/combination.hpp"
#include "invforge/flatten.hpp"
#include "invforge/jet.hpp"
#include "invforge/relations.hpp"

using namespace invforge;

namespace {

// |R|^2-style builders used across the suite
Term two_riemann(const std::vector<std::pair<int, int>>& wiring) {
  // wiring pairs slots of factor 0 with slots of factor 1 by internal position
  Term t;
  t.mode = Mode::Graded;
  t.factors = {{FactorKind::Riemann, 0, ""}, {FactorKind::Riemann, 0, ""}};
  for (auto [a, b] : wiring) t.edges.push_back({{0, a}, {1, b}});
  return t;
}

Term riemann_sq() { return two_riemann({{0, 0}, {1, 1}, {2, 2}, {3, 3}}); }

}  // namespace

TEST_CASE("bigint arithmetic") {
  BigInt a = BigInt::from_string("123456789123456789123456789");
  BigInt b = BigInt::from_string("-987654321987654321");
  CHECK((a * b).to_string() == "-121932631356500531469135800347203169112635269");
  BigInt q, r;
  BigInt::divmod(a, b, q, r);
  CHECK((q * b + r) == a);
  CHECK(BigInt::gcd(BigInt(48), BigInt(-36)).to_string() == "12");
  CHECK(BigRat(BigInt(6), BigInt(-8)).to_string() == "-3/4");
}

TEST_CASE("dimension coefficients reduce and evaluate") {
  auto n = DimensionCoefficient::n();
  auto c = (n - DimensionCoefficient(3)) / (n - DimensionCoefficient(2));
  CHECK(c.to_string() == "(n-3)/(n-2)");
  CHECK(c.at_dimension(5).to_string() == "2/3");
  CHECK_THROWS_AS((DimensionCoefficient(1) / (n - DimensionCoefficient(3))).at_dimension(3),
                  EvalError);
  auto prod = c * (n - DimensionCoefficient(2));
  CHECK(prod.to_string() == "n-3");
  CHECK(DimensionCoefficient::parse("(n-3)/(n-2)") == c);
  // schouten trace coefficient 1/(2(n-1))
  auto half = DimensionCoefficient::rational(1, 2);
  CHECK((half / (n - DimensionCoefficient(1))).to_string() == "1/(2*n-2)");
}

TEST_CASE("weight per factor content") {
  CHECK(weight(riemann_sq()) == -4);
  Term scal;
  scal.mode = Mode::Graded;
  scal.factors = {{FactorKind::ScalarR, 0, ""}};
  CHECK(weight(scal) == -2);
  // contr(nabla^2 psi nabla^2 psi)
  Term jets;
  jets.mode = Mode::Graded;
  jets.factors = {{FactorKind::FunctionJet, 2, "psi"}, {FactorKind::FunctionJet, 2, "psi"}};
  jets.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  CHECK(weight(jets) == -4);
}

TEST_CASE("canonicalize: pair exchange and antisymmetry") {
  // contr(R_abcd R^abcd) vs contr(R_cdab R^cdab): identical keys
  Term a = riemann_sq();
  Term b = two_riemann({{0, 2}, {1, 3}, {2, 0}, {3, 1}});  // both factors pair-swapped
  CHECK(canonicalize(a).key == canonicalize(b).key);
  CHECK(canonicalize(a).sign == canonicalize(b).sign);

  // contr(R_abcd R^abdc) = -contr(R_abcd R^abcd)
  Term c = two_riemann({{0, 0}, {1, 1}, {2, 3}, {3, 2}});
  CHECK(canonicalize(c).key == canonicalize(a).key);
  CHECK(canonicalize(c).sign == -canonicalize(a).sign);

  // trace over an antisymmetric pair vanishes
  Term z;
  z.mode = Mode::Graded;
  z.factors = {{FactorKind::Riemann, 0, ""}, {FactorKind::Ricci, 0, ""}};
  z.edges = {{{0, 0}, {0, 1}}, {{0, 2}, {1, 0}}, {{0, 3}, {1, 1}}};
  CHECK(canonicalize(z).sign == 0);
}

TEST_CASE("canonicalize is idempotent") {
  Term a = two_riemann({{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  Canonical c1 = canonicalize(a);
  Canonical c2 = canonicalize(c1.term);
  CHECK(c1.key == c2.key);
  CHECK(c2.sign == 1);
}

TEST_CASE("linear combinations cancel") {
  LinearCombination lc;
  lc.add(riemann_sq(), DimensionCoefficient(1));
  Term c = two_riemann({{0, 0}, {1, 1}, {2, 3}, {3, 2}});
  lc.add(c, DimensionCoefficient(1));  // equals -|R|^2
  CHECK(lc.empty());
  LinearCombination l2 = LinearCombination::of(riemann_sq());
  CHECK((l2 - l2).empty());
  Term scal;
  scal.factors = {{FactorKind::ScalarR, 0, ""}};
  CHECK_THROWS_AS(l2.add(scal, DimensionCoefficient(1)), HomogeneityError);
}

TEST_CASE("metric resolution") {
  // g^ab g_ab = n on a bare double-metric term
  Term t;
  t.factors = {{FactorKind::Metric, 0, ""}, {FactorKind::Metric, 0, ""}};
  t.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  LinearCombination r = resolve_metrics(t, DimensionCoefficient(1));
  REQUIRE(r.size() == 1);
  CHECK(r.terms().begin()->second.term.factors.empty());
  CHECK(r.terms().begin()->second.coeff == DimensionCoefficient::n());
}

TEST_CASE("ricci expands to a riemann trace and back") {
  Term ric2;  // contr(Ric_ij Ric^ij)
  ric2.factors = {{FactorKind::Ricci, 0, ""}, {FactorKind::Ricci, 0, ""}};
  ric2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  LinearCombination flat = expand_flat(ric2);
  REQUIRE(flat.size() == 1);
  const Term& ft = flat.terms().begin()->second.term;
  CHECK(ft.factors.size() == 2);
  CHECK(ft.factors[0].kind == FactorKind::Riemann);
  LinearCombination back = absorb_traces(flat);
  REQUIRE(back.size() == 1);
  CHECK(back.terms().begin()->second.term.factors[0].kind == FactorKind::Ricci);
}

TEST_CASE("weyl trace-freeness: g^ik W_ijkl expands to zero") {
  // W factor with an internal-internal edge (i,k), free j,l
  Term t;
  t.factors = {{FactorKind::Weyl, 0, ""}};
  t.edges = {{{0, 0}, {0, 2}}};
  t.free = {{0, 1}, {0, 3}};
  LinearCombination flat = expand_flat(t);
  CHECK(flat.empty());
}

TEST_CASE("traced schouten expands to R/(2(n-1))") {
  Term t;
  t.factors = {{FactorKind::TracedSchouten, 0, ""}};
  LinearCombination cur = expand_curvature(t);
  REQUIRE(cur.size() == 1);
  const auto& e = cur.terms().begin()->second;
  CHECK(e.term.factors[0].kind == FactorKind::ScalarR);
  auto n = DimensionCoefficient::n();
  CHECK(e.coeff == DimensionCoefficient(1) / (DimensionCoefficient(2) * (n - DimensionCoefficient(1))));
}

TEST_CASE("to_weyl_world round trip on |R|^2") {
  LinearCombination lhs = LinearCombination::of(riemann_sq());
  LinearCombination w = to_weyl_world(lhs);
  LinearCombination back = expand_flat(w);
  CHECK(back == expand_flat(lhs));
}

TEST_CASE("counts on basic terms") {
  // contr(P_ij P^ij): sigma=2, deltaP=0
  Term p2;
  p2.factors = {{FactorKind::Schouten, 0, ""}, {FactorKind::Schouten, 0, ""}};
  p2.edges = {{{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}};
  Counts c = counts(p2);
  CHECK(c.length == 2);
  CHECK(c.deltaP == 0);
  CHECK(c.deltaAbs == 0);
  // contr((P^a_a)^2): sigma=2, deltaP=2
  Term tr2;
  tr2.factors = {{FactorKind::TracedSchouten, 0, ""}, {FactorKind::TracedSchouten, 0, ""}};
  Counts c2 = counts(tr2);
  CHECK(c2.length == 2);
  CHECK(c2.deltaP == 2);
  // contr(Delta Omega * Ric_ab nabla^ab psi)
  Term m;
  m.factors = {{FactorKind::FunctionJet, 2, "Omega"},
               {FactorKind::Ricci, 0, ""},
               {FactorKind::FunctionJet, 2, "psi"}};
  m.edges = {{{0, 0}, {0, 1}}, {{1, 0}, {2, 0}}, {{1, 1}, {2, 1}}};
  Counts c3 = counts(m);
  CHECK(c3.q == 1);
  CHECK(c3.deltaRic == 1);
  CHECK(c3.deltaPsi == 0);
  CHECK(c3.deltaAbs == 0);
}

TEST_CASE("classification per (q, delta) against mu") {
  // q=0 delta=mu target; q=0 delta>mu contributor
  Term t;
  t.factors = {{FactorKind::Riemann, 2, ""}, {FactorKind::FunctionJet, 2, "psi"}};
  t.edges = {{{0, 0}, {0, 1}}, {{0, 2}, {0, 4}}, {{0, 3}, {0, 5}}, {{1, 0}, {1, 1}}};
  // deltas: R has 3 internal contractions (1 deriv-deriv, 2 int-int), psi jet 1
  Counts c = counts(t);
  CHECK(classify(t, c.delta()) == TermClass::Target);
  CHECK(classify(t, c.delta() - 1) == TermClass::Contributor);
}

TEST_CASE("first Bianchi reduces the cross contraction R_ajbl R^albj") {
  // R_ijkl R^ikjl = 1/2 |R|^2 classically
  Term cross = two_riemann({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  // rewire to the crossed pattern: a<->a, c<->b, b<->c, d<->d
  Term crossed = two_riemann({{0, 0}, {1, 2}, {2, 1}, {3, 3}});
  LinearCombination basis_cross = reduce_bianchi(expand_flat(crossed));
  LinearCombination half_sq = reduce_bianchi(
      DimensionCoefficient::rational(1, 2) * expand_flat(Term(riemann_sq())));
  CHECK(basis_cross == half_sq);
}

TEST_CASE("brute force equality agrees with canonical keys on small terms") {
  std::vector<Factor> fs = {{FactorKind::Riemann, 0, ""}, {FactorKind::Riemann, 0, ""}};
  EnumOptions opt;
  auto reps = enumerate_pairings(fs, opt);
  for (size_t i = 0; i < reps.size(); ++i)
    for (size_t j = 0; j < reps.size(); ++j) {
      bool key_eq = canonicalize(reps[i]).key == canonicalize(reps[j]).key;
      CHECK(key_eq == brute_force_equal(reps[i], reps[j]));
    }
}

TEST_CASE("weight -4 rank-0 curvature invariants: 4 basis elements") {
  // sigma = 1: nabla^2 R fully contracted
  std::vector<Term> basis1 = bianchi_basis({{FactorKind::Riemann, 2, ""}}, 0);
  CHECK(basis1.size() == 1);
  // sigma = 2
  std::vector<Term> basis2 =
      bianchi_basis({{FactorKind::Riemann, 0, ""}, {FactorKind::Riemann, 0, ""}}, 0);
  CHECK(basis2.size() == 3);
}

TEST_CASE("canonical keys constant on symmetry orbits (random moves)") {
  Rng rng(2024);
  std::vector<std::vector<Factor>> shapes = {
      {{FactorKind::Riemann, 1, ""}, {FactorKind::Riemann, 0, ""},
       {FactorKind::FunctionJet, 1, "psi1"}},
      {{FactorKind::Weyl, 0, ""}, {FactorKind::Schouten, 1, ""},
       {FactorKind::FunctionJet, 1, "psi1"}},
      {{FactorKind::Ricci, 2, ""}, {FactorKind::FunctionJet, 2, "Omega1"}}};
  int moves = 0;
  for (int it = 0; it < 1000; ++it) {
    const auto& shape = shapes[it % shapes.size()];
    EnumOptions opt;
    auto reps = enumerate_pairings(shape, opt);
    if (reps.empty()) continue;
    Term t = reps[rng.range(0, (long long)reps.size() - 1)];
    Canonical base = canonicalize(t);
    // random symmetry move: swap an antisymmetric pair or two derivative slots
    Term moved = t;
    int f = (int)rng.range(0, (long long)t.factors.size() - 1);
    const Factor& fc = t.factors[f];
    int expect_sign = base.sign;
    if (kind_arity(fc.kind) == 4 && rng.range(0, 1)) {
      int p = (int)rng.range(0, 1) * 2;  // swap within pair p,p+1
      auto sw = [&](SlotRef& s) {
        if (s.factor != f) return;
        if (s.slot == fc.deriv + p) s.slot = fc.deriv + p + 1;
        else if (s.slot == fc.deriv + p + 1) s.slot = fc.deriv + p;
      };
      for (Edge& e : moved.edges) { sw(e.a); sw(e.b); }
      for (SlotRef& s : moved.free) sw(s);
      expect_sign = -expect_sign;
    } else if (fc.deriv >= 2) {
      auto sw = [&](SlotRef& s) {
        if (s.factor != f) return;
        if (s.slot == 0) s.slot = 1;
        else if (s.slot == 1) s.slot = 0;
      };
      for (Edge& e : moved.edges) { sw(e.a); sw(e.b); }
      for (SlotRef& s : moved.free) sw(s);
    } else {
      continue;
    }
    Canonical after = canonicalize(moved);
    CHECK(after.key == base.key);
    if (base.sign != 0) CHECK(after.sign == expect_sign);
    ++moves;
  }
  CHECK(moves > 500);
}

TEST_CASE("the s = sigma-1 / sigma-2 good predicate") {
  // s = sigma-1 at n = 8: all terms need delta_W + delta_P = 3
  Term t;  // nabla^{ab} W-double-divergence pair times TrP
  t.factors = {{FactorKind::Weyl, 1, ""}, {FactorKind::Weyl, 1, ""},
               {FactorKind::TracedSchouten, 0, ""}};
  t.edges = {{{0, 0}, {0, 4}}, {{1, 0}, {1, 4}}, {{0, 1}, {1, 1}},
             {{0, 2}, {1, 2}}, {{0, 3}, {1, 3}}};
  LinearCombination lc = LinearCombination::of(t);
  CHECK(is_good(lc, 2, 3, 8));       // deltas: 1 + 1 + 1 = 3 = 8/2 - 1
  CHECK_FALSE(is_good(lc, 2, 3, 10));  // would need 4
  // s = sigma-2 at sigma = n/2 - 1: the distinguished pair itself is good
  CHECK(is_good(lc, 1, 3, 8));
}
