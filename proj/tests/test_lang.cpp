#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invforge/flatten.hpp"
#include "invforge/lang.hpp"
#include "invforge/serialize.hpp"

using namespace invforge;

TEST_CASE("parse the basic forms") {
  LinearCombination r2 = parse_expression("contr( R(a,b,c,d) * R(a,b,c,d) )");
  CHECK(r2.size() == 1);
  CHECK(r2.weight() == -4);
  // coefficient rational in n
  LinearCombination w = parse_expression(
      "(n-3)/(n-2) * contr( nabla(s) W(s,j,k,l) * nabla(t) W(t,j,k,l) )");
  CHECK(w.size() == 1);
  auto n = DimensionCoefficient::n();
  auto c = w.terms().begin()->second.coeff;
  auto want = (n - DimensionCoefficient(3)) / (n - DimensionCoefficient(2));
  CHECK((c == want || c == -want));
  // jets and pcontr
  LinearCombination j = parse_expression("pcontr(i | nabla(i) f\"psi1\"() * f\"Omega1\"(a,a))");
  CHECK(j.arity() == 1);
}

TEST_CASE("arity diagnostics carry the index name") {
  CHECK_THROWS_WITH_AS(parse_expression("contr(R(a,b,c,d)*R(a,b,c,e))"),
                       doctest::Contains("index 'd'"), ParseError);
  CHECK_THROWS_AS(parse_expression("contr(Q(a,b))"), ParseError);
  CHECK_THROWS_AS(parse_expression("pcontr(i | Scal)"), ParseError);
}

TEST_CASE("print/parse round trip stabilizes") {
  const char* samples[] = {
      "contr(R(a,b,c,d)*R(a,b,c,d))",
      "contr(Ric(a,b)*Ric(a,b)) - 1/3 * contr(Scal*Scal)",
      "pcontr(i1 | nabla(i1) f\"psi1\"() * f\"Omega2\"(a,a))",
      "(n-3)/(n-2) * contr(nabla(s) W(s,j,k,l) * nabla(t) W(t,j,k,l)) + 2 * contr(nabla(a) TrP * nabla(a) TrP)",
      "contr(Cot(a,b,c) * Cot(a,b,c))",
      "pcontr(j,l | g(i,k) * W(i,j,k,l))",
  };
  for (const char* s : samples) {
    LinearCombination lc = parse_expression(s);
    std::string p1 = print_expression(lc);
    LinearCombination lc2 = parse_expression(p1);
    std::string p2 = print_expression(lc2);
    CHECK(p1 == p2);
    CHECK(lc == lc2);
  }
}

TEST_CASE("json round trip") {
  LinearCombination lc = parse_expression(
      "contr(Ric(a,b)*Ric(a,b)) - 1/3 * contr(Scal*Scal)");
  std::string js = to_json(lc);
  LinearCombination back = combination_from_json(js);
  CHECK(back == lc);
  CHECK(to_json(back) == js);  // byte-identical for fixed input
}

TEST_CASE("jet corpus file round trip") {
  auto jets = default_jet_corpus();
  CHECK(jets.size() == 20);
  write_jet_corpus("/tmp/invforge_jets_test.json", jets);
  auto back = load_jet_corpus("/tmp/invforge_jets_test.json");
  REQUIRE(back.size() == jets.size());
  for (size_t i = 0; i < jets.size(); ++i) {
    CHECK(back[i].seed == jets[i].seed);
    CHECK(back[i].dimension == jets[i].dimension);
  }
}
