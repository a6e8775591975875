#include "invforge/transport.hpp"

#include <functional>

#include "invforge/flatten.hpp"

namespace invforge {

namespace {

// multiset of jet labels (psi family) of a combination's terms
std::vector<std::string> psi_labels_of(const LinearCombination& lc, const std::string& family) {
  std::vector<std::string> labels;
  if (lc.empty()) return labels;
  const Term& t = lc.terms().begin()->second.term;
  for (const Factor& f : t.factors)
    if (f.kind == FactorKind::FunctionJet && label_family(f.label) == family)
      labels.push_back(f.label);
  std::sort(labels.begin(), labels.end());
  return labels;
}

int count_upsilon(const Term& t, const std::string& ups) {
  int a = 0;
  for (const Factor& f : t.factors)
    if (f.kind == FactorKind::FunctionJet && f.label == ups && f.deriv == 1) ++a;
  return a;
}

int count_kinds(const Term& t, std::initializer_list<FactorKind> kinds) {
  int q = 0;
  for (const Factor& f : t.factors)
    for (FactorKind k : kinds)
      if (f.kind == k) ++q;
  return q;
}

// enumerate candidate correction terms: factor multiset drawn from
// (main-kind, second-kind, scalar-kind, jets with the given labels),
// derivative budget from the weight, then all pairings; filtered.
std::vector<Term> enumerate_correction_candidates(
    int weight, int length, const std::vector<std::string>& jet_labels, FactorKind main_kind,
    FactorKind second_kind, FactorKind scalar_kind, int max_second_and_scalar, int min_jet_deriv,
    const std::function<bool(const Term&)>& predicate) {
  std::map<std::string, Term> reps;
  const int nj = (int)jet_labels.size();
  for (int nmain = 0; nmain + nj <= length; ++nmain) {
    for (int nsecond = 0; nmain + nsecond + nj <= length; ++nsecond) {
      int nscalar = length - nmain - nsecond - nj;
      if (nscalar < 0) continue;
      if (nsecond + nscalar > max_second_and_scalar) continue;
      // derivative budget so the weight matches
      int base = 0;
      std::vector<Factor> shape;
      for (int i = 0; i < nmain; ++i) shape.push_back({main_kind, 0, ""});
      for (int i = 0; i < nsecond; ++i) shape.push_back({second_kind, 0, ""});
      for (int i = 0; i < nscalar; ++i) shape.push_back({scalar_kind, 0, ""});
      for (int i = 0; i < nj; ++i)
        shape.push_back({FactorKind::FunctionJet, min_jet_deriv, jet_labels[i]});
      for (const Factor& f : shape) {
        int arity = kind_arity(f.kind);
        int scale = kind_scale(f.kind);
        base += scale - (f.deriv + arity);  // weight contribution with all slots contracted
      }
      // remaining derivative budget: each extra derivative costs weight 1
      int budget = base - weight;
      if (budget < 0) continue;
      const int nf = (int)shape.size();
      std::vector<int> extra(nf, 0);
      std::function<void(int, int)> spread = [&](int pos, int rem) {
        if (pos == nf) {
          if (rem != 0) return;
          std::vector<Factor> fs = shape;
          for (int i = 0; i < nf; ++i) fs[i].deriv += extra[i];
          EnumOptions opt;
          for (Term& t : enumerate_pairings(fs, opt)) {
            if (predicate && !predicate(t)) continue;
            Canonical c = canonicalize(t);
            reps.emplace(c.key, c.term);
          }
          return;
        }
        for (int e = 0; e <= rem; ++e) {
          extra[pos] = e;
          spread(pos + 1, rem - e);
        }
        extra[pos] = 0;
      };
      spread(0, budget);
    }
  }
  std::vector<Term> out;
  for (auto& [k, t] : reps) out.push_back(t);
  return out;
}

TransportResult transport_impl(const TransportInput& in, bool weyl) {
  TransportResult res;
  // precondition: the upsilon identity vanishes in the graded quotient
  LinearCombination identity = in.scalars;
  if (!in.fields.empty()) identity.add(xdiv_all(in.fields, true, in.upsilon.upsilon_label),
                                       DimensionCoefficient(-1));
  int len = identity.empty() ? 0 : identity.terms().begin()->second.term.length();
  if (!identity.empty() && !is_zero_mod_length(identity, len + 1))
    throw PreconditionError("transport: input identity fails the graded check");
  if (in.scalars.empty() && in.fields.empty()) {
    res.success = true;
    return res;
  }

  // bookkeeping from the input form
  const Term& sample = (in.scalars.empty() ? in.fields : in.scalars).terms().begin()->second.term;
  const int a = count_upsilon(sample, in.upsilon.upsilon_label);
  int q = 0;
  for (const Factor& f : sample.factors)
    if (f.kind == FactorKind::FunctionJet &&
        label_family(f.label) == (weyl ? in.upsilon.psi_family : in.upsilon.omega_family))
      ++q;
  const int tau = sample.length() - a;

  // the transported combination A = image(scalars) - div_i image(fields)
  res.image_scalars = weyl ? weylify(in.scalars, in.upsilon) : riccify(in.scalars, in.upsilon);
  res.image_fields = weyl ? weylify(in.fields, in.upsilon) : riccify(in.fields, in.upsilon);
  LinearCombination A = res.image_scalars;
  for (const auto& [k, e] : res.image_fields.terms())
    A.add(total_divergence(e.term, 0), -e.coeff);
  if (A.empty()) {
    res.success = true;
    return res;
  }

  const int weight_A = A.weight();
  std::vector<std::string> labels = psi_labels_of(res.image_scalars.empty()
                                                      ? A
                                                      : res.image_scalars,
                                                  in.upsilon.psi_family);
  // candidate corrections per the Lemma's conclusion classes
  std::function<bool(const Term&)> pred;
  FactorKind main_kind, second_kind, scalar_kind;
  if (weyl) {
    main_kind = FactorKind::Weyl;
    second_kind = FactorKind::Schouten;
    scalar_kind = FactorKind::TracedSchouten;
    pred = [&](const Term& t) {
      Counts c = counts(t);
      int qs = 0;
      for (const Factor& f : t.factors)
        if (f.kind == FactorKind::Schouten || f.kind == FactorKind::TracedSchouten) ++qs;
      if (qs < q) return true;                      // D1
      return qs == q && c.deltaWP() >= a + 1;       // D2
    };
  } else {
    main_kind = FactorKind::Riemann;
    second_kind = FactorKind::Ricci;
    scalar_kind = FactorKind::ScalarR;
    pred = [&](const Term& t) {
      Counts c = counts(t);
      int qr = c.q + c.alpha;
      if (qr < q && c.delta() >= a) return true;  // D1
      return qr == q && c.delta() >= a + 1;       // D2
    };
  }
  std::vector<Term> cands = enumerate_correction_candidates(
      weight_A, tau, labels, main_kind, second_kind, scalar_kind, q, 2, pred);
  std::vector<LinearCombination> images;
  for (const Term& c : cands) images.push_back(LinearCombination::of(c));
  SolveResult sr = solve_linear_in_quotient(A, images, cands, tau + 1);
  res.success = sr.success;
  if (!sr.success) return res;
  for (auto& [term, coeff] : sr.coefficients) {
    Counts c = counts(term);
    int qs = weyl ? count_kinds(term, {FactorKind::Schouten, FactorKind::TracedSchouten})
                  : c.q + c.alpha;
    CorrectionClass cls = qs < q ? CorrectionClass::D1 : CorrectionClass::D2;
    res.corrections.push_back({term, coeff, cls});
    res.correction_sum.add(term, coeff);
  }
  return res;
}

}  // namespace

TransportResult weylify_transport(const TransportInput& in) { return transport_impl(in, true); }

TransportResult riccify_transport(const TransportInput& in) { return transport_impl(in, false); }

}  // namespace invforge
