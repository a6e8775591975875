#include "invforge/flatten.hpp"

#include <algorithm>

#include "invforge/rewire.hpp"

namespace invforge {

Term apply_replacement(const Term& t, int factor, const ReplaceSpec& spec) {
  const int old_count = t.factors[factor].slot_count();
  if ((int)spec.slot_map.size() != old_count)
    throw StructuralError("apply_replacement: slot map size mismatch");
  Term out;
  out.mode = t.mode;
  const int nf = (int)t.factors.size();
  for (int f = 0; f < nf; ++f)
    if (f != factor) out.factors.push_back(t.factors[f]);
  const int base = nf - 1;  // new factors appended after the survivors
  for (const Factor& f : spec.new_factors) out.factors.push_back(f);
  auto remap = [&](SlotRef s) -> SlotRef {
    if (s.factor == factor) {
      SlotRef m = spec.slot_map[s.slot];
      return {base + m.factor, m.slot};
    }
    if (s.factor > factor) --s.factor;
    return s;
  };
  for (const Edge& e : t.edges) out.edges.push_back({remap(e.a), remap(e.b)});
  for (const SlotRef& s : t.free) out.free.push_back(remap(s));
  for (const Edge& e : spec.extra_edges)
    out.edges.push_back({{base + e.a.factor, e.a.slot}, {base + e.b.factor, e.b.slot}});
  return out;
}

std::pair<Term, DimensionCoefficient> resolve_metrics_raw(Term t, DimensionCoefficient c) {
  for (;;) {
    int target = -1;
    for (size_t f = 0; f < t.factors.size(); ++f) {
      if (t.factors[f].kind != FactorKind::Metric) continue;
      SlotRef a{(int)f, 0}, b{(int)f, 1};
      if (t.free_of(a) >= 0 && t.free_of(b) >= 0) continue;  // explicit free metric stays
      target = (int)f;
      break;
    }
    if (target < 0) break;
    SlotRef a{target, 0}, b{target, 1};
    int ea = t.edge_of(a), eb = t.edge_of(b);
    if (ea >= 0 && ea == eb) {
      // g^ab g_ab = n
      c = c * DimensionCoefficient::n();
      Term nt = t;
      nt.edges.erase(nt.edges.begin() + ea);
      t = remove_factor(nt, target);
      continue;
    }
    Term nt = t;
    SlotRef pa, pb;
    bool a_edge = ea >= 0, b_edge = eb >= 0;
    if (a_edge) pa = t.partner(a);
    if (b_edge) pb = t.partner(b);
    // drop the edges touching the metric (by index, descending)
    std::vector<int> drop;
    if (ea >= 0) drop.push_back(ea);
    if (eb >= 0 && eb != ea) drop.push_back(eb);
    std::sort(drop.rbegin(), drop.rend());
    for (int d : drop) nt.edges.erase(nt.edges.begin() + d);
    if (a_edge && b_edge) {
      nt.edges.push_back({pa, pb});
    } else if (a_edge) {
      int fo = nt.free_of(b);
      nt.free[fo] = pa;
    } else {
      int fo = nt.free_of(a);
      nt.free[fo] = pb;
    }
    t = remove_factor(nt, target);
  }
  return {t, c};
}

LinearCombination resolve_metrics(const Term& t0, const DimensionCoefficient& c0) {
  auto [t, c] = resolve_metrics_raw(t0, c0);
  return LinearCombination::of(t, c);
}

namespace {
SlotRef L(int f, int s) { return {f, s}; }
}  // namespace

std::vector<ReplaceSpec> curvature_expansion_specs(const Factor& f, bool stop_at_riemann_trace) {
  const int m = f.deriv;
  std::vector<ReplaceSpec> out;
  auto ident_map = [&](const Factor& nf) {
    std::vector<SlotRef> map;
    for (int s = 0; s < f.slot_count() && s < nf.slot_count(); ++s) map.push_back(L(0, s));
    return map;
  };
  switch (f.kind) {
    case FactorKind::Ricci: {
      if (stop_at_riemann_trace) return out;
      ReplaceSpec r;
      r.new_factors = {{FactorKind::Riemann, m, ""}};
      for (int s = 0; s < m; ++s) r.slot_map.push_back(L(0, s));
      r.slot_map.push_back(L(0, m + 0));  // i
      r.slot_map.push_back(L(0, m + 2));  // k
      r.extra_edges = {{L(0, m + 1), L(0, m + 3)}};
      out.push_back(std::move(r));
      return out;
    }
    case FactorKind::ScalarR: {
      if (stop_at_riemann_trace) return out;
      ReplaceSpec r;
      r.new_factors = {{FactorKind::Riemann, m, ""}};
      for (int s = 0; s < m; ++s) r.slot_map.push_back(L(0, s));
      r.extra_edges = {{L(0, m + 0), L(0, m + 2)}, {L(0, m + 1), L(0, m + 3)}};
      out.push_back(std::move(r));
      return out;
    }
    case FactorKind::Weyl: {
      // W = R - (P /\ g),  (P /\ g)_ijkl = P_ik g_jl + P_jl g_ik - P_il g_jk - P_jk g_il
      // (the Kulkarni-Nomizu signs; forced by trace-freeness against (2.2)-(2.3))
      ReplaceSpec r;
      r.new_factors = {{FactorKind::Riemann, m, ""}};
      r.slot_map = ident_map(r.new_factors[0]);
      out.push_back(std::move(r));
      struct PG {
        int p0, p1, g0, g1;
        int sign;
      };
      // internal positions: i=0, j=1, k=2, l=3
      const PG pgs[4] = {{0, 2, 1, 3, -1}, {1, 3, 0, 2, -1}, {0, 3, 1, 2, +1}, {1, 2, 0, 3, +1}};
      for (const PG& pg : pgs) {
        ReplaceSpec s;
        s.new_factors = {{FactorKind::Schouten, m, ""}, {FactorKind::Metric, 0, ""}};
        s.slot_map.resize(f.slot_count());
        for (int d = 0; d < m; ++d) s.slot_map[d] = L(0, d);
        s.slot_map[m + pg.p0] = L(0, m + 0);
        s.slot_map[m + pg.p1] = L(0, m + 1);
        s.slot_map[m + pg.g0] = L(1, 0);
        s.slot_map[m + pg.g1] = L(1, 1);
        s.coeff = DimensionCoefficient(pg.sign);
        out.push_back(std::move(s));
      }
      return out;
    }
    case FactorKind::Schouten: {
      // P = (Ric - R g/(2(n-1)))/(n-2)
      DimensionCoefficient n = DimensionCoefficient::n();
      DimensionCoefficient one(1), two(2);
      ReplaceSpec r;
      r.new_factors = {{FactorKind::Ricci, m, ""}};
      r.slot_map = ident_map(r.new_factors[0]);
      r.coeff = one / (n - two);
      out.push_back(std::move(r));
      ReplaceSpec s;
      s.new_factors = {{FactorKind::ScalarR, m, ""}, {FactorKind::Metric, 0, ""}};
      s.slot_map.resize(f.slot_count());
      for (int d = 0; d < m; ++d) s.slot_map[d] = L(0, d);
      s.slot_map[m + 0] = L(1, 0);
      s.slot_map[m + 1] = L(1, 1);
      s.coeff = -(one / (two * (n - one) * (n - two)));
      out.push_back(std::move(s));
      return out;
    }
    case FactorKind::TracedSchouten: {
      DimensionCoefficient n = DimensionCoefficient::n();
      ReplaceSpec r;
      r.new_factors = {{FactorKind::ScalarR, m, ""}};
      r.slot_map = ident_map(r.new_factors[0]);
      r.coeff = DimensionCoefficient(1) / (DimensionCoefficient(2) * (n - DimensionCoefficient(1)));
      out.push_back(std::move(r));
      return out;
    }
    case FactorKind::Cotton: {
      // C_ijk = nabla_k P_ij - nabla_j P_ik ; new derivative is innermost
      for (int variant = 0; variant < 2; ++variant) {
        ReplaceSpec r;
        r.new_factors = {{FactorKind::Schouten, m + 1, ""}};
        r.slot_map.resize(f.slot_count());
        for (int d = 0; d < m; ++d) r.slot_map[d] = L(0, d);
        int di = m;             // innermost derivative slot of the new factor
        int pi = m + 1, pj = m + 2;  // internal slots of the new Schouten
        r.slot_map[m + 0] = L(0, pi);  // i -> P first index
        if (variant == 0) {
          r.slot_map[m + 1] = L(0, pj);  // j -> P second index
          r.slot_map[m + 2] = L(0, di);  // k -> derivative
          r.coeff = DimensionCoefficient(1);
        } else {
          r.slot_map[m + 1] = L(0, di);
          r.slot_map[m + 2] = L(0, pj);
          r.coeff = DimensionCoefficient(-1);
        }
        out.push_back(std::move(r));
      }
      return out;
    }
    default: return out;
  }
}

namespace {

LinearCombination expand_impl(const Term& t, const DimensionCoefficient& c, bool stop) {
  // find first expandable factor
  for (size_t f = 0; f < t.factors.size(); ++f) {
    auto specs = curvature_expansion_specs(t.factors[f], stop);
    if (specs.empty()) continue;
    LinearCombination out;
    for (const ReplaceSpec& s : specs) {
      Term nt = apply_replacement(t, (int)f, s);
      LinearCombination res = resolve_metrics(nt, c * s.coeff);
      for (const auto& [k, e] : res.terms()) out.add(expand_impl(e.term, e.coeff, stop));
    }
    return out;
  }
  return resolve_metrics(t, c);
}

}  // namespace

LinearCombination expand_factor(const Term& t, int factor, bool stop_at_riemann_trace) {
  auto specs = curvature_expansion_specs(t.factors[factor], stop_at_riemann_trace);
  if (specs.empty()) return LinearCombination::of(t);
  LinearCombination out;
  for (const ReplaceSpec& s : specs) {
    Term nt = apply_replacement(t, factor, s);
    out.add(resolve_metrics(nt, s.coeff));
  }
  return out;
}

LinearCombination expand_flat(const Term& t) {
  return expand_impl(t, DimensionCoefficient(1), false);
}

LinearCombination expand_flat(const LinearCombination& lc) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(expand_impl(e.term, e.coeff, false));
  return out;
}

LinearCombination expand_curvature(const Term& t) {
  return expand_impl(t, DimensionCoefficient(1), true);
}

LinearCombination expand_curvature(const LinearCombination& lc) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(expand_impl(e.term, e.coeff, true));
  return out;
}

namespace {

// R = W + P_jk g_il + P_il g_jk - P_jl g_ik - P_ik g_jl
// Ric = (n-2) P + TrP g ;  R_scal = 2(n-1) TrP
std::vector<ReplaceSpec> weylization_specs(const Factor& f) {
  const int m = f.deriv;
  std::vector<ReplaceSpec> out;
  DimensionCoefficient n = DimensionCoefficient::n();
  switch (f.kind) {
    case FactorKind::Riemann: {
      ReplaceSpec r;
      r.new_factors = {{FactorKind::Weyl, m, ""}};
      for (int s = 0; s < f.slot_count(); ++s) r.slot_map.push_back(L(0, s));
      out.push_back(std::move(r));
      struct PG {
        int p0, p1, g0, g1, sign;
      };
      const PG pgs[4] = {{0, 2, 1, 3, +1}, {1, 3, 0, 2, +1}, {0, 3, 1, 2, -1}, {1, 2, 0, 3, -1}};
      for (const PG& pg : pgs) {
        ReplaceSpec s;
        s.new_factors = {{FactorKind::Schouten, m, ""}, {FactorKind::Metric, 0, ""}};
        s.slot_map.resize(f.slot_count());
        for (int d = 0; d < m; ++d) s.slot_map[d] = L(0, d);
        s.slot_map[m + pg.p0] = L(0, m + 0);
        s.slot_map[m + pg.p1] = L(0, m + 1);
        s.slot_map[m + pg.g0] = L(1, 0);
        s.slot_map[m + pg.g1] = L(1, 1);
        s.coeff = DimensionCoefficient(pg.sign);
        out.push_back(std::move(s));
      }
      return out;
    }
    case FactorKind::Ricci: {
      ReplaceSpec r;
      r.new_factors = {{FactorKind::Schouten, m, ""}};
      for (int s = 0; s < f.slot_count(); ++s) r.slot_map.push_back(L(0, s));
      r.coeff = n - DimensionCoefficient(2);
      out.push_back(std::move(r));
      ReplaceSpec s;
      s.new_factors = {{FactorKind::TracedSchouten, m, ""}, {FactorKind::Metric, 0, ""}};
      s.slot_map.resize(f.slot_count());
      for (int d = 0; d < m; ++d) s.slot_map[d] = L(0, d);
      s.slot_map[m + 0] = L(1, 0);
      s.slot_map[m + 1] = L(1, 1);
      out.push_back(std::move(s));
      return out;
    }
    case FactorKind::ScalarR: {
      ReplaceSpec r;
      r.new_factors = {{FactorKind::TracedSchouten, m, ""}};
      for (int s = 0; s < f.slot_count(); ++s) r.slot_map.push_back(L(0, s));
      r.coeff = DimensionCoefficient(2) * (n - DimensionCoefficient(1));
      out.push_back(std::move(r));
      return out;
    }
    default: return out;
  }
}

LinearCombination weylize_impl(const Term& t, const DimensionCoefficient& c) {
  for (size_t f = 0; f < t.factors.size(); ++f) {
    auto specs = weylization_specs(t.factors[f]);
    if (specs.empty()) continue;
    LinearCombination out;
    for (const ReplaceSpec& s : specs) {
      Term nt = apply_replacement(t, (int)f, s);
      LinearCombination res = resolve_metrics(nt, c * s.coeff);
      for (const auto& [k, e] : res.terms()) out.add(weylize_impl(e.term, e.coeff));
    }
    return out;
  }
  return resolve_metrics(t, c);
}

}  // namespace

LinearCombination to_weyl_world(const Term& t) { return weylize_impl(t, DimensionCoefficient(1)); }

LinearCombination to_weyl_world(const LinearCombination& lc) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(weylize_impl(e.term, e.coeff));
  return out;
}

namespace {

// trace sign table for a Riemann internal-internal edge (positions p < q):
//   {pair (p,q), Ricci keeps positions (a,b), sign}; (0,1)/(2,3) vanish
struct TraceRule {
  int p, q, a, b, sign;
};
const TraceRule kTraceRules[4] = {
    {1, 3, 0, 2, +1}, {0, 2, 1, 3, +1}, {0, 3, 1, 2, -1}, {1, 2, 0, 3, -1}};

}  // namespace

namespace {

// kind change on factor f with a fresh internal block: old internal slot
// `keep[k]` becomes new internal slot k, the others must be detached already.
Term reshape_factor(const Term& t, int f, FactorKind new_kind, const std::string& label,
                    int new_deriv, const std::vector<int>& keep_internal) {
  Term out;
  out.mode = t.mode;
  out.factors = t.factors;
  const Factor& fc = t.factors[f];
  out.factors[f] = {new_kind, new_deriv, label};
  auto remap = [&](const SlotRef& s) -> SlotRef {
    if (s.factor != f) return s;
    if (s.slot < fc.deriv) {
      if (s.slot >= new_deriv) throw SlotError("reshape_factor: derivative slot dropped");
      return s;
    }
    int p = s.slot - fc.deriv;
    for (size_t k = 0; k < keep_internal.size(); ++k)
      if (keep_internal[k] == p) return {f, new_deriv + (int)k};
    throw SlotError("reshape_factor: internal slot still referenced");
  };
  for (const Edge& e : t.edges) out.edges.push_back({remap(e.a), remap(e.b)});
  for (const SlotRef& s : t.free) out.free.push_back(remap(s));
  return out;
}

}  // namespace

LinearCombination absorb_traces(const LinearCombination& lc) {
  LinearCombination out;
  for (const auto& [key, e] : lc.terms()) {
    Term t = e.term;
    DimensionCoefficient c = e.coeff;
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t f = 0; f < t.factors.size() && !changed; ++f) {
        const Factor fc = t.factors[f];
        if (fc.kind != FactorKind::Riemann && fc.kind != FactorKind::Ricci) continue;
        for (size_t ei = 0; ei < t.edges.size(); ++ei) {
          const Edge ed = t.edges[ei];
          if (ed.a.factor != (int)f || ed.b.factor != (int)f) continue;
          if (t.is_deriv_slot(ed.a) || t.is_deriv_slot(ed.b)) continue;
          int p = std::min(ed.a.slot, ed.b.slot) - fc.deriv;
          int q = std::max(ed.a.slot, ed.b.slot) - fc.deriv;
          Term nt = t;
          nt.edges.erase(nt.edges.begin() + ei);
          if (fc.kind == FactorKind::Ricci) {
            t = reshape_factor(nt, (int)f, FactorKind::ScalarR, "", fc.deriv, {});
            changed = true;
            break;
          }
          const TraceRule* rule = nullptr;
          for (const TraceRule& tr : kTraceRules)
            if (tr.p == p && tr.q == q) rule = &tr;
          if (!rule) continue;  // antisymmetric pair, canonicalizer zeroes it
          t = reshape_factor(nt, (int)f, FactorKind::Ricci, "", fc.deriv, {rule->a, rule->b});
          c = c * DimensionCoefficient(rule->sign);
          changed = true;
          break;
        }
      }
    }
    out.add(t, c);
  }
  return out;
}

Term to_graded(Term t) {
  t.mode = Mode::Graded;
  return t;
}

LinearCombination to_graded(const LinearCombination& lc) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(to_graded(e.term), e.coeff);
  return out;
}

}  // namespace invforge
