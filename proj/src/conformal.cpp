#include "invforge/conformal.hpp"

#include <map>

#include "invforge/flatten.hpp"
#include "invforge/rewire.hpp"

namespace invforge {

namespace {

// Transformed tensor expression: `term.free` lists the object's open indices
// in position order; `lam` is the power of lambda the piece carries.
struct Piece {
  Term term;
  DimensionCoefficient coeff;
  int lam = 0;
};

Term empty_exact() {
  Term t;
  t.mode = Mode::Exact;
  return t;
}

// one factor with all slots free, in slot order
Piece bare(FactorKind kind, int deriv, const std::string& label,
           DimensionCoefficient c = DimensionCoefficient(1), int lam = 0) {
  Term t = empty_exact();
  t.factors.push_back({kind, deriv, label});
  for (int s = 0; s < t.factors[0].slot_count(); ++s) t.free.push_back({0, s});
  return {t, c, lam};
}

// gadget builders for the transformation-law right-hand sides; `order` maps
// each open-index position to a (factor, slot) of the constructed term
Piece gadget(std::vector<Factor> factors, std::vector<SlotRef> open,
             std::vector<Edge> edges, DimensionCoefficient c, int lam) {
  Term t = empty_exact();
  t.factors = std::move(factors);
  t.free = std::move(open);
  t.edges = std::move(edges);
  return {t, c, lam};
}

// conformal weight of the lowered factor under g -> e^{2 lambda psi} g
int conformal_exponent(FactorKind k) {
  switch (k) {
    case FactorKind::Riemann:
    case FactorKind::Weyl:
    case FactorKind::Metric: return 2;
    case FactorKind::ScalarR:
    case FactorKind::TracedSchouten: return -2;
    default: return 0;
  }
}

std::vector<Piece> core_pieces(const Factor& f, const std::string& psi) {
  DimensionCoefficient n = DimensionCoefficient::n();
  DimensionCoefficient one(1), two(2), half = DimensionCoefficient::rational(1, 2);
  Factor j1{FactorKind::FunctionJet, 1, psi};
  Factor j2{FactorKind::FunctionJet, 2, psi};
  Factor g{FactorKind::Metric, 0, ""};
  std::vector<Piece> out;
  switch (f.kind) {
    case FactorKind::Riemann: {
      // (2.9); open indices (i, j, k, l)
      out.push_back(bare(FactorKind::Riemann, 0, ""));
      struct HG {
        int a, b, g0, g1, sign;
      };
      // + dd_il psi g_jk + dd_jk psi g_il - dd_ik psi g_jl - dd_jl psi g_ik
      const HG hess[4] = {{0, 3, 1, 2, +1}, {1, 2, 0, 3, +1}, {0, 2, 1, 3, -1}, {1, 3, 0, 2, -1}};
      for (const HG& h : hess) {
        std::vector<SlotRef> open(4);
        open[h.a] = {0, 0};
        open[h.b] = {0, 1};
        open[h.g0] = {1, 0};
        open[h.g1] = {1, 1};
        out.push_back(gadget({j2, g}, open, {}, DimensionCoefficient(h.sign), 1));
      }
      // + d_i d_k g_jl + d_j d_l g_ik - d_i d_l g_jk - d_j d_k g_il
      const HG grad[4] = {{0, 2, 1, 3, +1}, {1, 3, 0, 2, +1}, {0, 3, 1, 2, -1}, {1, 2, 0, 3, -1}};
      for (const HG& h : grad) {
        std::vector<SlotRef> open(4);
        open[h.a] = {0, 0};
        open[h.b] = {1, 0};
        open[h.g0] = {2, 0};
        open[h.g1] = {2, 1};
        out.push_back(gadget({j1, j1, g}, open, {}, DimensionCoefficient(h.sign), 2));
      }
      // + |dpsi|^2 g_il g_jk - |dpsi|^2 g_ik g_jl
      out.push_back(gadget({j1, j1, g, g}, {{2, 0}, {3, 0}, {3, 1}, {2, 1}},
                           {{{0, 0}, {1, 0}}}, one, 2));
      out.push_back(gadget({j1, j1, g, g}, {{2, 0}, {3, 0}, {2, 1}, {3, 1}},
                           {{{0, 0}, {1, 0}}}, -one, 2));
      return out;
    }
    case FactorKind::Ricci: {
      // (2.8); open (a, b)
      out.push_back(bare(FactorKind::Ricci, 0, ""));
      out.push_back(gadget({j2}, {{0, 0}, {0, 1}}, {}, two - n, 1));
      out.push_back(gadget({j2, g}, {{1, 0}, {1, 1}}, {{{0, 0}, {0, 1}}}, -one, 1));
      out.push_back(gadget({j1, j1}, {{0, 0}, {1, 0}}, {}, n - two, 2));
      out.push_back(gadget({j1, j1, g}, {{2, 0}, {2, 1}}, {{{0, 0}, {1, 0}}}, -(n - two), 2));
      return out;
    }
    case FactorKind::Schouten: {
      // (2.10); open (a, b)
      out.push_back(bare(FactorKind::Schouten, 0, ""));
      out.push_back(gadget({j2}, {{0, 0}, {0, 1}}, {}, -one, 1));
      out.push_back(gadget({j1, j1}, {{0, 0}, {1, 0}}, {}, one, 2));
      out.push_back(gadget({j1, j1, g}, {{2, 0}, {2, 1}}, {{{0, 0}, {1, 0}}}, -half, 2));
      return out;
    }
    case FactorKind::Weyl:
      out.push_back(bare(FactorKind::Weyl, 0, ""));  // (2.5)
      return out;
    case FactorKind::ScalarR: {
      // trace of (2.8): R-hat = e^{-2phi}[R - 2(n-1) Delta psi*lam - (n-1)(n-2)|dpsi|^2 lam^2]
      out.push_back(bare(FactorKind::ScalarR, 0, ""));
      out.push_back(gadget({j2}, {}, {{{0, 0}, {0, 1}}}, -two * (n - one), 1));
      out.push_back(gadget({j1, j1}, {}, {{{0, 0}, {1, 0}}}, -(n - one) * (n - two), 2));
      return out;
    }
    case FactorKind::TracedSchouten: {
      out.push_back(bare(FactorKind::TracedSchouten, 0, ""));
      out.push_back(gadget({j2}, {}, {{{0, 0}, {0, 1}}}, -one, 1));
      out.push_back(gadget({j1, j1}, {}, {{{0, 0}, {1, 0}}}, one - half * n, 2));
      return out;
    }
    case FactorKind::FunctionJet:
      out.push_back(bare(FactorKind::FunctionJet, 0, f.label));
      return out;
    case FactorKind::SymField:
      out.push_back(bare(FactorKind::SymField, 0, f.label));
      return out;
    case FactorKind::Metric:
      out.push_back(bare(FactorKind::Metric, 0, ""));
      return out;
    case FactorKind::Cotton: break;  // handled by the caller via Schouten
  }
  throw Error("core_pieces: unhandled kind");
}

// transformed covariant derivative: output open indices are (a, old...)
std::vector<Piece> derivative_step(const std::vector<Piece>& in, const std::string& psi,
                                   int max_lam) {
  Factor j1{FactorKind::FunctionJet, 1, psi};
  Factor g{FactorKind::Metric, 0, ""};
  std::vector<Piece> out;
  for (const Piece& p : in) {
    const int v = (int)p.term.free.size();
    // plain Leibniz derivative
    for (size_t fidx = 0; fidx < p.term.factors.size(); ++fidx) {
      Term nt = add_derivative(p.term, (int)fidx, false);
      nt.free.insert(nt.free.begin(), SlotRef{(int)fidx, 0});
      out.push_back({nt, p.coeff, p.lam});
    }
    if (p.lam + 1 > max_lam) continue;
    // -Gamma-tilde^c_{a b_j} X_c with Gamma-tilde^c_{ab} =
    //   delta^c_a d_b psi + delta^c_b d_a psi - g_ab d^c psi
    for (int j = 0; j < v; ++j) {
      SlotRef xj = p.term.free[j];
      {  // delta^c_a d_{b_j} psi: X's slot takes the new index, jet takes b_j
        Term nt = p.term;
        int jf = (int)nt.factors.size();
        nt.factors.push_back(j1);
        std::vector<SlotRef> nf;
        nf.push_back(xj);
        for (int k = 0; k < v; ++k) nf.push_back(k == j ? SlotRef{jf, 0} : nt.free[k]);
        nt.free = nf;
        out.push_back({nt, -p.coeff, p.lam + 1});
      }
      {  // delta^c_{b_j} d_a psi
        Term nt = p.term;
        int jf = (int)nt.factors.size();
        nt.factors.push_back(j1);
        std::vector<SlotRef> nf;
        nf.push_back(SlotRef{jf, 0});
        for (int k = 0; k < v; ++k) nf.push_back(nt.free[k]);
        nt.free = nf;
        out.push_back({nt, -p.coeff, p.lam + 1});
      }
      {  // -g_{a b_j} d^c psi X_c
        Term nt = p.term;
        int jf = (int)nt.factors.size();
        nt.factors.push_back(j1);
        int gf = (int)nt.factors.size();
        nt.factors.push_back(g);
        nt.edges.push_back({{jf, 0}, xj});
        std::vector<SlotRef> nf;
        nf.push_back(SlotRef{gf, 0});
        for (int k = 0; k < v; ++k) nf.push_back(k == j ? SlotRef{gf, 1} : nt.free[k]);
        nt.free = nf;
        out.push_back({nt, p.coeff, p.lam + 1});
      }
    }
  }
  return out;
}

std::vector<Piece> transform_factor(const Factor& f, const std::string& psi, int max_lam) {
  std::vector<Piece> cur;
  int derivs = f.deriv;
  if (f.kind == FactorKind::Cotton) {
    // C_ijk = nabla_k P_ij - nabla_j P_ik, built from the Schouten pieces
    std::vector<Piece> dp =
        derivative_step(core_pieces({FactorKind::Schouten, 0, ""}, psi), psi, max_lam);
    // dp open order: (new, i, j)
    for (const Piece& p : dp) {
      // arrange to (i, j, k): variant 1: new->k
      Piece a = p;
      a.term.free = {p.term.free[1], p.term.free[2], p.term.free[0]};
      cur.push_back(a);
      Piece b = p;
      b.term.free = {p.term.free[1], p.term.free[0], p.term.free[2]};
      b.coeff = -b.coeff;
      cur.push_back(b);
    }
  } else {
    cur = core_pieces(f, psi);
  }
  for (int m = 0; m < derivs; ++m) cur = derivative_step(cur, psi, max_lam);
  return cur;
}

}  // namespace

LinearCombination image_conformal(const LinearCombination& P, int order,
                                  const std::string& psi_label) {
  if (order < 0) throw PreconditionError("image_conformal: order must be >= 0");
  if (!P.empty()) {
    // the weight -n setting requires an even weight (n = -weight integral)
    if (P.arity() != 0 || P.weight() % 2 != 0 || P.weight() > -2)
      throw HomogeneityError("image_conformal: input must be a scalar of even weight <= -2");
  }
  LinearCombination result;
  if (order == 0) return P;

  // transformed-factor cache for this call
  std::map<std::string, std::vector<Piece>> cache;
  auto pieces_for = [&](const Factor& f) -> const std::vector<Piece>& {
    std::string key = std::string(kind_name(f.kind)) + '|' + std::to_string(f.deriv) + '|' +
                      f.label;
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache.emplace(key, transform_factor(f, psi_label, order)).first->second;
  };

  DimensionCoefficient dfact(1);
  for (int i = 2; i <= order; ++i) dfact = dfact * DimensionCoefficient(i);

  for (const auto& [tkey, entry] : P.terms()) {
    const Term& t = entry.term;
    const int nf = (int)t.factors.size();
    std::vector<const std::vector<Piece>*> lists(nf);
    for (int f = 0; f < nf; ++f) lists[f] = &pieces_for(t.factors[f]);

    // e-exponent: n (volume prefactor) + factor weights - 2 per contraction
    PolyN expo = PolyN::n();
    for (const Factor& f : t.factors)
      expo = expo + PolyN::constant(conformal_exponent(f.kind));
    expo = expo - PolyN::constant(2 * (int)t.edges.size());

    std::vector<int> choice(nf, 0);
    std::function<void(int, int)> pick = [&](int f, int lam_sum) {
      if (f == nf) {
        int naked = order - lam_sum;
        // assemble the glued term
        Term glued = empty_exact();
        std::vector<int> base(nf, 0);
        for (int ff = 0; ff < nf; ++ff) {
          const Piece& p = (*lists[ff])[choice[ff]];
          base[ff] = (int)glued.factors.size();
          for (const Factor& fac : p.term.factors) glued.factors.push_back(fac);
          for (const Edge& e : p.term.edges)
            glued.edges.push_back({{e.a.factor + base[ff], e.a.slot},
                                   {e.b.factor + base[ff], e.b.slot}});
        }
        auto mapped = [&](const SlotRef& s) -> SlotRef {
          const Piece& p = (*lists[s.factor])[choice[s.factor]];
          SlotRef open = p.term.free[s.slot];
          return {open.factor + base[s.factor], open.slot};
        };
        for (const Edge& e : t.edges) glued.edges.push_back({mapped(e.a), mapped(e.b)});
        for (const SlotRef& s : t.free) glued.free.push_back(mapped(s));
        for (int k = 0; k < naked; ++k)
          glued.factors.push_back({FactorKind::FunctionJet, 0, psi_label});
        DimensionCoefficient coeff = entry.coeff;
        for (int ff = 0; ff < nf; ++ff) coeff = coeff * (*lists[ff])[choice[ff]].coeff;
        // exponent contribution expo^naked / naked!
        PolyN ep = PolyN::constant(1);
        DimensionCoefficient fact(1);
        for (int k = 1; k <= naked; ++k) {
          ep = ep * expo;
          fact = fact * DimensionCoefficient(k);
        }
        coeff = coeff * DimensionCoefficient(ep, PolyN::constant(1)) / fact;
        if (coeff.is_zero()) return;
        auto [rt, rc] = resolve_metrics_raw(glued, coeff);
        result.add(rt, rc * dfact);
        return;
      }
      for (size_t c = 0; c < lists[f]->size(); ++c) {
        int lam = (*lists[f])[c].lam;
        if (lam_sum + lam > order) continue;
        choice[f] = (int)c;
        pick(f + 1, lam_sum + lam);
      }
    };
    pick(0, 0);
  }
  return result;
}

// ---------------------------------------------------------------------------
// metric variation

namespace {

// delta Gamma^c_{ab} contraction pattern: 1/2 (nabla_a v^c_b + nabla_b v^c_a
// - nabla^c v_ab); used for derivative-slot variations below.

}  // namespace

LinearCombination metric_variation(const Term& t0, const std::string& v_label) {
  if (t0.mode != Mode::Exact)
    throw PreconditionError("metric_variation requires exact mode");
  // work in the curvature world so cores are Riemann / jets / SymField only
  LinearCombination flat = expand_flat(t0);
  LinearCombination out;
  Factor vf{FactorKind::SymField, 0, v_label};
  Factor v1{FactorKind::SymField, 1, v_label};
  Factor v2{FactorKind::SymField, 2, v_label};

  for (const auto& [key, entry] : flat.terms()) {
    const Term& t = entry.term;
    // (a) edge variations: delta g^{ab} = -v^{ab}
    for (size_t e = 0; e < t.edges.size(); ++e) {
      Term nt = t;
      Edge ed = nt.edges[e];
      nt.edges.erase(nt.edges.begin() + e);
      int vi = (int)nt.factors.size();
      nt.factors.push_back(vf);
      nt.edges.push_back({ed.a, {vi, 0}});
      nt.edges.push_back({ed.b, {vi, 1}});
      out.add(nt, -entry.coeff);
    }
    // (b) core variations: Riemann factors, per the exact first variation
    //   delta R_ijkl = 1/2(dd_il v_jk + dd_jk v_il - dd_ik v_jl - dd_jl v_ik)
    //                  - 1/2 R_ijmk v^m_l + 1/2 R_ijml v_k^m
    for (size_t f = 0; f < t.factors.size(); ++f) {
      const Factor& fc = t.factors[f];
      if (fc.kind == FactorKind::Metric) {
        // explicit free metric: delta g_ab = v_ab
        Term nt = t;
        nt.factors[f] = vf;
        out.add(nt, entry.coeff);
        continue;
      }
      if (fc.kind != FactorKind::Riemann) continue;
      const int m = fc.deriv;
      // the core sits under m derivatives; distribute them by Leibniz onto
      // the replacement gadgets. Build each gadget as a two-factor object
      // (replacement core slots; v-part), then spread the m derivative
      // attachments over the two factors in all 2^m order-preserving ways.
      struct Gadget {
        // the Riemann slots (i,j,k,l) map to: target (0 = survivor factor
        // slot list, 1 = the v factor), plus internal edges
        std::vector<Factor> factors;
        std::vector<SlotRef> open;  // position = old internal position i,j,k,l
        std::vector<Edge> edges;
        DimensionCoefficient coeff;
      };
      std::vector<Gadget> gadgets;
      DimensionCoefficient half = DimensionCoefficient::rational(1, 2);
      // Hessian parts: dd_?? v_??
      struct HP {
        int a, b, c, d, sign;
      };  // dd_{ab} v_{cd}
      const HP hp[4] = {{0, 3, 1, 2, +1}, {1, 2, 0, 3, +1}, {0, 2, 1, 3, -1}, {1, 3, 0, 2, -1}};
      for (const HP& h : hp) {
        Gadget g;
        g.factors = {v2};
        g.open.resize(4);
        g.open[h.a] = {0, 0};
        g.open[h.b] = {0, 1};
        g.open[h.c] = {0, 2};
        g.open[h.d] = {0, 3};
        g.coeff = DimensionCoefficient(h.sign) * half;
        gadgets.push_back(g);
      }
      {  // -1/2 R_ijmk v^m_l
        Gadget g;
        g.factors = {{FactorKind::Riemann, 0, ""}, vf};
        g.open = {{0, 0}, {0, 1}, {0, 3}, {1, 1}};
        g.edges = {{{0, 2}, {1, 0}}};
        g.coeff = -half;
        gadgets.push_back(g);
      }
      {  // +1/2 R_ijml v_k^m
        Gadget g;
        g.factors = {{FactorKind::Riemann, 0, ""}, vf};
        g.open = {{0, 0}, {0, 1}, {1, 0}, {0, 3}};
        g.edges = {{{0, 2}, {1, 1}}};
        g.coeff = half;
        gadgets.push_back(g);
      }
      for (const Gadget& g : gadgets) {
        for (int mask = 0; mask < (1 << m); ++mask) {
          // derivative slots in `mask` go to the second factor (the v part),
          // the rest to the first; order preserved. When the gadget has a
          // single factor everything goes onto it.
          if (g.factors.size() == 1 && mask != 0) continue;
          Term nt;
          nt.mode = Mode::Exact;
          nt.factors = t.factors;
          int b0 = (int)nt.factors.size();
          Factor f0 = g.factors[0];
          Factor f1 = g.factors.size() > 1 ? g.factors[1] : Factor{};
          int extra0 = 0, extra1 = 0;
          for (int d = 0; d < m; ++d)
            if (mask & (1 << d))
              ++extra1;
            else
              ++extra0;
          f0.deriv += extra0;
          nt.factors.push_back(f0);
          int b1 = -1;
          if (g.factors.size() > 1) {
            f1.deriv += extra1;
            b1 = (int)nt.factors.size();
            nt.factors.push_back(f1);
          }
          // translate old factor-f slots
          int p0 = 0, p1 = 0;
          std::vector<SlotRef> dmap(m);
          for (int d = 0; d < m; ++d) {
            if (mask & (1 << d))
              dmap[d] = {b1, p1++};
            else
              dmap[d] = {b0, p0++};
          }
          auto translate = [&](SlotRef s) -> SlotRef {
            if (s.factor != (int)f) return s;
            if (s.slot < m) return dmap[s.slot];
            SlotRef open = g.open[s.slot - m];
            int bb = open.factor == 0 ? b0 : b1;
            int shift = open.factor == 0 ? extra0 : extra1;
            return {bb, open.slot + shift};
          };
          for (const Edge& e : t.edges) nt.edges.push_back({translate(e.a), translate(e.b)});
          for (const SlotRef& s : t.free) nt.free.push_back(translate(s));
          for (const Edge& e : g.edges) {
            auto fix = [&](SlotRef s) -> SlotRef {
              int bb = s.factor == 0 ? b0 : b1;
              int shift = s.factor == 0 ? extra0 : extra1;
              return {bb, s.slot + shift};
            };
            nt.edges.push_back({fix(e.a), fix(e.b)});
          }
          // drop the replaced factor
          nt = remove_factor(nt, (int)f);
          nt.validate();
          out.add(nt, entry.coeff * g.coeff);
        }
      }
    }
    // (c) derivative-slot variations: for each factor with derivatives,
    //   delta(nabla_{r_1..r_m} T) -= sum over positions tau and lower slots s:
    //   outer Leibniz (2^{tau}) x deltaGamma^c_{r_tau, s}(v) patterns
    for (size_t f = 0; f < t.factors.size(); ++f) {
      const Factor& fc = t.factors[f];
      const int m = fc.deriv;
      if (m == 0) continue;
      for (int tau = 0; tau < m; ++tau) {
        // slots below tau: derivative slots tau+1..m-1 plus internal slots
        for (int c = tau + 1; c < fc.slot_count(); ++c) {
          // deltaGamma^{c'}_{a s} = 1/2 g^{c'd}(nab_a v_{ds} + nab_s v_{da}
          //                                    - nab_d v_{as})
          // with a = the index on slot tau, s = the index on slot c, and c'
          // contracting X's slot c. Three patterns; the outer derivatives
          // (positions < tau) distribute by Leibniz.
          struct DG {
            int a_pos, s_pos, cp_pos;  // positions among (deriv, int0, int1)
            int sign;
          };
          const DG dgs[3] = {{0, 2, 1, +1},   //  nab_a v_{c' s}
                             {2, 0, 1, +1},   //  nab_s v_{c' a}
                             {1, 2, 0, -1}};  // -nab_{c'} v_{a s}
          for (const DG& dg : dgs) {
            for (int mask = 0; mask < (1 << tau); ++mask) {
              std::vector<int> moved;
              for (int d = 0; d < tau; ++d)
                if (mask & (1 << d)) moved.push_back(d);
              const int extra = (int)moved.size();
              Term nt;
              nt.mode = Mode::Exact;
              nt.factors = t.factors;
              Factor vfac = v1;
              vfac.deriv += extra;
              const int vi = (int)nt.factors.size();
              nt.factors.push_back(vfac);
              const SlotRef vslots[3] = {{vi, extra},        // the deltaGamma nabla
                                         {vi, extra + 1},    // internal 0
                                         {vi, extra + 2}};   // internal 1
              const SlotRef a_slot = vslots[dg.a_pos];
              const SlotRef s_slot = vslots[dg.s_pos];
              const SlotRef cp_slot = vslots[dg.cp_pos];
              std::vector<int> gone = {tau};
              for (int d : moved) gone.push_back(d);
              std::sort(gone.begin(), gone.end());
              auto translate = [&](SlotRef s) -> SlotRef {
                if (s.factor != (int)f) return s;
                if (s.slot == tau) return a_slot;          // a's attachment
                if (s.slot == c) return s_slot;            // s's attachment
                for (size_t i2 = 0; i2 < moved.size(); ++i2)
                  if (s.slot == moved[i2]) return {vi, (int)i2};
                int shift = 0;
                for (int g2 : gone)
                  if (g2 < s.slot) ++shift;
                return {(int)f, s.slot - shift};
              };
              for (const Edge& e : t.edges)
                nt.edges.push_back({translate(e.a), translate(e.b)});
              for (const SlotRef& s : t.free) nt.free.push_back(translate(s));
              nt.factors[f].deriv -= 1 + extra;
              int shift_c = 0;
              for (int g2 : gone)
                if (g2 < c) ++shift_c;
              nt.edges.push_back({{(int)f, c - shift_c}, cp_slot});
              nt.validate();
              out.add(nt, -entry.coeff * DimensionCoefficient(dg.sign) *
                              DimensionCoefficient::rational(1, 2));
            }
          }
        }
      }
    }
  }
  return out;
}

LinearCombination metric_variation(const LinearCombination& lc, const std::string& v_label) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(metric_variation(e.term, v_label), e.coeff);
  return out;
}

}  // namespace invforge
