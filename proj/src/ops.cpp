#include "invforge/ops.hpp"

#include <algorithm>

#include "invforge/flatten.hpp"

namespace invforge {

namespace {

bool is_upsilon(const Factor& f, const std::string& label) {
  return f.kind == FactorKind::FunctionJet && f.label == label && f.deriv == 1;
}

}  // namespace

Term make_free(const Term& t, const Edge& contraction) {
  const Edge& e = contraction;
  if (e.a.factor != e.b.factor)
    throw ShapeError("make_free: not an internal contraction");
  bool da = t.is_deriv_slot(e.a), db = t.is_deriv_slot(e.b);
  if (!da && !db)
    throw ShapeError("make_free: contraction joins two internal (non-derivative) indices");
  SlotRef raised = da ? e.a : e.b;  // the erased nabla^a
  SlotRef lower = da ? e.b : e.a;
  Term out = t;
  int idx = out.edge_of(raised);
  if (idx < 0) throw SlotError("make_free: contraction not present");
  out.edges.erase(out.edges.begin() + idx);
  out.free.push_back(lower);
  out = remove_slot(out, raised);
  return out;
}

Term make_all_free(const Term& t) {
  Term cur = t;
  for (;;) {
    bool found = false;
    for (const Edge& e : cur.edges) {
      if (e.a.factor != e.b.factor) continue;
      cur = make_free(cur, e);
      found = true;
      break;
    }
    if (!found) return cur;
  }
}

Term restore_internal(const Term& t, int ordinal) {
  if (ordinal < 0 || ordinal >= (int)t.free.size())
    throw SlotError("restore_internal: no such free label");
  SlotRef target = t.free[ordinal];
  Term out = t;
  out.free.erase(out.free.begin() + ordinal);
  std::vector<SlotRef*> touched;
  for (SlotRef& s : out.free) touched.push_back(&s);
  SlotRef tgt = target;
  touched.push_back(&tgt);
  out = add_derivative(out, target.factor, false, touched);
  out.edges.push_back({{target.factor, 0}, tgt});
  return out;
}

Term restore_all_internal(const Term& t) {
  Term cur = t;
  while (!cur.free.empty()) cur = restore_internal(cur, (int)cur.free.size() - 1);
  return cur;
}

LinearCombination xdiv(const Term& t, int ordinal, XdivVariant variant,
                       const std::string& upsilon_label) {
  if (ordinal < 0 || ordinal >= (int)t.free.size())
    throw SlotError("xdiv: no such free label");
  SlotRef fs = t.free[ordinal];
  LinearCombination out;
  for (size_t f = 0; f < t.factors.size(); ++f) {
    if ((int)f == fs.factor) continue;
    if (variant == XdivVariant::UpsilonExcluding && is_upsilon(t.factors[f], upsilon_label))
      continue;
    Term nt = t;
    nt.free.erase(nt.free.begin() + ordinal);
    std::vector<SlotRef*> touched;
    for (SlotRef& s : nt.free) touched.push_back(&s);
    SlotRef tgt = fs;
    touched.push_back(&tgt);
    nt = add_derivative(nt, (int)f, false, touched);
    nt.edges.push_back({{(int)f, 0}, tgt});
    out.add(nt, DimensionCoefficient(1));
  }
  return out;  // empty (flagged by caller) when no target is allowed
}

LinearCombination xdiv(const LinearCombination& lc, int ordinal, XdivVariant variant,
                       const std::string& upsilon_label) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms())
    out.add(xdiv(e.term, ordinal, variant, upsilon_label), e.coeff);
  return out;
}

LinearCombination total_divergence(const Term& t, int ordinal) {
  LinearCombination out = xdiv(t, ordinal, XdivVariant::Standard);
  // own-factor hit
  SlotRef fs = t.free[ordinal];
  Term nt = t;
  nt.free.erase(nt.free.begin() + ordinal);
  std::vector<SlotRef*> touched;
  for (SlotRef& s : nt.free) touched.push_back(&s);
  SlotRef tgt = fs;
  touched.push_back(&tgt);
  nt = add_derivative(nt, fs.factor, false, touched);
  nt.edges.push_back({{fs.factor, 0}, tgt});
  out.add(nt, DimensionCoefficient(1));
  return out;
}

LinearCombination total_divergence(const LinearCombination& lc, int ordinal) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(total_divergence(e.term, ordinal), e.coeff);
  return out;
}

LinearCombination ric_to_omega(const Term& t, const std::string& omega_label, int expected_m) {
  int m = 0;
  for (const Factor& f : t.factors)
    if (f.kind == FactorKind::Ricci || f.kind == FactorKind::ScalarR) ++m;
  if (expected_m >= 0 && m != expected_m)
    throw CountError("ric_to_omega: found " + std::to_string(m) +
                     " Ricci/scalar factors, expected " + std::to_string(expected_m));
  Term cur = t;
  DimensionCoefficient coeff(1);
  for (size_t f = 0; f < cur.factors.size(); ++f) {
    const Factor fc = cur.factors[f];
    if (fc.kind == FactorKind::Ricci) {
      // nabla^(p)Ric_ij -> -nabla^(p+2)_{..ij} Omega: internal slots become
      // the two innermost derivative slots (same positions, new kind)
      cur.factors[f] = {FactorKind::FunctionJet, fc.deriv + 2, omega_label};
      coeff = -coeff;
    } else if (fc.kind == FactorKind::ScalarR) {
      // R -> -2 Delta Omega (with the derivatives carried outside)
      Term nt = cur;
      nt.factors[f] = {FactorKind::FunctionJet, fc.deriv + 2, omega_label};
      nt.edges.push_back({{(int)f, fc.deriv}, {(int)f, fc.deriv + 1}});
      cur = nt;
      coeff = DimensionCoefficient(-2) * coeff;
    }
  }
  cur.validate();
  return LinearCombination::of(cur, coeff);
}

LinearCombination ric_to_omega(const LinearCombination& lc, const std::string& omega_label,
                               int expected_m) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms())
    out.add(ric_to_omega(e.term, omega_label, expected_m), e.coeff);
  return out;
}

// ---------------------------------------------------------------------------
// Weylify / Riccify

namespace {

struct UpsContacts {
  // per factor: list of (own slot, upsilon factor index)
  std::vector<std::vector<std::pair<SlotRef, int>>> contacts;
  std::vector<char> is_ups;
};

UpsContacts scan_upsilon(const Term& t, const std::string& ups) {
  UpsContacts u;
  u.contacts.resize(t.factors.size());
  u.is_ups.resize(t.factors.size(), 0);
  for (size_t f = 0; f < t.factors.size(); ++f)
    if (is_upsilon(t.factors[f], ups)) u.is_ups[f] = 1;
  for (const Edge& e : t.edges) {
    bool ua = u.is_ups[e.a.factor], ub = u.is_ups[e.b.factor];
    if (ua && ub) throw FormError("upsilon factors contracting each other");
    if (ua) u.contacts[e.b.factor].push_back({e.b, e.a.factor});
    if (ub) u.contacts[e.a.factor].push_back({e.a, e.b.factor});
  }
  for (const SlotRef& s : t.free)
    if (u.is_ups[s.factor]) throw FormError("free index on an upsilon factor");
  return u;
}

// turns the contact (slot on factor f, upsilon factor uf) into an internal
// contraction: the upsilon factor is deleted and a new derivative slot on f
// pairs against the slot
Term contact_to_internal(const Term& t, SlotRef slot, int uf) {
  Term out = t;
  // drop the contact edge
  int e = out.edge_of(slot);
  out.edges.erase(out.edges.begin() + e);
  std::vector<SlotRef*> touched = {&slot};
  out = add_derivative(out, slot.factor, false, touched);
  out.edges.push_back({{slot.factor, 0}, slot});
  out = remove_factor(out, uf);
  return out;
}

int count_within(const Term& t, int f) {
  int c = 0;
  for (const Edge& e : t.edges)
    if (e.a.factor == f && e.b.factor == f) ++c;
  return c;
}

}  // namespace

LinearCombination weylify(const Term& t, const UpsilonOptions& opt) {
  UpsContacts u = scan_upsilon(t, opt.upsilon_label);
  DimensionCoefficient coeff(1);
  DimensionCoefficient n = DimensionCoefficient::n();
  Term cur = t;

  // per-factor form checks and the (5.2)-type coefficient on the original term
  for (size_t f = 0; f < t.factors.size(); ++f) {
    const Factor& fc = t.factors[f];
    if (u.is_ups[f]) continue;
    switch (fc.kind) {
      case FactorKind::Riemann: {
        bool internal_hit = false;
        for (auto& [slot, uf] : u.contacts[f])
          if (slot.slot >= fc.deriv) internal_hit = true;
        if (internal_hit)
          coeff = coeff * ((n - DimensionCoefficient(2)) / (n - DimensionCoefficient(3)));
        break;
      }
      case FactorKind::FunctionJet: {
        if (label_family(fc.label) != opt.psi_family)
          throw FormError("weylify: unexpected function family " + fc.label);
        if (fc.deriv == 1 && u.contacts[f].size() != 1)
          throw FormError("weylify: 1-jet not contracted against an upsilon factor");
        if (fc.deriv == 0) throw FormError("weylify: underived function factor");
        break;
      }
      default: throw FormError("weylify: factor kind outside form (5.9)");
    }
  }

  // realize: convert contacts to internal contractions one at a time (factor
  // indices shift as upsilon factors disappear), then change kinds
  // Work on a copy where we process contacts by locating them fresh each time.
  for (;;) {
    UpsContacts cu = scan_upsilon(cur, opt.upsilon_label);
    bool any = false;
    for (size_t f = 0; f < cur.factors.size() && !any; ++f)
      if (!cu.contacts[f].empty()) {
        auto [slot, uf] = cu.contacts[f][0];
        cur = contact_to_internal(cur, slot, uf);
        any = true;
      }
    if (!any) break;
  }
  // leftover upsilon factors must not exist (all were contracted somewhere)
  for (const Factor& f : cur.factors)
    if (is_upsilon(f, opt.upsilon_label))
      throw FormError("weylify: dangling upsilon factor");

  // kind changes; jets map their two innermost lower derivative slots to the
  // Schouten internal block
  for (size_t f = 0; f < cur.factors.size(); ++f) {
    const Factor fc = cur.factors[f];
    if (fc.kind == FactorKind::Riemann) {
      cur.factors[f] = {FactorKind::Weyl, fc.deriv, ""};
    } else if (fc.kind == FactorKind::FunctionJet) {
      if (fc.deriv < 2) throw FormError("weylify: jet too short for a Schouten block");
      int m = fc.deriv - 2;
      // choose two lower slots for the internal block: prefer slots NOT in
      // within-factor contractions so upsilon-made contractions stay raised
      std::vector<int> within;
      for (const Edge& e : cur.edges)
        if (e.a.factor == (int)f && e.b.factor == (int)f) {
          within.push_back(e.a.slot);
          within.push_back(e.b.slot);
        }
      std::vector<int> pick;
      for (int s = fc.deriv - 1; s >= 0 && (int)pick.size() < 2; --s)
        if (std::find(within.begin(), within.end(), s) == within.end()) pick.push_back(s);
      for (int s = fc.deriv - 1; s >= 0 && (int)pick.size() < 2; --s)
        if (std::find(pick.begin(), pick.end(), s) == pick.end()) pick.push_back(s);
      if (pick.size() < 2) throw FormError("weylify: jet too short for Schouten block");
      std::sort(pick.begin(), pick.end());
      // remap: picked slots become internal (m, m+1); others renumber in order
      Term nt = cur;
      nt.factors[f] = {FactorKind::Schouten, m, ""};
      auto remap = [&](SlotRef& s) {
        if (s.factor != (int)f) return;
        if (s.slot == pick[0]) {
          s.slot = m;
          return;
        }
        if (s.slot == pick[1]) {
          s.slot = m + 1;
          return;
        }
        int below = 0;
        for (int p : pick)
          if (p < s.slot) ++below;
        s.slot -= below;
      };
      for (Edge& e : nt.edges) {
        remap(e.a);
        remap(e.b);
      }
      for (SlotRef& s : nt.free) remap(s);
      cur = nt;
    }
  }

  // Schouten factors whose internal block self-contracts are P^a_a factors
  // (this covers both nabla psi nabla ups -> P^a_a and Delta psi -> P^a_a)
  for (size_t f = 0; f < cur.factors.size(); ++f) {
    const Factor fc = cur.factors[f];
    if (fc.kind != FactorKind::Schouten) continue;
    int e = -1;
    for (size_t i = 0; i < cur.edges.size(); ++i) {
      const Edge& ed = cur.edges[i];
      if (ed.a.factor == (int)f && ed.b.factor == (int)f && !cur.is_deriv_slot(ed.a) &&
          !cur.is_deriv_slot(ed.b))
        e = (int)i;
    }
    if (e < 0) continue;
    Term nt = cur;
    nt.edges.erase(nt.edges.begin() + e);
    nt.factors[f] = {FactorKind::TracedSchouten, fc.deriv, ""};
    cur = nt;
  }
  cur.validate();
  return LinearCombination::of(cur, coeff);
}

LinearCombination weylify(const LinearCombination& lc, const UpsilonOptions& opt) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(weylify(e.term, opt), e.coeff);
  return out;
}

namespace {

// shared by riccify / riccify''
LinearCombination riccify_impl(const Term& t, const UpsilonOptions& opt, bool dprime) {
  UpsContacts u = scan_upsilon(t, opt.upsilon_label);
  DimensionCoefficient coeff(1);
  // form checks on the original term
  for (size_t f = 0; f < t.factors.size(); ++f) {
    const Factor& fc = t.factors[f];
    if (u.is_ups[f]) continue;
    if (fc.kind == FactorKind::Riemann) continue;
    if (fc.kind != FactorKind::FunctionJet)
      throw FormError("riccify: factor kind outside form (5.13)");
    std::string fam = label_family(fc.label);
    if (fam == opt.omega_family) {
      if (u.contacts[f].empty())
        throw FormError("riccify: Omega factor with no upsilon contact");
      if (fc.deriv == 1 && u.contacts[f].size() != 1)
        throw FormError("riccify: 1-jet Omega not exactly once upsilon-contracted");
    } else if (fam == opt.psi_family) {
      if (fc.deriv < 2 && u.contacts[f].empty())
        throw FormError("riccify: psi 1-jet not upsilon-contracted");
    } else {
      throw FormError("riccify: unexpected function family " + fc.label);
    }
  }

  Term cur = t;
  // consume the special pairs first:
  //   standard: nabla Omega nabla ups -> R/2
  //   dprime:   one ups-contact of EVERY Omega jet is consumed with the jet
  //             becoming nabla^(p-1) R
  if (dprime) {
    for (;;) {
      UpsContacts cu = scan_upsilon(cur, opt.upsilon_label);
      int target = -1;
      for (size_t f = 0; f < cur.factors.size(); ++f)
        if (cur.factors[f].kind == FactorKind::FunctionJet &&
            label_family(cur.factors[f].label) == opt.omega_family) {
          target = (int)f;
          break;
        }
      if (target < 0) break;
      if (cu.contacts[target].empty())
        throw FormError("riccify'': Omega factor lost its upsilon contact");
      auto [slot, uf] = cu.contacts[target][0];
      // delete the ups factor, the contact edge, and the contacted slot;
      // remaining jet(p-1) becomes nabla^(p-1) R
      Term nt = cur;
      int e = nt.edge_of(slot);
      nt.edges.erase(nt.edges.begin() + e);
      nt = remove_slot(nt, slot);
      int p1 = nt.factors[slot.factor].deriv;
      nt.factors[slot.factor] = {FactorKind::ScalarR, p1, ""};
      nt = remove_factor(nt, uf);
      cur = nt;
    }
  } else {
    for (;;) {
      UpsContacts cu = scan_upsilon(cur, opt.upsilon_label);
      int target = -1;
      for (size_t f = 0; f < cur.factors.size(); ++f)
        if (cur.factors[f].kind == FactorKind::FunctionJet && cur.factors[f].deriv == 1 &&
            label_family(cur.factors[f].label) == opt.omega_family &&
            !cu.contacts[f].empty()) {
          target = (int)f;
          break;
        }
      if (target < 0) break;
      auto [slot, uf] = cu.contacts[target][0];
      Term nt = cur;
      int e = nt.edge_of(slot);
      nt.edges.erase(nt.edges.begin() + e);
      nt = remove_slot(nt, slot);
      nt.factors[slot.factor] = {FactorKind::ScalarR, 0, ""};
      nt = remove_factor(nt, uf);
      cur = nt;
      coeff = coeff * DimensionCoefficient::rational(1, 2);
    }
  }

  // all remaining contacts become internal contractions
  for (;;) {
    UpsContacts cu = scan_upsilon(cur, opt.upsilon_label);
    bool any = false;
    for (size_t f = 0; f < cur.factors.size() && !any; ++f)
      if (!cu.contacts[f].empty()) {
        auto [slot, uf] = cu.contacts[f][0];
        cur = contact_to_internal(cur, slot, uf);
        any = true;
      }
    if (!any) break;
  }
  for (const Factor& f : cur.factors)
    if (is_upsilon(f, opt.upsilon_label)) throw FormError("riccify: dangling upsilon factor");

  // Omega jets (standard riccify) become Ricci factors: the two innermost
  // non-contracted lower slots form the internal block
  for (size_t f = 0; f < cur.factors.size(); ++f) {
    const Factor fc = cur.factors[f];
    if (fc.kind != FactorKind::FunctionJet) continue;
    if (label_family(fc.label) != opt.omega_family) continue;
    if (fc.deriv < 2) throw FormError("riccify: Omega jet too short");
    int m = fc.deriv - 2;
    std::vector<int> within;
    for (const Edge& e : cur.edges)
      if (e.a.factor == (int)f && e.b.factor == (int)f) {
        within.push_back(e.a.slot);
        within.push_back(e.b.slot);
      }
    std::vector<int> pick;
    for (int s = fc.deriv - 1; s >= 0 && (int)pick.size() < 2; --s)
      if (std::find(within.begin(), within.end(), s) == within.end()) pick.push_back(s);
    for (int s = fc.deriv - 1; s >= 0 && (int)pick.size() < 2; --s)
      if (std::find(pick.begin(), pick.end(), s) == pick.end()) pick.push_back(s);
    if (pick.size() < 2) throw FormError("riccify: Omega jet block unavailable");
    std::sort(pick.begin(), pick.end());
    Term nt = cur;
    nt.factors[f] = {FactorKind::Ricci, m, ""};
    auto remap = [&](SlotRef& s) {
      if (s.factor != (int)f) return;
      if (s.slot == pick[0]) {
        s.slot = m;
        return;
      }
      if (s.slot == pick[1]) {
        s.slot = m + 1;
        return;
      }
      int below = 0;
      for (int p : pick)
        if (p < s.slot) ++below;
      s.slot -= below;
    };
    for (Edge& e : nt.edges) {
      remap(e.a);
      remap(e.b);
    }
    for (SlotRef& s : nt.free) remap(s);
    cur = nt;
  }
  cur.validate();
  return LinearCombination::of(cur, coeff);
}

}  // namespace

LinearCombination riccify(const Term& t, const UpsilonOptions& opt) {
  return riccify_impl(t, opt, false);
}

LinearCombination riccify(const LinearCombination& lc, const UpsilonOptions& opt) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(riccify_impl(e.term, opt, false), e.coeff);
  return out;
}

LinearCombination riccify_dprime(const Term& t, const UpsilonOptions& opt) {
  return riccify_impl(t, opt, true);
}

LinearCombination riccify_dprime(const LinearCombination& lc, const UpsilonOptions& opt) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(riccify_impl(e.term, opt, true), e.coeff);
  return out;
}

// ---------------------------------------------------------------------------

LinearCombination erase(const Term& t, const std::string& phi_label) {
  int uf = -1;
  for (size_t f = 0; f < t.factors.size(); ++f)
    if (t.factors[f].kind == FactorKind::FunctionJet && t.factors[f].label == phi_label) {
      if (t.factors[f].deriv != 1)
        throw PreconditionError("erase: " + phi_label + " is not a 1-jet");
      uf = (int)f;
    }
  if (uf < 0) throw PreconditionError("erase: no factor nabla " + phi_label);
  SlotRef own{uf, 0};
  int e = t.edge_of(own);
  if (e < 0) throw PreconditionError("erase: nabla " + phi_label + " is not contracted");
  SlotRef partner = t.edges[e].a == own ? t.edges[e].b : t.edges[e].a;
  if (!t.is_deriv_slot(partner))
    throw PreconditionError("erase: nabla " + phi_label +
                            " contracts an internal (non-derivative) index");
  Term out = t;
  out.edges.erase(out.edges.begin() + e);
  out = remove_slot(out, partner);
  out = remove_factor(out, uf);
  return LinearCombination::of(out);
}

LinearCombination erase(const LinearCombination& lc, const std::string& phi_label) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(erase(e.term, phi_label), e.coeff);
  return out;
}

LinearCombination sub_omega(const Term& t, const std::string& omega_label) {
  Counts c = counts(t);
  int internal = 0;
  for (const Edge& e : t.edges)
    if (e.a.factor == e.b.factor) ++internal;
  internal += c.q + 2 * c.alpha;
  if (internal != 1)
    throw CountError("sub_omega: term must carry exactly one internal contraction, found " +
                     std::to_string(internal));
  if (c.q == 1) {
    // D1 branch: the Ricci factor becomes -nabla^(p+2) omega
    Term out = t;
    for (size_t f = 0; f < out.factors.size(); ++f)
      if (out.factors[f].kind == FactorKind::Ricci)
        out.factors[f] = {FactorKind::FunctionJet, out.factors[f].deriv + 2, omega_label};
    out.validate();
    return LinearCombination::of(out, DimensionCoefficient(-1));
  }
  // D2 branch: free the (nabla^s, _s) pair, then contract a new nabla omega
  for (const Edge& e : t.edges) {
    if (e.a.factor != e.b.factor) continue;
    Term freed = make_free(t, e);
    int ord = (int)freed.free.size() - 1;
    Term out = freed;
    out.factors.push_back({FactorKind::FunctionJet, 1, omega_label});
    SlotRef tgt = out.free[ord];
    out.free.erase(out.free.begin() + ord);
    out.edges.push_back({{(int)out.factors.size() - 1, 0}, tgt});
    out.validate();
    return LinearCombination::of(out);
  }
  throw CountError("sub_omega: no internal contraction found");
}

LinearCombination sub_omega(const LinearCombination& lc, const std::string& omega_label) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) out.add(sub_omega(e.term, omega_label), e.coeff);
  return out;
}

Term inflate_upsilon(const Term& t, const std::string& upsilon_label) {
  for (const Factor& f : t.factors)
    if (f.kind == FactorKind::Ricci || f.kind == FactorKind::ScalarR)
      throw ShapeError("inflate_upsilon: Ricci/scalar factors not allowed");
  Term cur = t;
  for (;;) {
    bool any = false;
    for (const Edge& e : cur.edges) {
      if (e.a.factor != e.b.factor) continue;
      bool da = cur.is_deriv_slot(e.a), db = cur.is_deriv_slot(e.b);
      if (!da && !db)
        throw ShapeError("inflate_upsilon: internal contraction not of (nabla^a, _a) shape");
      Term freed = make_free(cur, e);
      int ord = (int)freed.free.size() - 1;
      SlotRef tgt = freed.free[ord];
      freed.free.erase(freed.free.begin() + ord);
      freed.factors.push_back({FactorKind::FunctionJet, 1, upsilon_label});
      freed.edges.push_back({{(int)freed.factors.size() - 1, 0}, tgt});
      cur = freed;
      any = true;
      break;
    }
    if (!any) break;
  }
  cur.validate();
  return cur;
}

LinearCombination inflate_upsilon(const LinearCombination& lc, const std::string& upsilon_label) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms())
    out.add(inflate_upsilon(e.term, upsilon_label), e.coeff);
  return out;
}

LinearCombination polarize(const LinearCombination& lc, const std::string& base_label,
                           const std::vector<std::string>& labels) {
  const int d = (int)labels.size();
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) {
    std::vector<int> positions;
    for (size_t f = 0; f < e.term.factors.size(); ++f)
      if (e.term.factors[f].kind == FactorKind::FunctionJet &&
          e.term.factors[f].label == base_label)
        positions.push_back((int)f);
    if ((int)positions.size() != d)
      throw CountError("polarize: term does not carry " + std::to_string(d) + " copies of " +
                       base_label);
    std::vector<int> perm(d);
    for (int i = 0; i < d; ++i) perm[i] = i;
    DimensionCoefficient inv_fact = DimensionCoefficient(1);
    for (int i = 2; i <= d; ++i) inv_fact = inv_fact / DimensionCoefficient(i);
    do {
      Term nt = e.term;
      for (int i = 0; i < d; ++i) nt.factors[positions[i]].label = labels[perm[i]];
      out.add(nt, e.coeff * inv_fact);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

LinearCombination identify_labels(const LinearCombination& lc,
                                  const std::vector<std::string>& labels,
                                  const std::string& base_label) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) {
    Term nt = e.term;
    for (Factor& f : nt.factors)
      if (f.kind == FactorKind::FunctionJet &&
          std::find(labels.begin(), labels.end(), f.label) != labels.end())
        f.label = base_label;
    out.add(nt, e.coeff);
  }
  return out;
}

}  // namespace invforge
