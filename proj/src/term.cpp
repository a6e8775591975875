#include "invforge/term.hpp"

#include "invforge/combination.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace invforge {

const char* kind_name(FactorKind k) {
  switch (k) {
    case FactorKind::Riemann: return "R";
    case FactorKind::Ricci: return "Ric";
    case FactorKind::ScalarR: return "Scal";
    case FactorKind::Weyl: return "W";
    case FactorKind::Schouten: return "P";
    case FactorKind::TracedSchouten: return "TrP";
    case FactorKind::Cotton: return "Cot";
    case FactorKind::Metric: return "g";
    case FactorKind::FunctionJet: return "f";
    case FactorKind::SymField: return "v";
  }
  return "?";
}

int kind_arity(FactorKind k) {
  switch (k) {
    case FactorKind::Riemann:
    case FactorKind::Weyl: return 4;
    case FactorKind::Ricci:
    case FactorKind::Schouten:
    case FactorKind::Metric:
    case FactorKind::SymField: return 2;
    case FactorKind::Cotton: return 3;
    case FactorKind::ScalarR:
    case FactorKind::TracedSchouten:
    case FactorKind::FunctionJet: return 0;
  }
  return 0;
}

int kind_scale(FactorKind k) {
  switch (k) {
    case FactorKind::Riemann:
    case FactorKind::Weyl:
    case FactorKind::Metric:
    case FactorKind::SymField: return 2;
    case FactorKind::ScalarR:
    case FactorKind::TracedSchouten: return -2;
    default: return 0;
  }
}

bool kind_is_curvature(FactorKind k) {
  switch (k) {
    case FactorKind::FunctionJet:
    case FactorKind::Metric:
    case FactorKind::SymField: return false;
    default: return true;
  }
}

void Term::validate() const {
  std::vector<std::vector<int>> used(factors.size());
  for (size_t f = 0; f < factors.size(); ++f) used[f].assign(factors[f].slot_count(), 0);
  auto touch = [&](const SlotRef& s, const char* what) {
    if (s.factor < 0 || s.factor >= (int)factors.size() || s.slot < 0 ||
        s.slot >= factors[s.factor].slot_count())
      throw StructuralError(std::string("slot reference out of range in ") + what);
    if (++used[s.factor][s.slot] > 1)
      throw StructuralError("slot used more than once in pairing/free lists");
  };
  for (const Edge& e : edges) {
    touch(e.a, "edge");
    touch(e.b, "edge");
  }
  for (const SlotRef& s : free) touch(s, "free list");
  for (size_t f = 0; f < factors.size(); ++f)
    for (int s = 0; s < factors[f].slot_count(); ++s)
      if (!used[f][s])
        throw StructuralError("unpaired non-free slot (factor " + std::to_string(f) +
                              ", slot " + std::to_string(s) + ")");
}

int Term::edge_of(const SlotRef& s) const {
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].a == s || edges[i].b == s) return (int)i;
  return -1;
}

int Term::free_of(const SlotRef& s) const {
  for (size_t i = 0; i < free.size(); ++i)
    if (free[i] == s) return (int)i;
  return -1;
}

SlotRef Term::partner(const SlotRef& s) const {
  int e = edge_of(s);
  if (e < 0) throw SlotError("slot has no pairing partner");
  return edges[e].a == s ? edges[e].b : edges[e].a;
}

std::string Term::raw_key() const {
  std::ostringstream os;
  os << (mode == Mode::Exact ? "E" : "G");
  for (const Factor& f : factors)
    os << '|' << kind_name(f.kind) << ':' << f.deriv << ':' << f.label;
  os << "#";
  for (const Edge& e : edges)
    os << e.a.factor << '.' << e.a.slot << '-' << e.b.factor << '.' << e.b.slot << ';';
  os << "#";
  for (const SlotRef& s : free) os << s.factor << '.' << s.slot << ';';
  return os.str();
}

int weight(const Term& t) {
  int w = 0;
  for (const Factor& f : t.factors) w += kind_scale(f.kind);
  w -= 2 * (int)t.edges.size();
  w -= (int)t.free.size();
  return w;
}

std::string label_family(const std::string& label) {
  size_t i = 0;
  while (i < label.size() && std::isalpha((unsigned char)label[i])) ++i;
  return label.substr(0, i);
}

Counts counts(const Term& t) {
  Counts c;
  c.length = t.length();
  c.arity = t.arity();
  c.weight = weight(t);
  std::vector<int> internal(t.factors.size(), 0);
  for (const Edge& e : t.edges)
    if (e.a.factor == e.b.factor) ++internal[e.a.factor];
  for (size_t f = 0; f < t.factors.size(); ++f) {
    const Factor& fc = t.factors[f];
    switch (fc.kind) {
      case FactorKind::Weyl: c.deltaW += internal[f]; break;
      case FactorKind::Schouten: c.deltaP += internal[f]; break;
      case FactorKind::TracedSchouten: c.deltaP += 1 + internal[f]; break;
      case FactorKind::Riemann: c.deltaR += internal[f]; break;
      case FactorKind::Ricci:
        c.deltaRic += 1 + internal[f];
        ++c.q;
        break;
      case FactorKind::ScalarR:
        c.deltaRic += 2 + internal[f];
        ++c.alpha;
        if (fc.deriv == 0) ++c.deltaAbs;
        break;
      case FactorKind::FunctionJet:
        c.deltaJet += internal[f];
        if (label_family(fc.label) == "psi") {
          c.deltaPsi += internal[f];
          if (fc.deriv == 2 && internal[f] == 1) ++c.deltaAbs;  // a Delta psi factor
        }
        break;
      default: break;
    }
  }
  return c;
}

const char* term_class_name(TermClass c) {
  switch (c) {
    case TermClass::Target: return "target";
    case TermClass::Contributor: return "contributor";
    case TermClass::Cumbersome1: return "1-cumbersome";
    case TermClass::Cumbersome2: return "2-cumbersome";
    case TermClass::None: return "none";
  }
  return "?";
}

TermClass classify(const Term& t, int mu) {
  Counts c = counts(t);
  int qtot = c.q + c.alpha;  // factors nabla^(p)Ric or R
  int delta = c.delta();
  if (qtot == 0) {
    if (delta == mu) return TermClass::Target;
    if (delta > mu) return TermClass::Contributor;
    return TermClass::None;
  }
  if (delta > mu) return TermClass::Cumbersome1;
  if (delta == mu) {
    // 2-cumbersome: every Ricci factor carries a raised derivative hitting
    // one of its own internal indices
    if (c.alpha > 0) return TermClass::None;
    for (size_t f = 0; f < t.factors.size(); ++f) {
      if (t.factors[f].kind != FactorKind::Ricci) continue;
      bool hit = false;
      for (const Edge& e : t.edges) {
        if (e.a.factor != (int)f || e.b.factor != (int)f) continue;
        bool da = t.is_deriv_slot(e.a), db = t.is_deriv_slot(e.b);
        if (da != db) hit = true;  // derivative-against-internal contraction
      }
      if (!hit) return TermClass::None;
    }
    return TermClass::Cumbersome2;
  }
  return TermClass::None;
}

Term single_factor_term(Factor f, Mode mode) {
  Term t;
  t.mode = mode;
  int n = f.slot_count();
  t.factors.push_back(std::move(f));
  for (int s = 0; s < n; ++s) t.free.push_back({0, s});
  return t;
}

Term add_derivative(const Term& t, int factor, bool innermost, std::vector<SlotRef*> touch) {
  Term out = t;
  Factor& f = out.factors[factor];
  int pos = innermost ? f.deriv : 0;  // new derivative slot position
  ++f.deriv;
  auto remap = [&](SlotRef& s) {
    if (s.factor == factor && s.slot >= pos) ++s.slot;
  };
  for (Edge& e : out.edges) {
    remap(e.a);
    remap(e.b);
  }
  for (SlotRef& s : out.free) remap(s);
  for (SlotRef* s : touch) remap(*s);
  // caller pairs or frees the new slot {factor, pos}
  return out;
}

Term remove_slot(const Term& t, SlotRef victim, std::vector<SlotRef*> touch) {
  Term out = t;
  Factor& f = out.factors[victim.factor];
  if (victim.slot >= f.slot_count()) throw SlotError("remove_slot: slot out of range");
  if (victim.slot >= f.deriv)
    throw SlotError("remove_slot: only derivative slots can be removed");
  --f.deriv;
  auto remap = [&](SlotRef& s) {
    if (s.factor == victim.factor && s.slot > victim.slot) --s.slot;
  };
  for (Edge& e : out.edges) {
    if (e.a == victim || e.b == victim) throw SlotError("remove_slot: slot still paired");
    remap(e.a);
    remap(e.b);
  }
  for (SlotRef& s : out.free) {
    if (s == victim) throw SlotError("remove_slot: slot still free-listed");
    remap(s);
  }
  for (SlotRef* s : touch) remap(*s);
  return out;
}

Term remove_factor(const Term& t, int factor) {
  Term out;
  out.mode = t.mode;
  for (size_t f = 0; f < t.factors.size(); ++f)
    if ((int)f != factor) out.factors.push_back(t.factors[f]);
  auto remap = [&](SlotRef s) {
    if (s.factor == factor) throw SlotError("remove_factor: factor still referenced");
    if (s.factor > factor) --s.factor;
    return s;
  };
  for (const Edge& e : t.edges) out.edges.push_back({remap(e.a), remap(e.b)});
  for (const SlotRef& s : t.free) out.free.push_back(remap(s));
  return out;
}

// ---------------------------------------------------------------------------
// canonicalization

namespace {

struct Variant {
  int perm[4];  // canonical internal position -> original internal position
  int sign;
  int arity;
};

const std::vector<Variant>& variants_for(FactorKind k) {
  static const std::vector<Variant> riem = {
      {{0, 1, 2, 3}, +1, 4}, {{1, 0, 2, 3}, -1, 4}, {{0, 1, 3, 2}, -1, 4},
      {{1, 0, 3, 2}, +1, 4}, {{2, 3, 0, 1}, +1, 4}, {{3, 2, 0, 1}, -1, 4},
      {{2, 3, 1, 0}, -1, 4}, {{3, 2, 1, 0}, +1, 4}};
  static const std::vector<Variant> sym2 = {{{0, 1, -1, -1}, +1, 2}, {{1, 0, -1, -1}, +1, 2}};
  static const std::vector<Variant> cotton = {{{0, 1, 2, -1}, +1, 3}, {{0, 2, 1, -1}, -1, 3}};
  static const std::vector<Variant> none0 = {{{-1, -1, -1, -1}, +1, 0}};
  switch (k) {
    case FactorKind::Riemann:
    case FactorKind::Weyl: return riem;
    case FactorKind::Ricci:
    case FactorKind::Schouten:
    case FactorKind::Metric:
    case FactorKind::SymField: return sym2;
    case FactorKind::Cotton: return cotton;
    default: return none0;
  }
}

struct FactorDesc {
  int kind;
  int deriv;
  std::string label;
  bool operator<(const FactorDesc& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (deriv != o.deriv) return deriv < o.deriv;
    return label < o.label;
  }
  bool operator==(const FactorDesc& o) const {
    return kind == o.kind && deriv == o.deriv && label == o.label;
  }
};

}  // namespace

namespace {
std::mutex g_canon_mutex;
std::unordered_map<std::string, Canonical> g_canon_cache;
}  // namespace

Canonical canonicalize_uncached(const Term& t);

Canonical canonicalize(const Term& t) {
  std::string rk = t.raw_key();
  {
    std::lock_guard<std::mutex> lock(g_canon_mutex);
    auto it = g_canon_cache.find(rk);
    if (it != g_canon_cache.end()) return it->second;
  }
  Canonical c = canonicalize_uncached(t);
  std::lock_guard<std::mutex> lock(g_canon_mutex);
  if (g_canon_cache.size() > 4000000) g_canon_cache.clear();
  g_canon_cache.emplace(std::move(rk), c);
  return c;
}

Canonical canonicalize_uncached(const Term& t) {
  t.validate();
  const size_t nf = t.factors.size();

  // order factors by descriptor; identical descriptors form permutable groups
  std::vector<FactorDesc> desc(nf);
  for (size_t f = 0; f < nf; ++f)
    desc[f] = {(int)t.factors[f].kind, t.factors[f].deriv, t.factors[f].label};
  std::vector<int> base(nf);
  for (size_t f = 0; f < nf; ++f) base[f] = (int)f;
  std::stable_sort(base.begin(), base.end(), [&](int a, int b) { return desc[a] < desc[b]; });
  std::vector<std::pair<int, int>> groups;  // [start, end) in base with equal descriptor
  for (size_t i = 0; i < nf;) {
    size_t j = i + 1;
    while (j < nf && desc[base[i]] == desc[base[j]]) ++j;
    groups.push_back({(int)i, (int)j});
    i = j;
  }

  const bool graded = t.mode == Mode::Graded;

  // class id of (factor, slot) under a variant: derivative block first
  auto slot_class = [&](const Factor& fac, int slot, const Variant& v) -> int {
    if (slot < fac.deriv) return graded ? 0 : 1 + slot;
    int p = slot - fac.deriv;
    int q = 0;
    while (v.perm[q] != p) ++q;
    return (graded ? 1 : 1 + fac.deriv) + q;
  };

  std::vector<int> best_enc;
  int best_sign = 0;
  bool vanishes = false;
  std::vector<int> best_order;
  std::vector<int> best_variant;

  std::vector<int> order = base;
  std::vector<int> variant_idx(nf, 0);
  std::vector<int> pos_of(nf);  // factor -> position in current order

  std::vector<int> enc;
  enc.reserve(16 + 4 * t.edges.size());

  auto encode_current = [&]() {
    enc.clear();
    for (size_t p = 0; p < nf; ++p) {
      const FactorDesc& d = desc[order[p]];
      enc.push_back(d.kind);
      enc.push_back(d.deriv);
      for (char ch : d.label) enc.push_back((int)ch);
      enc.push_back(-1);
    }
    for (size_t f = 0; f < nf; ++f) pos_of[order[f]] = (int)f;
    std::vector<std::array<int, 4>> e4;
    e4.reserve(t.edges.size());
    for (const Edge& e : t.edges) {
      const Variant& va = variants_for(t.factors[e.a.factor].kind)[variant_idx[e.a.factor]];
      const Variant& vb = variants_for(t.factors[e.b.factor].kind)[variant_idx[e.b.factor]];
      int pa = pos_of[e.a.factor], ca = slot_class(t.factors[e.a.factor], e.a.slot, va);
      int pb = pos_of[e.b.factor], cb = slot_class(t.factors[e.b.factor], e.b.slot, vb);
      if (pb < pa || (pb == pa && cb < ca)) {
        std::swap(pa, pb);
        std::swap(ca, cb);
      }
      e4.push_back({pa, ca, pb, cb});
    }
    std::sort(e4.begin(), e4.end());
    for (auto& e : e4) {
      enc.push_back(e[0]);
      enc.push_back(e[1]);
      enc.push_back(e[2]);
      enc.push_back(e[3]);
    }
    enc.push_back(-2);
    for (const SlotRef& s : t.free) {
      const Variant& v = variants_for(t.factors[s.factor].kind)[variant_idx[s.factor]];
      enc.push_back(pos_of[s.factor]);
      enc.push_back(slot_class(t.factors[s.factor], s.slot, v));
    }
  };

  // iterate variant assignments (product over factors), then group permutations
  std::function<void(size_t, int)> run_variants = [&](size_t f, int sign) {
    if (f == nf) {
      encode_current();
      if (best_sign == 0 || enc < best_enc) {
        best_enc = enc;
        best_sign = sign;
        best_order = order;
        best_variant = variant_idx;
      } else if (enc == best_enc && sign != best_sign) {
        vanishes = true;
      }
      return;
    }
    const auto& vs = variants_for(t.factors[f].kind);
    for (size_t v = 0; v < vs.size(); ++v) {
      variant_idx[f] = (int)v;
      run_variants(f + 1, sign * vs[v].sign);
    }
  };

  std::function<void(size_t)> run_groups = [&](size_t g) {
    if (g == groups.size()) {
      run_variants(0, +1);
      return;
    }
    auto [lo, hi] = groups[g];
    if (hi - lo <= 1) {
      run_groups(g + 1);
      return;
    }
    std::vector<int> seg(order.begin() + lo, order.begin() + hi);
    std::sort(seg.begin(), seg.end());
    do {
      std::copy(seg.begin(), seg.end(), order.begin() + lo);
      run_groups(g + 1);
    } while (std::next_permutation(seg.begin(), seg.end()));
    std::copy(base.begin() + lo, base.begin() + hi, order.begin() + lo);
  };

  run_groups(0);

  Canonical out;
  if (vanishes) {
    out.sign = 0;
    out.key = "0";
    return out;
  }
  out.sign = best_sign;

  // rebuild the canonical representative from the winning choice
  Term rep;
  rep.mode = t.mode;
  for (size_t f = 0; f < nf; ++f) pos_of[best_order[f]] = (int)f;
  for (size_t p = 0; p < nf; ++p) rep.factors.push_back(t.factors[best_order[p]]);
  // slot map: original (factor, slot) -> canonical (pos, slot')
  auto map_slot = [&](const SlotRef& s) -> SlotRef {
    const Factor& fac = t.factors[s.factor];
    const Variant& v = variants_for(fac.kind)[best_variant[s.factor]];
    int pos = pos_of[s.factor];
    if (s.slot < fac.deriv) return {pos, s.slot};  // derivative positions fixed up below
    int p = s.slot - fac.deriv;
    int q = 0;
    while (v.perm[q] != p) ++q;
    return {pos, fac.deriv + q};
  };
  for (const Edge& e : t.edges) rep.edges.push_back({map_slot(e.a), map_slot(e.b)});
  for (const SlotRef& s : t.free) rep.free.push_back(map_slot(s));

  // per-factor renumbering of derivative slots (graded mode sorts them by
  // attachment so representatives are unique)
  std::vector<std::vector<int>> renum(nf);
  for (size_t f = 0; f < nf; ++f) {
    renum[f].resize(rep.factors[f].slot_count());
    for (size_t s = 0; s < renum[f].size(); ++s) renum[f][s] = (int)s;
  }
  if (graded) {
    struct Att {
      std::array<int, 3> d;
      int slot;
    };
    std::vector<std::vector<Att>> atts(nf);
    auto note = [&](const SlotRef& s, const SlotRef& other, bool from_edge, int ord) {
      if (s.slot < rep.factors[s.factor].deriv)
        atts[s.factor].push_back(
            {from_edge ? std::array<int, 3>{1, other.factor, other.slot}
                       : std::array<int, 3>{2, ord, 0},
             s.slot});
    };
    for (const Edge& e : rep.edges) {
      note(e.a, e.b, true, 0);
      note(e.b, e.a, true, 0);
    }
    for (size_t i = 0; i < rep.free.size(); ++i) note(rep.free[i], {}, false, (int)i);
    for (size_t f = 0; f < nf; ++f) {
      auto& v = atts[f];
      std::stable_sort(v.begin(), v.end(), [](const Att& x, const Att& y) { return x.d < y.d; });
      for (size_t k = 0; k < v.size(); ++k) renum[f][v[k].slot] = (int)k;
    }
    auto apply_renum = [&](SlotRef& s) { s.slot = renum[s.factor][s.slot]; };
    for (Edge& e : rep.edges) {
      apply_renum(e.a);
      apply_renum(e.b);
    }
    for (SlotRef& s : rep.free) apply_renum(s);
  }
  for (Edge& e : rep.edges)
    if (e.b < e.a) std::swap(e.a, e.b);
  std::sort(rep.edges.begin(), rep.edges.end(),
            [](const Edge& x, const Edge& y) { return x.a < y.a || (x.a == y.a && x.b < y.b); });

  out.term = rep;
  out.slot_map.resize(nf);
  for (size_t f = 0; f < nf; ++f) {
    out.slot_map[f].resize(t.factors[f].slot_count());
    for (int s = 0; s < t.factors[f].slot_count(); ++s) {
      SlotRef m = map_slot({(int)f, s});
      m.slot = renum[m.factor][m.slot];
      out.slot_map[f][s] = m;
    }
  }
  std::ostringstream os;
  for (int v : best_enc) os << v << ',';
  out.key = os.str();
  return out;
}

bool brute_force_equal(const Term& a, const Term& b, int* sign_out) {
  // exhaustive isomorphism search, independent of the canonical-key machinery
  if (a.factors.size() != b.factors.size() || a.free.size() != b.free.size() ||
      a.edges.size() != b.edges.size() || a.mode != b.mode)
    return false;
  Canonical ca = canonicalize(a);  // reuse only for the zero case
  Canonical cb = canonicalize(b);
  if (ca.sign == 0 || cb.sign == 0) {
    if (ca.sign == 0 && cb.sign == 0) {
      if (sign_out) *sign_out = 0;
      return true;
    }
    return false;
  }
  const size_t nf = a.factors.size();
  std::vector<int> perm(nf), used(nf, 0);
  std::function<bool(size_t)> place = [&](size_t f) -> bool {
    if (f == nf) {
      // try all variant choices on a mapped into b's labeling
      std::vector<const std::vector<Variant>*> vs(nf);
      std::vector<int> vi(nf, 0);
      for (size_t i = 0; i < nf; ++i) vs[i] = &variants_for(a.factors[i].kind);
      const bool graded = a.mode == Mode::Graded;
      std::function<bool(size_t, int)> go = [&](size_t i, int sign) -> bool {
        if (i == nf) {
          // build b-side multigraph signature and compare
          auto cls = [&](const Term& t, const SlotRef& s, const std::vector<int>* vidx,
                         const std::vector<int>* fmap) {
            int f2 = fmap ? (*fmap)[s.factor] : s.factor;
            const Factor& fac = t.factors[s.factor];
            int c;
            if (s.slot < fac.deriv)
              c = graded ? 0 : 1 + s.slot;
            else {
              int p = s.slot - fac.deriv;
              if (vidx) {
                const Variant& v = (*vs[s.factor])[(*vidx)[s.factor]];
                int q = 0;
                while (v.perm[q] != p) ++q;
                p = q;
              }
              c = (graded ? 1 : 1 + fac.deriv) + p;
            }
            return std::pair<int, int>(f2, c);
          };
          std::vector<std::array<int, 4>> ea, eb;
          for (const Edge& e : a.edges) {
            auto x = cls(a, e.a, &vi, &perm), y = cls(a, e.b, &vi, &perm);
            if (y < x) std::swap(x, y);
            ea.push_back({x.first, x.second, y.first, y.second});
          }
          for (const Edge& e : b.edges) {
            auto x = cls(b, e.a, nullptr, nullptr), y = cls(b, e.b, nullptr, nullptr);
            if (y < x) std::swap(x, y);
            eb.push_back({x.first, x.second, y.first, y.second});
          }
          std::sort(ea.begin(), ea.end());
          std::sort(eb.begin(), eb.end());
          if (ea != eb) return false;
          for (size_t k = 0; k < a.free.size(); ++k)
            if (cls(a, a.free[k], &vi, &perm) != cls(b, b.free[k], nullptr, nullptr))
              return false;
          if (sign_out) *sign_out = sign;
          return true;
        }
        for (size_t v = 0; v < vs[i]->size(); ++v) {
          vi[i] = (int)v;
          if (go(i + 1, sign * (*vs[i])[v].sign)) return true;
        }
        return false;
      };
      return go(0, +1);
    }
    for (size_t g = 0; g < nf; ++g) {
      if (used[g] || !(a.factors[f] == b.factors[g])) continue;
      used[g] = 1;
      perm[f] = (int)g;
      if (place(f + 1)) return true;
      used[g] = 0;
    }
    return false;
  };
  return place(0);
}

std::string to_display(const Term& t) {
  // name indices: shared letters per edge, i1..ik for free slots
  std::map<std::string, std::string> names;
  std::vector<std::vector<std::string>> idx(t.factors.size());
  for (size_t f = 0; f < t.factors.size(); ++f) idx[f].assign(t.factors[f].slot_count(), "?");
  const char* letters = "abcdefghjklmpqrstuwxyz";
  size_t next = 0;
  for (const Edge& e : t.edges) {
    std::string nm;
    if (next < 22)
      nm = std::string(1, letters[next++]);
    else
      nm = "e" + std::to_string(next++);
    idx[e.a.factor][e.a.slot] = nm;
    idx[e.b.factor][e.b.slot] = nm;
  }
  for (size_t k = 0; k < t.free.size(); ++k)
    idx[t.free[k].factor][t.free[k].slot] = "i" + std::to_string(k + 1);
  std::ostringstream os;
  os << (t.free.empty() ? "contr(" : "pcontr(");
  if (!t.free.empty()) {
    for (size_t k = 0; k < t.free.size(); ++k) os << (k ? "," : "") << "i" << k + 1;
    os << " | ";
  }
  for (size_t f = 0; f < t.factors.size(); ++f) {
    if (f) os << " * ";
    const Factor& fc = t.factors[f];
    if (fc.deriv > 0) {
      os << "nabla(";
      for (int s = 0; s < fc.deriv; ++s) os << (s ? "," : "") << idx[f][s];
      os << ") ";
    }
    if (fc.kind == FactorKind::FunctionJet)
      os << "f\"" << fc.label << "\"";
    else if (fc.kind == FactorKind::SymField)
      os << "v\"" << fc.label << "\"";
    else
      os << kind_name(fc.kind);
    int ar = kind_arity(fc.kind);
    if (ar > 0 || (fc.kind == FactorKind::FunctionJet && fc.deriv == 0)) {
      if (ar > 0) {
        os << "(";
        for (int s = 0; s < ar; ++s) os << (s ? "," : "") << idx[f][fc.deriv + s];
        os << ")";
      } else {
        os << "()";
      }
    }
  }
  os << ")";
  return os.str();
}

}  // namespace invforge

namespace invforge {

bool is_good(const LinearCombination& lc, int s, int sigma, int n) {
  if (s == sigma - 1) {
    // good iff every term has delta_W + delta_P = n/2 - 1
    for (const auto& [k, e] : lc.terms())
      if (counts(e.term).deltaWP() != n / 2 - 1) return false;
    return true;
  }
  if (s != sigma - 2) return true;  // the predicate only constrains these two cases
  // good iff the only term with sigma-2 TrP factors is the distinguished
  // double-divergence Weyl pair (times Laplacians when sigma < n/2 - 1)
  Term ref;
  ref.mode = Mode::Graded;
  int lap = n / 2 - sigma - 2;
  bool tight = sigma == n / 2 - 1;
  if (tight) lap = 0;
  // nabla^l W_ijkl (x) nabla^l' W^ijk_l' with the Laplacian derivatives on
  // the first factor, times (P^a_a)^(sigma-2)
  ref.factors = {{FactorKind::Weyl, 1 + 2 * std::max(0, lap), ""}, {FactorKind::Weyl, 1, ""}};
  for (int i = 0; i < std::max(0, lap); ++i)
    ref.edges.push_back({{0, 1 + 2 * i}, {0, 2 + 2 * i}});
  int ib0 = ref.factors[0].deriv, ib1 = ref.factors[1].deriv;
  ref.edges.push_back({{0, 0}, {0, ib0 + 3}});      // divergence onto l
  ref.edges.push_back({{1, 0}, {1, ib1 + 3}});      // divergence onto l'
  ref.edges.push_back({{0, ib0 + 0}, {1, ib1 + 0}});
  ref.edges.push_back({{0, ib0 + 1}, {1, ib1 + 1}});
  ref.edges.push_back({{0, ib0 + 2}, {1, ib1 + 2}});
  for (int i = 0; i < sigma - 2; ++i) ref.factors.push_back({FactorKind::TracedSchouten, 0, ""});
  std::string ref_key = canonicalize(ref).key;
  for (const auto& [k, e] : lc.terms()) {
    int trp = 0;
    for (const Factor& f : e.term.factors)
      if (f.kind == FactorKind::TracedSchouten) ++trp;
    if (trp == sigma - 2 && k != ref_key) return false;
  }
  return true;
}

}  // namespace invforge
