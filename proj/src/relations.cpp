#include "invforge/relations.hpp"

#include <algorithm>
#include <deque>
#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "invforge/flatten.hpp"

namespace invforge {

namespace {

std::vector<SlotRef> all_slots(const std::vector<Factor>& factors) {
  std::vector<SlotRef> slots;
  for (size_t f = 0; f < factors.size(); ++f)
    for (int s = 0; s < factors[f].slot_count(); ++s) slots.push_back({(int)f, s});
  return slots;
}

// internal-slot permutations of the monoterm symmetry group, per kind
const std::vector<std::array<int, 4>>& internal_perms(FactorKind k) {
  static const std::vector<std::array<int, 4>> riem = {
      {0, 1, 2, 3}, {1, 0, 2, 3}, {0, 1, 3, 2}, {1, 0, 3, 2},
      {2, 3, 0, 1}, {3, 2, 0, 1}, {2, 3, 1, 0}, {3, 2, 1, 0}};
  static const std::vector<std::array<int, 4>> sym2 = {{0, 1, -1, -1}, {1, 0, -1, -1}};
  static const std::vector<std::array<int, 4>> cotton = {{0, 1, 2, -1}, {0, 2, 1, -1}};
  static const std::vector<std::array<int, 4>> none = {{0, 1, 2, 3}};
  switch (k) {
    case FactorKind::Riemann:
    case FactorKind::Weyl: return riem;
    case FactorKind::Ricci:
    case FactorKind::Schouten:
    case FactorKind::Metric:
    case FactorKind::SymField: return sym2;
    case FactorKind::Cotton: return cotton;
    default: return none;
  }
}

}  // namespace

std::vector<Term> enumerate_pairings(const std::vector<Factor>& factors, const EnumOptions& opt) {
  std::vector<SlotRef> slots = all_slots(factors);
  const int total = (int)slots.size();
  if ((total - opt.free_labels) % 2 != 0 || opt.free_labels > total) return {};

  std::map<std::string, Term> reps;
  std::vector<int> state(total, -1);  // -1 unassigned, -2 free, >=0 partner slot index
  std::vector<int> free_slot(opt.free_labels, -1);

  auto is_ups = [&](int f) {
    return factors[f].kind == FactorKind::FunctionJet && factors[f].label == opt.upsilon_label;
  };

  // candidate s2 is redundant against an earlier-tried s1 when a monoterm
  // symmetry maps s2 to s1 while fixing every already-assigned slot of the
  // factor (the completions of the two branches are then isomorphic)
  auto slot_index_of = [&](int f, int s) {
    // global slot index of (f, s)
    int base = 0;
    for (int ff = 0; ff < f; ++ff) base += factors[ff].slot_count();
    return base + s;
  };
  auto equivalent_candidates = [&](int s1, int s2, int extra_fixed) -> bool {
    if (slots[s1].factor != slots[s2].factor) return false;
    const Factor& fac = factors[slots[s1].factor];
    bool d1 = slots[s1].slot < fac.deriv, d2 = slots[s2].slot < fac.deriv;
    if (d1 || d2) return d1 && d2;  // graded derivative block: freely swappable
    int p1 = slots[s1].slot - fac.deriv, p2 = slots[s2].slot - fac.deriv;
    for (const auto& perm : internal_perms(fac.kind)) {
      if (perm[p2] != p1) continue;
      bool fixes = true;
      for (int q = 0; q < kind_arity(fac.kind); ++q) {
        int gs = slot_index_of(slots[s1].factor, fac.deriv + q);
        bool assigned = state[gs] != -1 || gs == extra_fixed;
        if (assigned && perm[q] != q) fixes = false;
      }
      if (fixes) return true;
    }
    return false;
  };

  std::function<void()> match;
  std::function<void(int)> assign_free = [&](int label) {
    if (label == opt.free_labels) {
      match();
      return;
    }
    std::vector<int> tried;
    for (int s = 0; s < total; ++s) {
      if (state[s] != -1) continue;
      if (opt.forbid_upsilon_rules && is_ups(slots[s].factor)) continue;
      bool dup = false;
      for (int s1 : tried)
        if (equivalent_candidates(s1, s, -1)) dup = true;
      if (dup) continue;
      tried.push_back(s);
      state[s] = -2;
      free_slot[label] = s;
      assign_free(label + 1);
      state[s] = -1;
    }
  };

  auto emit = [&]() {
    Term t;
    t.mode = Mode::Graded;
    t.factors = factors;
    for (int s = 0; s < total; ++s)
      if (state[s] >= 0 && state[s] > s) t.edges.push_back({slots[s], slots[state[s]]});
    t.free.resize(opt.free_labels);
    for (int l = 0; l < opt.free_labels; ++l) t.free[l] = slots[free_slot[l]];
    if (opt.forbid_internal_contractions)
      for (const Edge& e : t.edges)
        if (e.a.factor == e.b.factor) return;
    if (opt.filter && !opt.filter(t)) return;
    Canonical c = canonicalize(t);
    if (c.sign == 0) return;
    reps.emplace(c.key, c.term);
  };

  match = [&]() {
    int first = -1;
    for (int s = 0; s < total; ++s)
      if (state[s] == -1) {
        first = s;
        break;
      }
    if (first < 0) {
      emit();
      return;
    }
    std::vector<int> tried;
    for (int s2 = first + 1; s2 < total; ++s2) {
      if (state[s2] != -1) continue;
      if (opt.forbid_internal_contractions && slots[first].factor == slots[s2].factor) continue;
      if (opt.forbid_upsilon_rules && is_ups(slots[first].factor) && is_ups(slots[s2].factor))
        continue;
      bool dup = false;
      for (int s1 : tried)
        if (equivalent_candidates(s1, s2, first)) dup = true;
      if (dup) continue;
      tried.push_back(s2);
      state[first] = s2;
      state[s2] = first;
      match();
      state[first] = -1;
      state[s2] = -1;
    }
  };

  assign_free(0);

  std::vector<Term> out;
  out.reserve(reps.size());
  for (auto& [k, t] : reps) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// lazy component-wise Bianchi reduction
//
// Relation rows (first/second Bianchi instances) connect terms of one factor
// multiset into components; the quotient restricted to a component equals the
// global one, so tables are built per component, by closure from the terms
// actually encountered.

namespace {

using Row = std::map<std::string, BigRat>;

struct ComponentTable {
  // pivot key -> substitution over basis keys
  std::unordered_map<std::string, std::vector<std::pair<std::string, BigRat>>> subs;
  std::map<std::string, Term> reps;  // every component key -> representative
};

Term rotate_attachments(const Term& t, const std::vector<SlotRef>& cycle) {
  Term out = t;
  const size_t k = cycle.size();
  auto reattach = [&](SlotRef& ref) {
    for (size_t i = 0; i < k; ++i)
      if (ref == cycle[i]) {
        ref = cycle[(i + 1) % k];
        return;
      }
  };
  for (Edge& e : out.edges) {
    reattach(e.a);
    reattach(e.b);
  }
  for (SlotRef& s : out.free) reattach(s);
  return out;
}

void cyclic_relation(const Term& t, const std::vector<SlotRef>& cycle, std::vector<Row>& rows,
                     std::map<std::string, Term>& seen, std::deque<Term>& frontier) {
  Row row;
  Term cur = t;
  for (int rep = 0; rep < 3; ++rep) {
    Canonical c = canonicalize(cur);
    if (c.sign != 0) {
      auto& cell = row[c.key];
      cell = cell + BigRat(c.sign);
      if (seen.emplace(c.key, c.term).second) frontier.push_back(c.term);
    }
    cur = rotate_attachments(cur, cycle);
  }
  for (auto it = row.begin(); it != row.end();)
    it = it->second.is_zero() ? row.erase(it) : std::next(it);
  if (!row.empty()) rows.push_back(std::move(row));
}

void relations_at(const Term& t, bool second_bianchi, bool weyl_too, std::vector<Row>& rows,
                  std::map<std::string, Term>& seen, std::deque<Term>& frontier) {
  for (size_t f = 0; f < t.factors.size(); ++f) {
    const Factor& fc = t.factors[f];
    bool is_r = fc.kind == FactorKind::Riemann;
    bool is_w = fc.kind == FactorKind::Weyl;
    if (!is_r && !(weyl_too && is_w)) continue;
    const int ib = fc.deriv;
    for (int fixed = 0; fixed < 4; ++fixed) {
      std::vector<SlotRef> cyc;
      for (int p = 0; p < 4; ++p)
        if (p != fixed) cyc.push_back({(int)f, ib + p});
      cyclic_relation(t, cyc, rows, seen, frontier);
    }
    if (second_bianchi && is_r) {
      for (int d = 0; d < fc.deriv; ++d)
        for (int block = 0; block < 2; ++block)
          cyclic_relation(t,
                          {{(int)f, d}, {(int)f, ib + 2 * block}, {(int)f, ib + 2 * block + 1}},
                          rows, seen, frontier);
    }
  }
}

std::shared_ptr<ComponentTable> build_component(const Term& seed, int relset) {
  const bool second = relset == 0;
  const bool weyl_too = relset == 1;
  std::map<std::string, Term> seen;
  std::deque<Term> frontier;
  std::vector<Row> rows;
  Canonical c0 = canonicalize(seed);
  seen.emplace(c0.key, c0.term);
  frontier.push_back(c0.term);
  while (!frontier.empty()) {
    Term t = frontier.front();
    frontier.pop_front();
    relations_at(t, second, weyl_too, rows, seen, frontier);
  }

  // sparse Gaussian elimination, pivot = largest key of each row
  std::map<std::string, Row> pivots;
  for (Row row : rows) {
    for (;;) {
      while (!row.empty()) {
        auto last = std::prev(row.end());
        auto p = pivots.find(last->first);
        if (p == pivots.end()) break;
        BigRat factor = last->second;
        row.erase(last);
        for (const auto& [k, v] : p->second) {
          if (k == p->first) continue;
          auto& cell = row[k];
          cell = cell - factor * v;
          if (cell.is_zero()) row.erase(k);
        }
      }
      if (row.empty()) break;
      auto last = std::prev(row.end());
      BigRat lead = last->second;
      for (auto& [k, v] : row) v = v / lead;
      pivots.emplace(last->first, row);
      break;
    }
  }
  // back substitution to express pivots over basis keys only
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [pk, row] : pivots) {
      for (auto it = row.begin(); it != row.end();) {
        if (it->first == pk) {
          ++it;
          continue;
        }
        auto p = pivots.find(it->first);
        if (p == pivots.end()) {
          ++it;
          continue;
        }
        BigRat factor = it->second;
        row.erase(it);
        for (const auto& [k, v] : p->second) {
          if (k == p->first) continue;
          auto& cell = row[k];
          cell = cell - factor * v;
          if (cell.is_zero()) row.erase(k);
        }
        it = row.begin();
        changed = true;
      }
    }
  }

  auto table = std::make_shared<ComponentTable>();
  table->reps = std::move(seen);
  for (const auto& [pk, row] : pivots) {
    std::vector<std::pair<std::string, BigRat>> sub;
    for (const auto& [k, v] : row)
      if (k != pk) sub.push_back({k, -v});
    table->subs.emplace(pk, std::move(sub));
  }
  return table;
}

std::mutex g_cache_mutex;
std::unordered_map<std::string, std::shared_ptr<ComponentTable>> g_component_of_key[2];

std::shared_ptr<ComponentTable> component_for(const Term& rep, const std::string& key,
                                              int relset) {
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_component_of_key[relset].find(key);
    if (it != g_component_of_key[relset].end()) return it->second;
  }
  std::shared_ptr<ComponentTable> table = build_component(rep, relset);
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto [it, fresh] = g_component_of_key[relset].emplace(key, table);
  if (fresh)
    for (const auto& [k, t] : table->reps) g_component_of_key[relset].emplace(k, table);
  return it->second;
}

LinearCombination reduce_with(const LinearCombination& lc, int relset) {
  LinearCombination out;
  for (const auto& [key, e] : lc.terms()) {
    auto table = component_for(e.term, key, relset);
    auto it = table->subs.find(key);
    if (it == table->subs.end()) {
      out.add(e.term, e.coeff);
      continue;
    }
    for (const auto& [k2, v] : it->second) {
      auto rep = table->reps.find(k2);
      if (rep == table->reps.end())
        throw StructuralError("component table substitution hit an unknown key");
      out.add(rep->second, e.coeff * DimensionCoefficient(v));
    }
  }
  return out;
}

}  // namespace

LinearCombination reduce_bianchi(const LinearCombination& lc) { return reduce_with(lc, 0); }

LinearCombination reduce_first_bianchi(const LinearCombination& lc) {
  return reduce_with(lc, 1);
}

std::vector<Term> bianchi_basis(const std::vector<Factor>& factors, int free_labels) {
  EnumOptions opt;
  opt.free_labels = free_labels;
  std::vector<Term> reps = enumerate_pairings(factors, opt);
  std::vector<Term> out;
  for (const Term& t : reps) {
    Canonical c = canonicalize(t);
    auto table = component_for(c.term, c.key, 0);
    if (!table->subs.count(c.key)) out.push_back(c.term);
  }
  return out;
}

bool is_zero_mod_length(const LinearCombination& lc, int threshold) {
  return residual_mod_length(lc, threshold).empty();
}

LinearCombination residual_mod_length(const LinearCombination& lc, int threshold) {
  LinearCombination flat = expand_flat(to_graded(lc));
  LinearCombination below = flat.below_length(threshold);
  return reduce_bianchi(below);
}

void clear_relation_cache() {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_component_of_key[0].clear();
  g_component_of_key[1].clear();
}

}  // namespace invforge
