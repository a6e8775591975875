#include "invforge/curvature.hpp"

#include <functional>

#include "invforge/combination.hpp"

namespace invforge {

namespace {

void for_each_index(int n, int valence, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(valence, 0);
  if (valence == 0) {
    fn(idx);
    return;
  }
  for (;;) {
    fn(idx);
    int k = valence - 1;
    while (k >= 0 && ++idx[k] == n) idx[k--] = 0;
    if (k < 0) break;
  }
}

}  // namespace

CurvatureJets::CurvatureJets(const JetPoint& jet) : jet_(jet) {
  const int n = jet_.dimension;
  const int cap = jet_.order;
  g_ = jet_.metric;

  // inverse metric by Neumann series: g = I + E with E = O(eps)
  TensorField E(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      E.at({i, j}) = g_.at({i, j});
      if (i == j) E.at({i, j}) -= SpatialPoly::constant(EpsPoly(1.0));
    }
  ginv_ = TensorField(n, 2);
  TensorField powk(n, 2);
  for (int i = 0; i < n; ++i) {
    ginv_.at({i, i}) = SpatialPoly::constant(EpsPoly(1.0));
    powk.at({i, i}) = SpatialPoly::constant(EpsPoly(1.0));
  }
  for (int k = 1; k <= EpsPoly::kMaxDeg; ++k) {
    TensorField next(n, 2);
    bool any = false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        SpatialPoly s;
        for (int m = 0; m < n; ++m)
          s += SpatialPoly::mul(powk.at({i, m}), E.at({m, j}), cap);
        if (!s.empty()) any = true;
        next.at({i, j}) = s;
      }
    powk = next;
    if (!any) break;
    double sgn = (k % 2) ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ginv_.at({i, j}) += powk.at({i, j}).scaled(EpsPoly(sgn));
  }

  // Christoffel symbols Gamma^k_ij
  gamma_ = TensorField(n, 3);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        SpatialPoly s;
        for (int l = 0; l < n; ++l) {
          SpatialPoly inner = g_.at({l, j}).derivative(i);
          inner += g_.at({l, i}).derivative(j);
          inner -= g_.at({i, j}).derivative(l);
          s += SpatialPoly::mul(ginv_.at({k, l}), inner, cap);
        }
        gamma_.at({k, i, j}) = s.scaled(EpsPoly(0.5));
      }

  // Curvature with the sign fixed by the conformal transformation laws
  // (sphere-positive Ricci):  [nabla_j nabla_i - nabla_i nabla_j] X_l = R_ijkl X^k
  //   C_ijl^a = -d_i Gamma^a_jl + d_j Gamma^a_il + Gamma^b_il Gamma^a_jb
  //             - Gamma^b_jl Gamma^a_ib
  //   R_ijkl  = -C_ijl^a g_ak
  riem_ = TensorField(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      for (int l = 0; l < n; ++l) {
        std::vector<SpatialPoly> C(n);
        for (int a = 0; a < n; ++a) {
          SpatialPoly s = gamma_.at({a, i, l}).derivative(j) - gamma_.at({a, j, l}).derivative(i);
          for (int b = 0; b < n; ++b) {
            s += SpatialPoly::mul(gamma_.at({b, i, l}), gamma_.at({a, j, b}), cap);
            s -= SpatialPoly::mul(gamma_.at({b, j, l}), gamma_.at({a, i, b}), cap);
          }
          C[a] = s;
        }
        for (int k = 0; k < n; ++k) {
          SpatialPoly s;
          for (int a = 0; a < n; ++a) s -= SpatialPoly::mul(C[a], g_.at({a, k}), cap);
          riem_.at({i, j, k, l}) = s;
        }
      }
    }
}

TensorField CurvatureJets::covariant_derivative(const TensorField& t) const {
  const int n = jet_.dimension;
  const int v = t.valence();
  const int cap = jet_.order;
  TensorField out(n, v + 1);
  std::vector<int> idx(v + 1);
  for_each_index(n, v + 1, [&](const std::vector<int>& full) {
    int a = full[0];
    std::vector<int> rest(full.begin() + 1, full.end());
    SpatialPoly s = t.at(rest).derivative(a);
    for (int slot = 0; slot < v; ++slot) {
      std::vector<int> probe = rest;
      for (int c = 0; c < n; ++c) {
        probe[slot] = c;
        s -= SpatialPoly::mul(gamma_.at({c, a, rest[slot]}), t.at(probe), cap);
      }
      probe[slot] = rest[slot];
    }
    out.at(full) = s;
  });
  return out;
}

TensorField CurvatureJets::base_field(FactorKind kind, const std::string& label) const {
  const int n = jet_.dimension;
  const int cap = jet_.order;
  const double nn = (double)n;
  switch (kind) {
    case FactorKind::Riemann: return riem_;
    case FactorKind::Ricci: {
      TensorField t(n, 2);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          SpatialPoly s;
          for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
              s += SpatialPoly::mul(ginv_.at({j, l}), riem_.at({i, j, k, l}), cap);
          t.at({i, k}) = s;
        }
      return t;
    }
    case FactorKind::ScalarR: {
      const TensorField ric = field_for(FactorKind::Ricci, "");
      TensorField t(n, 0);
      SpatialPoly s;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          s += SpatialPoly::mul(ginv_.at({i, k}), ric.at({i, k}), cap);
      t.at({}) = s;
      return t;
    }
    case FactorKind::Schouten: {
      const TensorField& ric = field_for(FactorKind::Ricci, "");
      const TensorField& scal = field_for(FactorKind::ScalarR, "");
      TensorField t(n, 2);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          SpatialPoly s = ric.at({i, j});
          s -= SpatialPoly::mul(scal.at({}), g_.at({i, j}), cap).scaled(
              EpsPoly(1.0 / (2.0 * (nn - 1.0))));
          t.at({i, j}) = s.scaled(EpsPoly(1.0 / (nn - 2.0)));
        }
      return t;
    }
    case FactorKind::TracedSchouten: {
      const TensorField& p = field_for(FactorKind::Schouten, "");
      TensorField t(n, 0);
      SpatialPoly s;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s += SpatialPoly::mul(ginv_.at({i, j}), p.at({i, j}), cap);
      t.at({}) = s;
      return t;
    }
    case FactorKind::Weyl: {
      // W = R - (P/\g)
      const TensorField& p = field_for(FactorKind::Schouten, "");
      TensorField t(n, 4);
      for_each_index(n, 4, [&](const std::vector<int>& id) {
        int i = id[0], j = id[1], k = id[2], l = id[3];
        SpatialPoly s = riem_.at({i, j, k, l});
        s -= SpatialPoly::mul(p.at({i, k}), g_.at({j, l}), cap);
        s -= SpatialPoly::mul(p.at({j, l}), g_.at({i, k}), cap);
        s += SpatialPoly::mul(p.at({i, l}), g_.at({j, k}), cap);
        s += SpatialPoly::mul(p.at({j, k}), g_.at({i, l}), cap);
        t.at(id) = s;
      });
      return t;
    }
    case FactorKind::Cotton: {
      // C_ijk = nabla_k P_ij - nabla_j P_ik
      TensorField np = covariant_derivative(field_for(FactorKind::Schouten, ""));
      TensorField t(n, 3);
      for_each_index(n, 3, [&](const std::vector<int>& id) {
        int i = id[0], j = id[1], k = id[2];
        t.at(id) = np.at({k, i, j}) - np.at({j, i, k});
      });
      return t;
    }
    case FactorKind::Metric: return g_;
    case FactorKind::FunctionJet: {
      auto it = jet_.functions.find(label);
      if (it == jet_.functions.end()) throw EvalError("missing function jet: " + label);
      TensorField t(n, 0);
      t.at({}) = it->second;
      return t;
    }
    case FactorKind::SymField: {
      auto it = jet_.sym_fields.find(label);
      if (it == jet_.sym_fields.end()) throw EvalError("missing symmetric field jet: " + label);
      return it->second;
    }
  }
  throw EvalError("unhandled factor kind");
}

const TensorField& CurvatureJets::field_for(FactorKind kind, const std::string& label) const {
  std::string key = std::string(kind_name(kind)) + "|" + label;
  auto it = field_cache_.find(key);
  if (it != field_cache_.end()) return it->second;
  return field_cache_.emplace(key, base_field(kind, label)).first->second;
}

NumTensor CurvatureJets::factor_tensor(const Factor& f, long long) const {
  int need = f.deriv + (f.kind == FactorKind::Cotton ? 1 : 0) +
             (kind_is_curvature(f.kind) ? 2 : 1);
  if (need > jet_.order)
    throw EvalError("jet order " + std::to_string(jet_.order) +
                    " insufficient for factor with " + std::to_string(f.deriv) +
                    " derivatives");
  std::string key = std::string(kind_name(f.kind)) + "|" + f.label + "|" +
                    std::to_string(f.deriv);
  auto it = field_cache_.find(key);
  if (it == field_cache_.end()) {
    TensorField t = field_for(f.kind, f.label);
    for (int m = 0; m < f.deriv; ++m) t = covariant_derivative(t);
    it = field_cache_.emplace(key, std::move(t)).first;
  }
  return it->second.at_zero();
}

// ---------------------------------------------------------------------------
// term evaluation

namespace {

struct OpenTensor {
  NumTensor data;
  std::vector<int> slots;  // global slot id per index position
};

// contract two tensors (or one with itself) over the given positions
NumTensor contract_pair(const NumTensor& A, const NumTensor& B,
                        const std::vector<std::pair<int, int>>& pairs,
                        const NumTensor& ginv, bool same) {
  const int n = A.n();
  std::vector<int> a_keep, b_keep;
  std::vector<char> a_used(A.valence(), 0), b_used(same ? 0 : B.valence(), 0);
  for (auto [pa, pb] : pairs) {
    a_used[pa] = 1;
    if (same)
      a_used[pb] = 1;
    else
      b_used[pb] = 1;
  }
  for (int i = 0; i < A.valence(); ++i)
    if (!a_used[i]) a_keep.push_back(i);
  if (!same)
    for (int i = 0; i < B.valence(); ++i)
      if (!b_used[i]) b_keep.push_back(i);
  const int kv = (int)(a_keep.size() + (same ? 0 : b_keep.size()));
  NumTensor out(n, kv);
  const int np = (int)pairs.size();
  std::vector<int> open(kv, 0), dummy1(np, 0), dummy2(np, 0);
  std::vector<int> ia(A.valence(), 0), ib(same ? 0 : B.valence(), 0);
  std::function<void(int)> loop_open = [&](int level) {
    if (level == kv) {
      EpsPoly sum;
      std::function<void(int)> loop_dummy = [&](int d) {
        if (d == np) {
          for (size_t t = 0; t < a_keep.size(); ++t) ia[a_keep[t]] = open[t];
          if (!same)
            for (size_t t = 0; t < b_keep.size(); ++t) ib[b_keep[t]] = open[a_keep.size() + t];
          for (int p = 0; p < np; ++p) {
            ia[pairs[p].first] = dummy1[p];
            if (same)
              ia[pairs[p].second] = dummy2[p];
            else
              ib[pairs[p].second] = dummy2[p];
          }
          EpsPoly w(1.0);
          for (int p = 0; p < np; ++p) w = w * ginv.at({dummy1[p], dummy2[p]});
          if (same)
            sum += w * A.at(ia);
          else
            sum += w * (A.at(ia) * B.at(ib));
          return;
        }
        for (dummy1[d] = 0; dummy1[d] < n; ++dummy1[d])
          for (dummy2[d] = 0; dummy2[d] < n; ++dummy2[d]) loop_dummy(d + 1);
      };
      loop_dummy(0);
      out.at(open) = sum;
      return;
    }
    for (open[level] = 0; open[level] < n; ++open[level]) loop_open(level + 1);
  };
  loop_open(0);
  return out;
}

}  // namespace

NumTensor evaluate_tensor(const Term& t, const CurvatureJets& cj) {
  const int n = cj.n();
  NumTensor ginv = cj.inverse_metric_at_zero();
  // assign global slot ids
  std::vector<int> slot_base(t.factors.size() + 1, 0);
  for (size_t f = 0; f < t.factors.size(); ++f)
    slot_base[f + 1] = slot_base[f] + t.factors[f].slot_count();
  auto gid = [&](const SlotRef& s) { return slot_base[s.factor] + s.slot; };

  std::vector<OpenTensor> parts;
  for (size_t f = 0; f < t.factors.size(); ++f) {
    OpenTensor ot;
    ot.data = cj.factor_tensor(t.factors[f], n);
    for (int s = 0; s < t.factors[f].slot_count(); ++s) ot.slots.push_back(gid({(int)f, s}));
    parts.push_back(std::move(ot));
  }
  std::map<int, int> partner;  // global slot -> global slot
  for (const Edge& e : t.edges) {
    partner[gid(e.a)] = gid(e.b);
    partner[gid(e.b)] = gid(e.a);
  }

  auto find_part = [&](int slot) -> int {
    for (size_t p = 0; p < parts.size(); ++p)
      for (int s : parts[p].slots)
        if (s == slot) return (int)p;
    return -1;
  };

  // repeatedly contract: self-traces first, then the cheapest pair
  for (;;) {
    // self contraction?
    bool did = false;
    for (size_t p = 0; p < parts.size() && !did; ++p) {
      std::vector<std::pair<int, int>> pairs;
      for (size_t i = 0; i < parts[p].slots.size(); ++i) {
        auto it = partner.find(parts[p].slots[i]);
        if (it == partner.end()) continue;
        for (size_t j = i + 1; j < parts[p].slots.size(); ++j)
          if (parts[p].slots[j] == it->second) pairs.push_back({(int)i, (int)j});
      }
      if (pairs.empty()) continue;
      std::vector<int> kept;
      std::vector<char> used(parts[p].slots.size(), 0);
      for (auto [a, b] : pairs) used[a] = used[b] = 1;
      for (size_t i = 0; i < parts[p].slots.size(); ++i)
        if (!used[i]) kept.push_back(parts[p].slots[i]);
      for (auto [a, b] : pairs) {
        partner.erase(parts[p].slots[a]);
        partner.erase(parts[p].slots[b]);
      }
      parts[p].data = contract_pair(parts[p].data, parts[p].data, pairs, ginv, true);
      parts[p].slots = kept;
      did = true;
    }
    if (did) continue;
    // cross contraction: pick the connected pair minimizing the result valence
    int best_a = -1, best_b = -1, best_cost = 1 << 30;
    for (size_t a = 0; a < parts.size(); ++a)
      for (size_t b = a + 1; b < parts.size(); ++b) {
        int shared = 0;
        for (int s : parts[a].slots) {
          auto it = partner.find(s);
          if (it == partner.end()) continue;
          for (int s2 : parts[b].slots)
            if (s2 == it->second) ++shared;
        }
        if (!shared) continue;
        int cost = (int)(parts[a].slots.size() + parts[b].slots.size()) - 2 * shared;
        if (cost < best_cost) {
          best_cost = cost;
          best_a = (int)a;
          best_b = (int)b;
        }
      }
    if (best_a < 0) break;
    OpenTensor &A = parts[best_a], &B = parts[best_b];
    std::vector<std::pair<int, int>> pairs;
    for (size_t i = 0; i < A.slots.size(); ++i) {
      auto it = partner.find(A.slots[i]);
      if (it == partner.end()) continue;
      for (size_t j = 0; j < B.slots.size(); ++j)
        if (B.slots[j] == it->second) pairs.push_back({(int)i, (int)j});
    }
    std::vector<int> kept;
    std::vector<char> au(A.slots.size(), 0), bu(B.slots.size(), 0);
    for (auto [a, b] : pairs) {
      au[a] = 1;
      bu[b] = 1;
      partner.erase(A.slots[a]);
      partner.erase(B.slots[b]);
    }
    for (size_t i = 0; i < A.slots.size(); ++i)
      if (!au[i]) kept.push_back(A.slots[i]);
    for (size_t j = 0; j < B.slots.size(); ++j)
      if (!bu[j]) kept.push_back(B.slots[j]);
    OpenTensor merged;
    merged.data = contract_pair(A.data, B.data, pairs, ginv, false);
    merged.slots = kept;
    parts.erase(parts.begin() + best_b);
    parts.erase(parts.begin() + best_a);
    parts.push_back(std::move(merged));
  }

  // tensor-product the disconnected remainder and order indices by free label
  while (parts.size() > 1) {
    OpenTensor& A = parts[parts.size() - 2];
    OpenTensor& B = parts[parts.size() - 1];
    NumTensor prod(n, A.data.valence() + B.data.valence());
    std::vector<int> idx(prod.valence());
    std::function<void(int)> loop = [&](int level) {
      if (level == prod.valence()) {
        std::vector<int> ia(idx.begin(), idx.begin() + A.data.valence());
        std::vector<int> ib(idx.begin() + A.data.valence(), idx.end());
        prod.at(idx) = A.data.at(ia) * B.data.at(ib);
        return;
      }
      for (idx[level] = 0; idx[level] < n; ++idx[level]) loop(level + 1);
    };
    loop(0);
    OpenTensor merged;
    merged.data = std::move(prod);
    merged.slots = A.slots;
    merged.slots.insert(merged.slots.end(), B.slots.begin(), B.slots.end());
    parts.pop_back();
    parts.pop_back();
    parts.push_back(std::move(merged));
  }
  if (parts.empty()) {
    NumTensor one(n, 0);
    one.at({}) = EpsPoly(1.0);  // empty product
    return one;
  }
  (void)find_part;

  // order remaining indices to match the free-slot label order
  OpenTensor& R = parts[0];
  std::vector<int> want;
  for (const SlotRef& s : t.free) want.push_back(gid(s));
  if (want.size() != R.slots.size()) throw EvalError("evaluation left dangling slots");
  std::vector<int> perm(want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    auto it = std::find(R.slots.begin(), R.slots.end(), want[i]);
    if (it == R.slots.end()) throw EvalError("free slot lost during contraction");
    perm[i] = (int)(it - R.slots.begin());
  }
  NumTensor out(n, (int)want.size());
  std::vector<int> idx(want.size());
  std::function<void(int)> loop = [&](int level) {
    if (level == (int)want.size()) {
      std::vector<int> src(want.size());
      for (size_t i = 0; i < want.size(); ++i) src[perm[i]] = idx[i];
      out.at(idx) = R.data.at(src);
      return;
    }
    for (idx[level] = 0; idx[level] < n; ++idx[level]) loop(level + 1);
  };
  if (want.empty()) {
    out.at({}) = R.data.at({});
  } else {
    loop(0);
  }
  return out;
}

EpsPoly evaluate(const Term& t, const CurvatureJets& cj) {
  if (!t.free.empty()) throw EvalError("evaluate: term has free slots; use evaluate_tensor");
  return evaluate_tensor(t, cj).at({});
}

NumTensor evaluate_tensor(const LinearCombination& lc, const CurvatureJets& cj) {
  const int n = cj.n();
  NumTensor acc(n, lc.arity());
  for (const auto& [k, e] : lc.terms()) {
    double c = e.coeff.at_dimension_double(n);
    NumTensor v = evaluate_tensor(e.term, cj);
    for (size_t i = 0; i < acc.size(); ++i) acc.flat(i) += c * v.flat(i);
  }
  return acc;
}

EpsPoly evaluate(const LinearCombination& lc, const CurvatureJets& cj) {
  EpsPoly acc;
  for (const auto& [k, e] : lc.terms()) {
    double c = e.coeff.at_dimension_double(cj.n());
    acc += c * evaluate(e.term, cj);
  }
  return acc;
}

double graded_evaluate(const LinearCombination& lc, const CurvatureJets& cj, int degree) {
  return evaluate(lc, cj)[degree];
}

double tensor_rel_error(const NumTensor& a, const NumTensor& b) {
  double scale = 0, err = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, a.flat(i).max_abs());
    scale = std::max(scale, b.flat(i).max_abs());
    EpsPoly d = a.flat(i) - b.flat(i);
    err = std::max(err, d.max_abs());
  }
  return scale == 0 ? err : err / scale;
}

}  // namespace invforge
