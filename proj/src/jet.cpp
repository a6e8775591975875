#include "invforge/jet.hpp"

#include <functional>

namespace invforge {

SpatialPoly SpatialPoly::constant(const EpsPoly& c) {
  SpatialPoly p;
  p.add_term(0, c);
  return p;
}

void SpatialPoly::add_term(uint64_t packed, const EpsPoly& c) {
  if (c.is_zero()) return;
  auto [it, fresh] = terms_.try_emplace(packed, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

SpatialPoly& SpatialPoly::operator+=(const SpatialPoly& o) {
  for (const auto& [k, v] : o.terms_) add_term(k, v);
  return *this;
}

SpatialPoly& SpatialPoly::operator-=(const SpatialPoly& o) {
  for (const auto& [k, v] : o.terms_) add_term(k, -1.0 * v);
  return *this;
}

int SpatialPoly::total_degree(uint64_t packed) {
  int d = 0;
  while (packed) {
    d += (int)(packed & 0xf);
    packed >>= 4;
  }
  return d;
}

uint64_t SpatialPoly::pack_add(uint64_t packed, int var, int delta) {
  uint64_t cur = (packed >> (4 * var)) & 0xf;
  cur = (uint64_t)((int)cur + delta);
  packed &= ~(0xfull << (4 * var));
  packed |= cur << (4 * var);
  return packed;
}

SpatialPoly SpatialPoly::mul(const SpatialPoly& a, const SpatialPoly& b, int cap) {
  SpatialPoly r;
  for (const auto& [ka, va] : a.terms_) {
    int da = total_degree(ka);
    if (da > cap) continue;
    for (const auto& [kb, vb] : b.terms_) {
      if (da + total_degree(kb) > cap) continue;
      r.add_term(ka + kb, va * vb);
    }
  }
  return r;
}

SpatialPoly SpatialPoly::scaled(const EpsPoly& c) const {
  SpatialPoly r;
  for (const auto& [k, v] : terms_) r.add_term(k, c * v);
  return r;
}

SpatialPoly SpatialPoly::derivative(int var) const {
  SpatialPoly r;
  for (const auto& [k, v] : terms_) {
    int e = (int)((k >> (4 * var)) & 0xf);
    if (e == 0) continue;
    r.add_term(pack_add(k, var, -1), (double)e * v);
  }
  return r;
}

EpsPoly SpatialPoly::at_zero() const {
  auto it = terms_.find(0);
  return it == terms_.end() ? EpsPoly() : it->second;
}

NumTensor::NumTensor(int n, int valence) : n_(n), valence_(valence) {
  size_t sz = 1;
  for (int i = 0; i < valence; ++i) sz *= n;
  data_.assign(sz, EpsPoly());
}

static size_t flat_index(int n, const std::vector<int>& idx) {
  size_t f = 0;
  for (int i : idx) f = f * n + i;
  return f;
}

EpsPoly& NumTensor::at(const std::vector<int>& idx) { return data_[flat_index(n_, idx)]; }
const EpsPoly& NumTensor::at(const std::vector<int>& idx) const {
  return data_[flat_index(n_, idx)];
}

TensorField::TensorField(int n, int valence) : n_(n), valence_(valence) {
  size_t sz = 1;
  for (int i = 0; i < valence; ++i) sz *= n;
  data_.assign(sz, SpatialPoly());
}

SpatialPoly& TensorField::at(const std::vector<int>& idx) { return data_[flat_index(n_, idx)]; }
const SpatialPoly& TensorField::at(const std::vector<int>& idx) const {
  return data_[flat_index(n_, idx)];
}

NumTensor TensorField::at_zero() const {
  NumTensor t(n_, valence_);
  for (size_t i = 0; i < data_.size(); ++i) t.flat(i) = data_[i].at_zero();
  return t;
}

namespace {

double random_coeff(Rng& rng) {
  long long num = rng.range(-3, 3);
  long long den = rng.range(1, 4);
  return (double)num / (double)den;
}

// random polynomial with terms of total degree 1..order
SpatialPoly random_poly(Rng& rng, int n, int order, double scale) {
  SpatialPoly p;
  std::vector<int> exps(n, 0);
  std::function<void(int, int)> rec = [&](int var, int remaining) {
    if (var == n) {
      int deg = 0;
      uint64_t packed = 0;
      for (int i = 0; i < n; ++i) {
        deg += exps[i];
        packed |= (uint64_t)exps[i] << (4 * i);
      }
      if (deg >= 1) {
        double c = random_coeff(rng) * scale;
        if (c != 0.0) p.add_term(packed, EpsPoly::eps_times(c));
      }
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      exps[var] = e;
      rec(var + 1, remaining - e);
    }
    exps[var] = 0;
  };
  rec(0, order);
  return p;
}

}  // namespace

JetPoint JetPoint::flat(int dimension, int order) {
  JetPoint jp;
  jp.dimension = dimension;
  jp.order = order;
  jp.metric = TensorField(dimension, 2);
  for (int i = 0; i < dimension; ++i)
    jp.metric.at({i, i}) = SpatialPoly::constant(EpsPoly(1.0));
  return jp;
}

JetPoint JetPoint::random(uint64_t seed, int dimension, int order,
                          const std::vector<std::string>& function_labels,
                          const std::vector<std::string>& sym_labels) {
  Rng rng(seed * 0x9e3779b97f4a7c15ull + 12345);
  JetPoint jp = flat(dimension, order);
  jp.seed = seed;
  for (int i = 0; i < dimension; ++i)
    for (int j = i; j < dimension; ++j) {
      SpatialPoly h = random_poly(rng, dimension, order, 0.25);
      jp.metric.at({i, j}) += h;
      if (j != i) jp.metric.at({j, i}) += h;
    }
  for (const std::string& l : function_labels) {
    SpatialPoly f = random_poly(rng, dimension, order, 0.5);
    jp.functions.emplace(l, f);
  }
  for (const std::string& l : sym_labels) {
    TensorField v(dimension, 2);
    for (int i = 0; i < dimension; ++i)
      for (int j = i; j < dimension; ++j) {
        SpatialPoly h = random_poly(rng, dimension, order, 0.5);
        h.add_term(0, EpsPoly::eps_times(random_coeff(rng)));
        v.at({i, j}) += h;
        if (j != i) v.at({j, i}) += h;
      }
    jp.sym_fields.emplace(l, v);
  }
  return jp;
}

JetPoint JetPoint::space_form(int dimension, double curvature, int order) {
  // normal coordinates, R_ijkl(0) = K(d_ik d_jl - d_il d_jk):
  //   g_ij = delta_ij - (K/3)(delta_ij |x|^2 - x_i x_j)
  JetPoint jp = flat(dimension, order);
  for (int i = 0; i < dimension; ++i) {
    for (int a = 0; a < dimension; ++a) {
      if (a == i) continue;
      jp.metric.at({i, i}).add_term(SpatialPoly::pack_add(0, a, 2),
                                    EpsPoly::eps_times(-curvature / 3.0));
    }
    for (int j = 0; j < dimension; ++j) {
      if (j == i) continue;
      uint64_t pij = SpatialPoly::pack_add(SpatialPoly::pack_add(0, i, 1), j, 1);
      jp.metric.at({i, j}).add_term(pij, EpsPoly::eps_times(curvature / 3.0));
    }
  }
  return jp;
}

JetPoint JetPoint::conformally_scaled(const std::string& phi_label) const {
  auto it = functions.find(phi_label);
  if (it == functions.end()) throw EvalError("conformal factor jet missing: " + phi_label);
  // e^{2 phi}: the series truncates in eps (phi is O(eps)) and spatial degree
  SpatialPoly expf = SpatialPoly::constant(EpsPoly(1.0));
  SpatialPoly pow = SpatialPoly::constant(EpsPoly(1.0));
  double fact = 1.0;
  for (int k = 1; k <= EpsPoly::kMaxDeg; ++k) {
    pow = SpatialPoly::mul(pow, it->second, order);
    if (pow.empty()) break;
    fact *= k;
    expf += pow.scaled(EpsPoly(std::pow(2.0, k) / fact));
  }
  JetPoint jp = *this;
  TensorField g2(dimension, 2);
  for (int i = 0; i < dimension; ++i)
    for (int j = 0; j < dimension; ++j)
      g2.at({i, j}) = SpatialPoly::mul(expf, metric.at({i, j}), order);
  jp.metric = g2;
  return jp;
}

JetPoint JetPoint::perturbed(const std::string& v_label, double t) const {
  auto it = sym_fields.find(v_label);
  if (it == sym_fields.end()) throw EvalError("symmetric field jet missing: " + v_label);
  JetPoint jp = *this;
  for (int i = 0; i < dimension; ++i)
    for (int j = 0; j < dimension; ++j)
      jp.metric.at({i, j}) += it->second.at({i, j}).scaled(EpsPoly(t));
  return jp;
}

}  // namespace invforge
