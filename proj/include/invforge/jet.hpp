#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "invforge/errors.hpp"

namespace invforge {

// deterministic splitmix64 stream
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // integer in [lo, hi]
  long long range(long long lo, long long hi) {
    return lo + (long long)(next() % (uint64_t)(hi - lo + 1));
  }
};

// truncated polynomial in the grading parameter epsilon
class EpsPoly {
 public:
  static constexpr int kMaxDeg = 9;
  EpsPoly() : c_{} {}
  explicit EpsPoly(double v) : c_{} { c_[0] = v; }
  static EpsPoly eps_times(double v) {
    EpsPoly p;
    p.c_[1] = v;
    return p;
  }
  double& operator[](int k) { return c_[k]; }
  double operator[](int k) const { return c_[k]; }
  bool is_zero(double tol = 0.0) const {
    for (double v : c_)
      if (std::abs(v) > tol) return false;
    return true;
  }
  EpsPoly& operator+=(const EpsPoly& o) {
    for (int i = 0; i <= kMaxDeg; ++i) c_[i] += o.c_[i];
    return *this;
  }
  EpsPoly& operator-=(const EpsPoly& o) {
    for (int i = 0; i <= kMaxDeg; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend EpsPoly operator+(EpsPoly a, const EpsPoly& b) { return a += b; }
  friend EpsPoly operator-(EpsPoly a, const EpsPoly& b) { return a -= b; }
  friend EpsPoly operator*(const EpsPoly& a, const EpsPoly& b) {
    EpsPoly r;
    for (int i = 0; i <= kMaxDeg; ++i) {
      if (a.c_[i] == 0.0) continue;
      for (int j = 0; i + j <= kMaxDeg; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
  }
  friend EpsPoly operator*(double s, EpsPoly a) {
    for (int i = 0; i <= EpsPoly::kMaxDeg; ++i) a.c_[i] *= s;
    return a;
  }
  double value_sum() const {  // evaluated at eps = 1
    double s = 0;
    for (double v : c_) s += v;
    return s;
  }
  double max_abs() const {
    double m = 0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  double c_[kMaxDeg + 1];
};

// sparse multivariate polynomial in x_1..x_n over EpsPoly, exponents <= 15
class SpatialPoly {
 public:
  SpatialPoly() = default;
  static SpatialPoly constant(const EpsPoly& c);

  void add_term(uint64_t packed, const EpsPoly& c);
  SpatialPoly& operator+=(const SpatialPoly& o);
  SpatialPoly& operator-=(const SpatialPoly& o);
  friend SpatialPoly operator+(SpatialPoly a, const SpatialPoly& b) { return a += b; }
  friend SpatialPoly operator-(SpatialPoly a, const SpatialPoly& b) { return a -= b; }
  // product truncated at total degree `cap`
  static SpatialPoly mul(const SpatialPoly& a, const SpatialPoly& b, int cap);
  SpatialPoly scaled(const EpsPoly& c) const;
  SpatialPoly derivative(int var) const;
  EpsPoly at_zero() const;
  bool empty() const { return terms_.empty(); }

  static uint64_t pack_add(uint64_t packed, int var, int delta);
  static int total_degree(uint64_t packed);

  const std::unordered_map<uint64_t, EpsPoly>& terms() const { return terms_; }

 private:
  std::unordered_map<uint64_t, EpsPoly> terms_;
};

// dense numeric tensor over EpsPoly values (valence small, dims all = n)
class NumTensor {
 public:
  NumTensor() = default;
  NumTensor(int n, int valence);
  int n() const { return n_; }
  int valence() const { return valence_; }
  EpsPoly& at(const std::vector<int>& idx);
  const EpsPoly& at(const std::vector<int>& idx) const;
  size_t size() const { return data_.size(); }
  EpsPoly& flat(size_t i) { return data_[i]; }
  const EpsPoly& flat(size_t i) const { return data_[i]; }

 private:
  int n_ = 0, valence_ = 0;
  std::vector<EpsPoly> data_;
};

// tensor-valued polynomial field (valence small)
class TensorField {
 public:
  TensorField() = default;
  TensorField(int n, int valence);
  int n() const { return n_; }
  int valence() const { return valence_; }
  SpatialPoly& at(const std::vector<int>& idx);
  const SpatialPoly& at(const std::vector<int>& idx) const;
  size_t size() const { return data_.size(); }
  SpatialPoly& flat(size_t i) { return data_[i]; }
  const SpatialPoly& flat(size_t i) const { return data_[i]; }
  NumTensor at_zero() const;

 private:
  int n_ = 0, valence_ = 0;
  std::vector<SpatialPoly> data_;
};

// Numeric evaluation context: dimension, polynomial metric jet around the base
// point (g = identity + eps * perturbation), labeled scalar function jets and
// labeled symmetric 2-tensor jets, all graded by eps.
struct JetPoint {
  int dimension = 4;
  int order = 4;  // spatial jet order k
  TensorField metric;                          // full g_ij(x)
  std::map<std::string, SpatialPoly> functions;  // label -> scalar field
  std::map<std::string, TensorField> sym_fields; // label -> symmetric 2-tensor field
  uint64_t seed = 0;

  // seeded random jet with rational coefficients in [-3,3]/{1..4}
  static JetPoint random(uint64_t seed, int dimension, int order,
                         const std::vector<std::string>& function_labels = {},
                         const std::vector<std::string>& sym_labels = {});

  // flat metric, no perturbation
  static JetPoint flat(int dimension, int order);

  // space form of curvature K in normal coordinates (jet through degree 2)
  static JetPoint space_form(int dimension, double curvature, int order);

  // conformally rescaled metric e^{2 phi} g with phi = this->functions[label]
  JetPoint conformally_scaled(const std::string& phi_label) const;

  // metric perturbed by t * sym_fields[label]
  JetPoint perturbed(const std::string& v_label, double t) const;
};

}  // namespace invforge
