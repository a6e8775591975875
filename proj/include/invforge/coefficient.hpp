#pragma once

#include <string>
#include <vector>

#include "invforge/bigint.hpp"

namespace invforge {

// Univariate polynomial in the dimension symbol n, rational coefficients,
// coeffs_[k] = coefficient of n^k, no trailing zeros.
class PolyN {
 public:
  PolyN() = default;
  explicit PolyN(BigRat c);
  static PolyN n();  // the symbol itself
  static PolyN constant(long long v) { return PolyN(BigRat(v)); }

  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return (int)coeffs_.size() - 1; }  // -1 for zero
  const BigRat& coeff(int k) const;
  const BigRat& leading() const;

  PolyN operator-() const;
  friend PolyN operator+(const PolyN& a, const PolyN& b);
  friend PolyN operator-(const PolyN& a, const PolyN& b);
  friend PolyN operator*(const PolyN& a, const PolyN& b);
  static void divmod(const PolyN& a, const PolyN& b, PolyN& q, PolyN& r);
  static PolyN gcd(PolyN a, PolyN b);  // monic

  friend bool operator==(const PolyN& a, const PolyN& b) { return a.coeffs_ == b.coeffs_; }

  BigRat eval(const BigRat& x) const;
  std::string to_string() const;  // e.g. "n^2-3*n+2"

  // parses integer-coefficient expressions like "n", "n-3", "2*n^2+1"
  static PolyN parse(const std::string& s);

 private:
  std::vector<BigRat> coeffs_;
  void trim();
};

// Element of Q(n): reduced fraction of integer-primitive polynomials in n,
// denominator with positive leading coefficient. Exact field arithmetic.
class DimensionCoefficient {
 public:
  DimensionCoefficient() : num_(), den_(PolyN::constant(1)) {}
  DimensionCoefficient(long long v) : num_(PolyN::constant(v)), den_(PolyN::constant(1)) {}
  DimensionCoefficient(PolyN num, PolyN den);
  explicit DimensionCoefficient(const BigRat& q) : num_(PolyN(q)), den_(PolyN::constant(1)) {}

  static DimensionCoefficient n() { return DimensionCoefficient(PolyN::n(), PolyN::constant(1)); }
  static DimensionCoefficient rational(long long p, long long q) {
    return DimensionCoefficient(BigRat(BigInt(p), BigInt(q)));
  }

  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const;

  const PolyN& num() const { return num_; }
  const PolyN& den() const { return den_; }

  DimensionCoefficient operator-() const;
  friend DimensionCoefficient operator+(const DimensionCoefficient& a, const DimensionCoefficient& b);
  friend DimensionCoefficient operator-(const DimensionCoefficient& a, const DimensionCoefficient& b);
  friend DimensionCoefficient operator*(const DimensionCoefficient& a, const DimensionCoefficient& b);
  friend DimensionCoefficient operator/(const DimensionCoefficient& a, const DimensionCoefficient& b);
  friend bool operator==(const DimensionCoefficient& a, const DimensionCoefficient& b);
  friend bool operator!=(const DimensionCoefficient& a, const DimensionCoefficient& b) { return !(a == b); }

  // substitute an integer dimension; throws EvalError if the denominator vanishes there
  BigRat at_dimension(long long n) const;
  double at_dimension_double(long long n) const;

  std::string to_string() const;  // "p(n)/q(n)" reduced, stable
  static DimensionCoefficient parse(const std::string& s);

 private:
  PolyN num_, den_;
  void normalize();
};

}  // namespace invforge
