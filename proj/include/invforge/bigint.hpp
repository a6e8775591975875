#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace invforge {

// Arbitrary-precision signed integer, base 2^32 little-endian magnitude.
// Only the operations the coefficient field needs.
class BigInt {
 public:
  BigInt() = default;
  BigInt(long long v);

  static BigInt from_string(const std::string& s);
  std::string to_string() const;

  bool is_zero() const { return mag_.empty(); }
  bool is_negative() const { return neg_; }
  int sign() const { return mag_.empty() ? 0 : (neg_ ? -1 : 1); }

  BigInt operator-() const;
  BigInt abs() const;

  friend BigInt operator+(const BigInt& a, const BigInt& b);
  friend BigInt operator-(const BigInt& a, const BigInt& b);
  friend BigInt operator*(const BigInt& a, const BigInt& b);
  // Truncated division (C semantics). b must be nonzero.
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
  friend BigInt operator/(const BigInt& a, const BigInt& b);
  friend BigInt operator%(const BigInt& a, const BigInt& b);

  friend bool operator==(const BigInt& a, const BigInt& b);
  friend bool operator!=(const BigInt& a, const BigInt& b) { return !(a == b); }
  friend bool operator<(const BigInt& a, const BigInt& b);
  friend bool operator>(const BigInt& a, const BigInt& b) { return b < a; }
  friend bool operator<=(const BigInt& a, const BigInt& b) { return !(b < a); }
  friend bool operator>=(const BigInt& a, const BigInt& b) { return !(a < b); }

  static BigInt gcd(BigInt a, BigInt b);

  bool fits_longlong() const;
  long long to_longlong() const;  // asserts fits
  double to_double() const;

 private:
  // invariant: no trailing zero limbs; zero has empty mag_ and neg_ == false
  bool neg_ = false;
  std::vector<uint32_t> mag_;

  void trim();
  static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
  static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
  // requires |a| >= |b|
  static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
};

// Rational number over BigInt, always reduced, denominator > 0.
class BigRat {
 public:
  BigRat() : num_(0), den_(1) {}
  BigRat(long long v) : num_(v), den_(1) {}
  BigRat(BigInt n, BigInt d);

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  int sign() const { return num_.sign(); }

  BigRat operator-() const;
  friend BigRat operator+(const BigRat& a, const BigRat& b);
  friend BigRat operator-(const BigRat& a, const BigRat& b);
  friend BigRat operator*(const BigRat& a, const BigRat& b);
  friend BigRat operator/(const BigRat& a, const BigRat& b);  // b nonzero
  friend bool operator==(const BigRat& a, const BigRat& b);
  friend bool operator!=(const BigRat& a, const BigRat& b) { return !(a == b); }

  double to_double() const;
  std::string to_string() const;

 private:
  BigInt num_, den_;
  void reduce();
};

}  // namespace invforge
