#include "invforge/bigint.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace invforge {

BigInt::BigInt(long long v) {
  neg_ = v < 0;
  unsigned long long u = neg_ ? -(unsigned long long)v : (unsigned long long)v;
  while (u) {
    mag_.push_back((uint32_t)(u & 0xffffffffu));
    u >>= 32;
  }
}

void BigInt::trim() {
  while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
  if (mag_.empty()) neg_ = false;
}

int BigInt::cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  return 0;
}

std::vector<uint32_t> BigInt::add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  const std::vector<uint32_t>&x = a.size() >= b.size() ? a : b;
  const std::vector<uint32_t>&y = a.size() >= b.size() ? b : a;
  std::vector<uint32_t> r(x.size() + 1, 0);
  uint64_t carry = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    uint64_t s = carry + x[i] + (i < y.size() ? y[i] : 0);
    r[i] = (uint32_t)s;
    carry = s >> 32;
  }
  r[x.size()] = (uint32_t)carry;
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

std::vector<uint32_t> BigInt::sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  std::vector<uint32_t> r(a.size(), 0);
  int64_t borrow = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    int64_t s = (int64_t)a[i] - borrow - (i < b.size() ? b[i] : 0);
    if (s < 0) {
      s += ((int64_t)1 << 32);
      borrow = 1;
    } else {
      borrow = 0;
    }
    r[i] = (uint32_t)s;
  }
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

BigInt BigInt::operator-() const {
  BigInt r = *this;
  if (!r.mag_.empty()) r.neg_ = !r.neg_;
  return r;
}

BigInt BigInt::abs() const {
  BigInt r = *this;
  r.neg_ = false;
  return r;
}

BigInt operator+(const BigInt& a, const BigInt& b) {
  BigInt r;
  if (a.neg_ == b.neg_) {
    r.mag_ = BigInt::add_mag(a.mag_, b.mag_);
    r.neg_ = a.neg_;
  } else {
    int c = BigInt::cmp_mag(a.mag_, b.mag_);
    if (c == 0) return BigInt();
    if (c > 0) {
      r.mag_ = BigInt::sub_mag(a.mag_, b.mag_);
      r.neg_ = a.neg_;
    } else {
      r.mag_ = BigInt::sub_mag(b.mag_, a.mag_);
      r.neg_ = b.neg_;
    }
  }
  r.trim();
  return r;
}

BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

BigInt operator*(const BigInt& a, const BigInt& b) {
  if (a.is_zero() || b.is_zero()) return BigInt();
  BigInt r;
  r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
  for (size_t i = 0; i < a.mag_.size(); ++i) {
    uint64_t carry = 0;
    for (size_t j = 0; j < b.mag_.size(); ++j) {
      uint64_t cur = r.mag_[i + j] + (uint64_t)a.mag_[i] * b.mag_[j] + carry;
      r.mag_[i + j] = (uint32_t)cur;
      carry = cur >> 32;
    }
    size_t k = i + b.mag_.size();
    while (carry) {
      uint64_t cur = r.mag_[k] + carry;
      r.mag_[k] = (uint32_t)cur;
      carry = cur >> 32;
      ++k;
    }
  }
  r.neg_ = a.neg_ != b.neg_;
  r.trim();
  return r;
}

// Knuth algorithm D on normalized limbs.
void BigInt::divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
  if (b.is_zero()) throw std::domain_error("BigInt division by zero");
  int c = cmp_mag(a.mag_, b.mag_);
  if (c < 0) {
    q = BigInt();
    r = a;
    return;
  }
  if (b.mag_.size() == 1) {
    uint64_t d = b.mag_[0];
    std::vector<uint32_t> qm(a.mag_.size(), 0);
    uint64_t rem = 0;
    for (size_t i = a.mag_.size(); i-- > 0;) {
      uint64_t cur = (rem << 32) | a.mag_[i];
      qm[i] = (uint32_t)(cur / d);
      rem = cur % d;
    }
    q = BigInt();
    q.mag_ = qm;
    q.neg_ = a.neg_ != b.neg_;
    q.trim();
    r = BigInt((long long)rem);
    if (a.neg_ && !r.is_zero()) r.neg_ = true;
    return;
  }
  // normalize so divisor's top limb has high bit set
  int shift = 0;
  uint32_t top = b.mag_.back();
  while (!(top & 0x80000000u)) {
    top <<= 1;
    ++shift;
  }
  auto shl = [&](const std::vector<uint32_t>& v) {
    std::vector<uint32_t> out(v.size() + 1, 0);
    for (size_t i = 0; i < v.size(); ++i) {
      out[i] |= (uint32_t)(((uint64_t)v[i] << shift) & 0xffffffffu);
      out[i + 1] |= shift ? (uint32_t)(v[i] >> (32 - shift)) : 0;
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
  };
  std::vector<uint32_t> u = shl(a.mag_), v = shl(b.mag_);
  size_t nlimb = v.size(), m = u.size() - nlimb;
  u.push_back(0);
  std::vector<uint32_t> qm(m + 1, 0);
  for (size_t j = m + 1; j-- > 0;) {
    uint64_t num = ((uint64_t)u[j + nlimb] << 32) | u[j + nlimb - 1];
    uint64_t qhat = num / v[nlimb - 1];
    uint64_t rhat = num % v[nlimb - 1];
    while (qhat > 0xffffffffull ||
           qhat * v[nlimb - 2] > ((rhat << 32) | u[j + nlimb - 2])) {
      --qhat;
      rhat += v[nlimb - 1];
      if (rhat > 0xffffffffull) break;
    }
    // multiply-subtract
    int64_t borrow = 0;
    uint64_t carry = 0;
    for (size_t i = 0; i < nlimb; ++i) {
      uint64_t p = qhat * v[i] + carry;
      carry = p >> 32;
      int64_t t = (int64_t)u[i + j] - (int64_t)(uint32_t)p - borrow;
      if (t < 0) {
        t += ((int64_t)1 << 32);
        borrow = 1;
      } else {
        borrow = 0;
      }
      u[i + j] = (uint32_t)t;
    }
    int64_t t = (int64_t)u[j + nlimb] - (int64_t)carry - borrow;
    if (t < 0) {
      // qhat was one too large; add back
      t += ((int64_t)1 << 32);
      --qhat;
      uint64_t c2 = 0;
      for (size_t i = 0; i < nlimb; ++i) {
        uint64_t s = (uint64_t)u[i + j] + v[i] + c2;
        u[i + j] = (uint32_t)s;
        c2 = s >> 32;
      }
      t += (int64_t)c2;
    }
    u[j + nlimb] = (uint32_t)t;
    qm[j] = (uint32_t)qhat;
  }
  // remainder = u >> shift, low nlimb limbs
  std::vector<uint32_t> rm(nlimb, 0);
  for (size_t i = 0; i < nlimb; ++i) {
    uint64_t lo = u[i] >> shift;
    uint64_t hi = (shift && i + 1 < u.size()) ? ((uint64_t)u[i + 1] << (32 - shift)) : 0;
    rm[i] = (uint32_t)((lo | hi) & 0xffffffffu);
  }
  q = BigInt();
  q.mag_ = qm;
  q.neg_ = a.neg_ != b.neg_;
  q.trim();
  r = BigInt();
  r.mag_ = rm;
  r.neg_ = a.neg_;
  r.trim();
}

BigInt operator/(const BigInt& a, const BigInt& b) {
  BigInt q, r;
  BigInt::divmod(a, b, q, r);
  return q;
}

BigInt operator%(const BigInt& a, const BigInt& b) {
  BigInt q, r;
  BigInt::divmod(a, b, q, r);
  return r;
}

bool operator==(const BigInt& a, const BigInt& b) {
  return a.neg_ == b.neg_ && a.mag_ == b.mag_;
}

bool operator<(const BigInt& a, const BigInt& b) {
  if (a.neg_ != b.neg_) return a.neg_;
  int c = BigInt::cmp_mag(a.mag_, b.mag_);
  return a.neg_ ? c > 0 : c < 0;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
  a.neg_ = false;
  b.neg_ = false;
  while (!b.is_zero()) {
    BigInt q, r;
    divmod(a, b, q, r);
    a = b;
    b = r;
  }
  return a;
}

bool BigInt::fits_longlong() const {
  if (mag_.size() > 2) return false;
  unsigned long long v = 0;
  for (size_t i = mag_.size(); i-- > 0;) v = (v << 32) | mag_[i];
  return neg_ ? v <= 0x8000000000000000ull : v < 0x8000000000000000ull;
}

long long BigInt::to_longlong() const {
  assert(fits_longlong());
  unsigned long long v = 0;
  for (size_t i = mag_.size(); i-- > 0;) v = (v << 32) | mag_[i];
  return neg_ ? -(long long)v : (long long)v;
}

double BigInt::to_double() const {
  double v = 0;
  for (size_t i = mag_.size(); i-- > 0;) v = v * 4294967296.0 + mag_[i];
  return neg_ ? -v : v;
}

std::string BigInt::to_string() const {
  if (is_zero()) return "0";
  BigInt t = abs();
  std::string digits;
  BigInt ten(10);
  while (!t.is_zero()) {
    BigInt q, r;
    divmod(t, ten, q, r);
    digits.push_back((char)('0' + (r.is_zero() ? 0 : r.mag_[0])));
    t = q;
  }
  if (neg_) digits.push_back('-');
  return std::string(digits.rbegin(), digits.rend());
}

BigInt BigInt::from_string(const std::string& s) {
  BigInt r;
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  if (i == s.size()) throw std::invalid_argument("empty integer literal");
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad integer literal");
    r = r * BigInt(10) + BigInt(s[i] - '0');
  }
  if (neg) r = -r;
  return r;
}

BigRat::BigRat(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) {
  if (den_.is_zero()) throw std::domain_error("rational with zero denominator");
  reduce();
}

void BigRat::reduce() {
  if (num_.is_zero()) {
    den_ = BigInt(1);
    return;
  }
  if (den_.is_negative()) {
    num_ = -num_;
    den_ = -den_;
  }
  BigInt g = BigInt::gcd(num_, den_);
  if (!(g == BigInt(1))) {
    num_ = num_ / g;
    den_ = den_ / g;
  }
}

BigRat BigRat::operator-() const {
  BigRat r = *this;
  r.num_ = -r.num_;
  return r;
}

BigRat operator+(const BigRat& a, const BigRat& b) {
  return BigRat(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}
BigRat operator-(const BigRat& a, const BigRat& b) { return a + (-b); }
BigRat operator*(const BigRat& a, const BigRat& b) {
  return BigRat(a.num_ * b.num_, a.den_ * b.den_);
}
BigRat operator/(const BigRat& a, const BigRat& b) {
  if (b.is_zero()) throw std::domain_error("rational division by zero");
  return BigRat(a.num_ * b.den_, a.den_ * b.num_);
}
bool operator==(const BigRat& a, const BigRat& b) {
  return a.num_ == b.num_ && a.den_ == b.den_;
}

double BigRat::to_double() const { return num_.to_double() / den_.to_double(); }

std::string BigRat::to_string() const {
  if (den_ == BigInt(1)) return num_.to_string();
  return num_.to_string() + "/" + den_.to_string();
}

}  // namespace invforge
