#include "invforge/coefficient.hpp"

#include <cctype>
#include <stdexcept>

#include "invforge/errors.hpp"

namespace invforge {

static const BigRat kZeroRat;

PolyN::PolyN(BigRat c) {
  if (!c.is_zero()) coeffs_.push_back(std::move(c));
}

PolyN PolyN::n() {
  PolyN p;
  p.coeffs_ = {BigRat(0), BigRat(1)};
  return p;
}

void PolyN::trim() {
  while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

const BigRat& PolyN::coeff(int k) const {
  if (k < 0 || k >= (int)coeffs_.size()) return kZeroRat;
  return coeffs_[k];
}

const BigRat& PolyN::leading() const {
  if (coeffs_.empty()) return kZeroRat;
  return coeffs_.back();
}

PolyN PolyN::operator-() const {
  PolyN r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

PolyN operator+(const PolyN& a, const PolyN& b) {
  PolyN r;
  r.coeffs_.resize(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] = a.coeff((int)i) + b.coeff((int)i);
  r.trim();
  return r;
}

PolyN operator-(const PolyN& a, const PolyN& b) { return a + (-b); }

PolyN operator*(const PolyN& a, const PolyN& b) {
  if (a.is_zero() || b.is_zero()) return PolyN();
  PolyN r;
  r.coeffs_.assign(a.coeffs_.size() + b.coeffs_.size() - 1, BigRat(0));
  for (size_t i = 0; i < a.coeffs_.size(); ++i)
    for (size_t j = 0; j < b.coeffs_.size(); ++j)
      r.coeffs_[i + j] = r.coeffs_[i + j] + a.coeffs_[i] * b.coeffs_[j];
  r.trim();
  return r;
}

void PolyN::divmod(const PolyN& a, const PolyN& b, PolyN& q, PolyN& r) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  q = PolyN();
  r = a;
  while (!r.is_zero() && r.degree() >= b.degree()) {
    int d = r.degree() - b.degree();
    BigRat c = r.leading() / b.leading();
    PolyN t;
    t.coeffs_.assign(d + 1, BigRat(0));
    t.coeffs_[d] = c;
    q = q + t;
    r = r - t * b;
  }
}

PolyN PolyN::gcd(PolyN a, PolyN b) {
  while (!b.is_zero()) {
    PolyN q, r;
    divmod(a, b, q, r);
    a = b;
    b = r;
  }
  if (a.is_zero()) return a;
  // make monic
  PolyN lead(BigRat(1) / a.leading());
  return a * lead;
}

BigRat PolyN::eval(const BigRat& x) const {
  BigRat v(0);
  for (size_t i = coeffs_.size(); i-- > 0;) v = v * x + coeffs_[i];
  return v;
}

std::string PolyN::to_string() const {
  if (is_zero()) return "0";
  std::string out;
  for (int k = degree(); k >= 0; --k) {
    const BigRat& c = coeff(k);
    if (c.is_zero()) continue;
    std::string cs = c.to_string();
    bool neg = cs[0] == '-';
    if (neg) cs = cs.substr(1);
    if (!out.empty())
      out += neg ? "-" : "+";
    else if (neg)
      out += "-";
    bool unit = cs == "1" && k > 0;
    if (!unit) out += cs;
    if (k > 0) {
      if (!unit) out += "*";
      out += "n";
      if (k > 1) out += "^" + std::to_string(k);
    }
  }
  return out;
}

// Tiny recursive-descent parser for +,-,*,^,(), integers and 'n'.
namespace {
struct PParser {
  const std::string& s;
  size_t i = 0;
  explicit PParser(const std::string& str) : s(str) {}
  void skip() {
    while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  PolyN expr() {
    PolyN v = term();
    for (;;) {
      if (eat('+'))
        v = v + term();
      else if (eat('-'))
        v = v - term();
      else
        return v;
    }
  }
  PolyN term() {
    PolyN v = factor();
    for (;;) {
      skip();
      if (eat('*'))
        v = v * factor();
      else
        return v;
    }
  }
  PolyN factor() {
    skip();
    if (eat('-')) return -factor();
    PolyN base;
    if (eat('(')) {
      base = expr();
      if (!eat(')')) throw std::invalid_argument("missing ')' in coefficient");
    } else if (i < s.size() && s[i] == 'n') {
      ++i;
      base = PolyN::n();
    } else {
      size_t j = i;
      while (j < s.size() && std::isdigit((unsigned char)s[j])) ++j;
      if (j == i) throw std::invalid_argument("bad coefficient syntax near '" + s.substr(i) + "'");
      base = PolyN(BigRat(BigInt::from_string(s.substr(i, j - i)), BigInt(1)));
      i = j;
    }
    if (eat('^')) {
      size_t j = i;
      while (j < s.size() && std::isdigit((unsigned char)s[j])) ++j;
      if (j == i) throw std::invalid_argument("bad exponent in coefficient");
      long long e = std::stoll(s.substr(i, j - i));
      i = j;
      PolyN v = PolyN::constant(1);
      for (long long k = 0; k < e; ++k) v = v * base;
      return v;
    }
    return base;
  }
};
}  // namespace

PolyN PolyN::parse(const std::string& s) {
  PParser p(s);
  PolyN v = p.expr();
  p.skip();
  if (p.i != s.size()) throw std::invalid_argument("trailing input in coefficient: '" + s.substr(p.i) + "'");
  return v;
}

DimensionCoefficient::DimensionCoefficient(PolyN num, PolyN den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::domain_error("coefficient with zero denominator polynomial");
  normalize();
}

void DimensionCoefficient::normalize() {
  if (num_.is_zero()) {
    den_ = PolyN::constant(1);
    return;
  }
  PolyN g = PolyN::gcd(num_, den_);
  if (g.degree() > 0) {
    PolyN q, r;
    PolyN::divmod(num_, g, q, r);
    num_ = q;
    PolyN::divmod(den_, g, q, r);
    den_ = q;
  }
  // scale so numerator and denominator are integer polynomials with
  // gcd(content(num), content(den)) = 1 and positive denominator lead
  BigInt lcm(1);
  auto fold_lcm = [&](const PolyN& p) {
    for (int k = 0; k <= p.degree(); ++k) {
      const BigRat& c = p.coeff(k);
      if (c.is_zero()) continue;
      BigInt g2 = BigInt::gcd(lcm, c.den());
      lcm = lcm / g2 * c.den();
    }
  };
  fold_lcm(num_);
  fold_lcm(den_);
  PolyN scale(BigRat(lcm, BigInt(1)));
  num_ = num_ * scale;
  den_ = den_ * scale;
  auto content_of = [](const PolyN& p) {
    BigInt content;
    for (int k = 0; k <= p.degree(); ++k) {
      const BigRat& c = p.coeff(k);
      if (c.is_zero()) continue;
      content = content.is_zero() ? c.num().abs() : BigInt::gcd(content, c.num());
    }
    return content;
  };
  BigInt cg = BigInt::gcd(content_of(num_), content_of(den_));
  if (!cg.is_zero() && !(cg == BigInt(1))) {
    PolyN inv(BigRat(BigInt(1), cg));
    num_ = num_ * inv;
    den_ = den_ * inv;
  }
  if (den_.leading().sign() < 0) {
    num_ = -num_;
    den_ = -den_;
  }
}

bool DimensionCoefficient::is_one() const {
  return num_ == den_;
}

DimensionCoefficient DimensionCoefficient::operator-() const {
  DimensionCoefficient r = *this;
  r.num_ = -r.num_;
  return r;
}

DimensionCoefficient operator+(const DimensionCoefficient& a, const DimensionCoefficient& b) {
  return DimensionCoefficient(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}
DimensionCoefficient operator-(const DimensionCoefficient& a, const DimensionCoefficient& b) {
  return a + (-b);
}
DimensionCoefficient operator*(const DimensionCoefficient& a, const DimensionCoefficient& b) {
  return DimensionCoefficient(a.num_ * b.num_, a.den_ * b.den_);
}
DimensionCoefficient operator/(const DimensionCoefficient& a, const DimensionCoefficient& b) {
  if (b.is_zero()) throw std::domain_error("coefficient division by zero");
  return DimensionCoefficient(a.num_ * b.den_, a.den_ * b.num_);
}
bool operator==(const DimensionCoefficient& a, const DimensionCoefficient& b) {
  return (a - b).is_zero();
}

BigRat DimensionCoefficient::at_dimension(long long n) const {
  BigRat x(n);
  BigRat d = den_.eval(x);
  if (d.is_zero())
    throw EvalError("coefficient denominator " + den_.to_string() + " vanishes at n=" + std::to_string(n));
  return num_.eval(x) / d;
}

double DimensionCoefficient::at_dimension_double(long long n) const {
  return at_dimension(n).to_double();
}

std::string DimensionCoefficient::to_string() const {
  if (den_ == PolyN::constant(1)) return num_.to_string();
  std::string ns = num_.to_string();
  if (num_.degree() > 0) ns = "(" + ns + ")";
  std::string ds = den_.to_string();
  if (den_.degree() > 0 || ds[0] == '-') ds = "(" + ds + ")";
  return ns + "/" + ds;
}

DimensionCoefficient DimensionCoefficient::parse(const std::string& s) {
  // split at a top-level '/'
  int depth = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == '/' && depth == 0)
      return DimensionCoefficient(PolyN::parse(s.substr(0, i)), PolyN::parse(s.substr(i + 1)));
  }
  return DimensionCoefficient(PolyN::parse(s), PolyN::constant(1));
}

}  // namespace invforge
