#include "invforge/combination.hpp"

#include <sstream>

namespace invforge {

LinearCombination LinearCombination::of(const Term& t, DimensionCoefficient c) {
  LinearCombination lc;
  lc.add(t, c);
  return lc;
}

void LinearCombination::check_meta(const Term& t) {
  int w = invforge::weight(t);
  int a = t.arity();
  if (!has_meta_) {
    has_meta_ = true;
    weight_ = w;
    arity_ = a;
    return;
  }
  if (w != weight_)
    throw HomogeneityError("mixed weights in combination: " + std::to_string(weight_) +
                           " vs " + std::to_string(w));
  if (a != arity_)
    throw HomogeneityError("mixed free-slot arity in combination: " +
                           std::to_string(arity_) + " vs " + std::to_string(a));
}

void LinearCombination::add(const Term& t, const DimensionCoefficient& c) {
  if (c.is_zero()) return;
  Canonical cn = canonicalize(t);
  if (cn.sign == 0) return;
  check_meta(t);
  DimensionCoefficient eff = cn.sign < 0 ? -c : c;
  auto it = terms_.find(cn.key);
  if (it == terms_.end()) {
    terms_.emplace(cn.key, Entry{eff, cn.term});
    return;
  }
  it->second.coeff = it->second.coeff + eff;
  if (it->second.coeff.is_zero()) terms_.erase(it);
}

void LinearCombination::add(const LinearCombination& other, const DimensionCoefficient& scale) {
  for (const auto& [k, e] : other.terms_) add(e.term, e.coeff * scale);
}

void LinearCombination::scale(const DimensionCoefficient& c) {
  if (c.is_zero()) {
    terms_.clear();
    return;
  }
  for (auto& [k, e] : terms_) e.coeff = e.coeff * c;
}

DimensionCoefficient LinearCombination::coeff_of(const std::string& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? DimensionCoefficient(0) : it->second.coeff;
}

LinearCombination LinearCombination::stratum(int length) const {
  LinearCombination out;
  for (const auto& [k, e] : terms_)
    if (e.term.length() == length) out.add(e.term, e.coeff);
  return out;
}

LinearCombination LinearCombination::below_length(int length) const {
  LinearCombination out;
  for (const auto& [k, e] : terms_)
    if (e.term.length() < length) out.add(e.term, e.coeff);
  return out;
}

int LinearCombination::min_length() const {
  int m = -1;
  for (const auto& [k, e] : terms_)
    if (m < 0 || e.term.length() < m) m = e.term.length();
  return m;
}

int LinearCombination::max_length() const {
  int m = -1;
  for (const auto& [k, e] : terms_)
    if (e.term.length() > m) m = e.term.length();
  return m;
}

LinearCombination LinearCombination::mapped(
    const std::function<LinearCombination(const Term&)>& fn) const {
  LinearCombination out;
  for (const auto& [k, e] : terms_) out.add(fn(e.term), e.coeff);
  return out;
}

LinearCombination operator+(const LinearCombination& a, const LinearCombination& b) {
  LinearCombination out = a;
  out.add(b);
  return out;
}

LinearCombination operator-(const LinearCombination& a, const LinearCombination& b) {
  LinearCombination out = a;
  out.add(b, DimensionCoefficient(-1));
  return out;
}

LinearCombination operator*(const DimensionCoefficient& c, const LinearCombination& a) {
  LinearCombination out = a;
  out.scale(c);
  return out;
}

bool operator==(const LinearCombination& a, const LinearCombination& b) {
  return (a - b).empty();
}

std::string LinearCombination::to_display() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, e] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << e.coeff.to_string() << " * " << invforge::to_display(e.term);
  }
  return os.str();
}

Term tensor_product(const Term& a, const Term& b) {
  if (a.mode != b.mode) throw StructuralError("tensor_product: mode mismatch");
  Term out = a;
  int off = (int)a.factors.size();
  for (const Factor& f : b.factors) out.factors.push_back(f);
  auto sh = [&](SlotRef s) {
    s.factor += off;
    return s;
  };
  for (const Edge& e : b.edges) out.edges.push_back({sh(e.a), sh(e.b)});
  for (const SlotRef& s : b.free) out.free.push_back(sh(s));
  return out;
}

LinearCombination tensor_product(const LinearCombination& a, const LinearCombination& b) {
  LinearCombination out;
  for (const auto& [ka, ea] : a.terms())
    for (const auto& [kb, eb] : b.terms())
      out.add(tensor_product(ea.term, eb.term), ea.coeff * eb.coeff);
  return out;
}

}  // namespace invforge
