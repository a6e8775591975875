#pragma once

#include <functional>
#include <map>
#include <string>

#include "invforge/term.hpp"

namespace invforge {

// Finite sum of canonical terms with coefficients in Q(n). Homogeneous in
// weight and free-slot arity; zero coefficients are never stored.
class LinearCombination {
 public:
  struct Entry {
    DimensionCoefficient coeff;
    Term term;  // canonical representative
  };

  LinearCombination() = default;

  static LinearCombination zero() { return LinearCombination(); }
  static LinearCombination of(const Term& t, DimensionCoefficient c = DimensionCoefficient(1));

  void add(const Term& t, const DimensionCoefficient& c);
  void add(const LinearCombination& other, const DimensionCoefficient& scale = DimensionCoefficient(1));
  void scale(const DimensionCoefficient& c);

  bool empty() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }
  const std::map<std::string, Entry>& terms() const { return terms_; }

  bool has_homogeneity() const { return has_meta_; }
  int weight() const { return weight_; }
  int arity() const { return arity_; }

  DimensionCoefficient coeff_of(const std::string& key) const;

  // terms of exactly / at least the given length
  LinearCombination stratum(int length) const;
  LinearCombination below_length(int length) const;
  int min_length() const;  // -1 when empty
  int max_length() const;

  LinearCombination mapped(const std::function<LinearCombination(const Term&)>& fn) const;

  friend LinearCombination operator+(const LinearCombination& a, const LinearCombination& b);
  friend LinearCombination operator-(const LinearCombination& a, const LinearCombination& b);
  friend LinearCombination operator*(const DimensionCoefficient& c, const LinearCombination& a);

  // identical canonical keys and coefficients
  friend bool operator==(const LinearCombination& a, const LinearCombination& b);

  std::string to_display() const;

 private:
  std::map<std::string, Entry> terms_;
  bool has_meta_ = false;
  int weight_ = 0;
  int arity_ = 0;
  void check_meta(const Term& t);
};

// product of two contractions: disjoint union of factors, free labels of `a`
// first. Coefficients multiply.
Term tensor_product(const Term& a, const Term& b);
LinearCombination tensor_product(const LinearCombination& a, const LinearCombination& b);

}  // namespace invforge
