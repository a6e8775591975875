#pragma once

#include <string>
#include <vector>

#include "invforge/combination.hpp"
#include "invforge/jet.hpp"
#include "invforge/solver.hpp"

namespace invforge {

// canonical JSON: stable field order, coefficients as reduced polynomial-pair
// strings; schema version "invforge/1"
std::string to_json(const Term& t, int indent = -1);
std::string to_json(const LinearCombination& lc, int indent = -1);
std::string to_json(const SolveResult& r, int indent = -1);

Term term_from_json(const std::string& text);
LinearCombination combination_from_json(const std::string& text);

// the published jet corpus: seeded descriptors, regenerated deterministically
struct JetDescriptor {
  uint64_t seed;
  int dimension;
  int order;
  std::vector<std::string> functions;
  std::vector<std::string> sym_fields;
  JetPoint realize() const {
    return JetPoint::random(seed, dimension, order, functions, sym_fields);
  }
};

std::vector<JetDescriptor> load_jet_corpus(const std::string& path);
void write_jet_corpus(const std::string& path, const std::vector<JetDescriptor>& jets);
std::vector<JetDescriptor> default_jet_corpus();  // the 20 shipped descriptors

}  // namespace invforge
