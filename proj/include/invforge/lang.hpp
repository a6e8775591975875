#pragma once

#include "invforge/combination.hpp"

namespace invforge {

// Parses the contr(...)/pcontr(...) expression language (see
// docs/expression-language.md). Index names are surface-only: a name used
// twice is a contraction, names declared before '|' in pcontr are the free
// slots. Throws ParseError with position-carrying messages.
LinearCombination parse_expression(const std::string& text, Mode mode = Mode::Graded);

// parse-compatible printing of a combination (canonical term order)
std::string print_expression(const LinearCombination& lc);

}  // namespace invforge
