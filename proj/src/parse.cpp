#include "invforge/lang.hpp"

#include <cctype>
#include <cstring>
#include <map>
#include <sstream>

namespace invforge {

namespace {

struct Lexer {
  const std::string& s;
  size_t i = 0;
  explicit Lexer(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at position " + std::to_string(i));
  }
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
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  bool peek(char c) {
    skip();
    return i < s.size() && s[i] == c;
  }
  bool peek_word(const char* w) {
    skip();
    size_t n = std::strlen(w);
    if (s.compare(i, n, w) != 0) return false;
    char next = i + n < s.size() ? s[i + n] : '\0';
    return !(std::isalnum((unsigned char)next) || next == '_');
  }
  bool eat_word(const char* w) {
    if (!peek_word(w)) return false;
    i += std::strlen(w);
    return true;
  }
  std::string ident() {
    skip();
    size_t j = i;
    while (j < s.size() && (std::isalnum((unsigned char)s[j]) || s[j] == '_')) ++j;
    if (j == i) fail("expected an index name");
    std::string out = s.substr(i, j - i);
    i = j;
    return out;
  }
  std::string quoted() {
    expect('"');
    size_t j = s.find('"', i);
    if (j == std::string::npos) fail("unterminated label");
    std::string out = s.substr(i, j - i);
    i = j + 1;
    return out;
  }
  bool done() {
    skip();
    return i >= s.size();
  }
};

struct IndexUse {
  SlotRef slot;
  size_t position;
};

struct ContrParser {
  Lexer& lx;
  Mode mode;

  Term parse_contraction() {
    bool partial;
    if (lx.eat_word("pcontr"))
      partial = true;
    else if (lx.eat_word("contr"))
      partial = false;
    else
      lx.fail("expected contr(...) or pcontr(...)");
    lx.expect('(');
    std::vector<std::string> free_names;
    if (partial) {
      // free names up to '|'
      for (;;) {
        free_names.push_back(lx.ident());
        if (lx.eat(',')) continue;
        break;
      }
      lx.expect('|');
    }
    Term t;
    t.mode = mode;
    std::map<std::string, std::vector<IndexUse>> uses;
    for (;;) {
      parse_factor(t, uses);
      if (lx.eat('*')) continue;
      break;
    }
    lx.expect(')');
    // resolve names: free names once, others exactly twice
    t.free.resize(free_names.size());
    std::vector<bool> free_seen(free_names.size(), false);
    for (auto& [name, where] : uses) {
      int fidx = -1;
      for (size_t k = 0; k < free_names.size(); ++k)
        if (free_names[k] == name) fidx = (int)k;
      if (fidx >= 0) {
        if (where.size() != 1)
          throw ParseError("free index '" + name + "' used " + std::to_string(where.size()) +
                           " times (expected once)");
        t.free[fidx] = where[0].slot;
        free_seen[fidx] = true;
        continue;
      }
      if (where.size() != 2) {
        std::ostringstream os;
        os << "index '" << name << "' appears " << where.size() << " time(s) at position(s)";
        for (auto& u : where) os << ' ' << u.position;
        os << "; contracted indices must appear exactly twice";
        throw ParseError(os.str());
      }
      t.edges.push_back({where[0].slot, where[1].slot});
    }
    for (size_t k = 0; k < free_names.size(); ++k)
      if (!free_seen[k])
        throw ParseError("declared free index '" + free_names[k] + "' never used");
    t.validate();
    return t;
  }

  void parse_factor(Term& t, std::map<std::string, std::vector<IndexUse>>& uses) {
    std::vector<std::string> derivs;
    if (lx.eat_word("nabla")) {
      lx.expect('(');
      for (;;) {
        derivs.push_back(lx.ident());
        if (lx.eat(',')) continue;
        break;
      }
      lx.expect(')');
    }
    Factor f;
    std::vector<std::string> internals;
    auto args = [&](int arity) {
      lx.expect('(');
      for (int k = 0; k < arity; ++k) {
        internals.push_back(lx.ident());
        if (k + 1 < arity) lx.expect(',');
      }
      lx.expect(')');
    };
    lx.skip();
    if (lx.eat_word("Ric")) {
      f.kind = FactorKind::Ricci;
      args(2);
    } else if (lx.eat_word("R")) {
      f.kind = FactorKind::Riemann;
      args(4);
    } else if (lx.eat_word("W")) {
      f.kind = FactorKind::Weyl;
      args(4);
    } else if (lx.eat_word("P")) {
      f.kind = FactorKind::Schouten;
      args(2);
    } else if (lx.eat_word("Scal")) {
      f.kind = FactorKind::ScalarR;
    } else if (lx.eat_word("TrP")) {
      f.kind = FactorKind::TracedSchouten;
    } else if (lx.eat_word("Cot")) {
      f.kind = FactorKind::Cotton;
      args(3);
    } else if (lx.eat_word("g")) {
      f.kind = FactorKind::Metric;
      args(2);
    } else if (lx.eat_word("f")) {
      f.kind = FactorKind::FunctionJet;
      f.label = lx.quoted();
      // jet indices are additional (innermost) derivative slots
      if (lx.peek('(')) {
        lx.expect('(');
        if (!lx.peek(')'))
          for (;;) {
            derivs.push_back(lx.ident());
            if (lx.eat(',')) continue;
            break;
          }
        lx.expect(')');
      }
    } else if (lx.eat_word("v")) {
      f.kind = FactorKind::SymField;
      f.label = lx.quoted();
      args(2);
    } else {
      lx.fail("unknown factor head");
    }
    f.deriv = (int)derivs.size();
    int fi = (int)t.factors.size();
    t.factors.push_back(f);
    for (size_t k = 0; k < derivs.size(); ++k)
      uses[derivs[k]].push_back({{fi, (int)k}, lx.i});
    for (size_t k = 0; k < internals.size(); ++k)
      uses[internals[k]].push_back({{fi, f.deriv + (int)k}, lx.i});
  }
};

// coefficient literal: integers, fractions, parenthesized polynomials in n,
// products and quotients thereof. Returns true if the lexer matched one.
bool try_parse_coefficient(Lexer& lx, DimensionCoefficient& out) {
  lx.skip();
  size_t start = lx.i;
  // scan a maximal prefix of coefficient-looking characters that is not the
  // start of a contraction
  if (lx.peek_word("contr") || lx.peek_word("pcontr")) return false;
  int depth = 0;
  size_t j = lx.i;
  while (j < lx.s.size()) {
    char c = lx.s[j];
    if (c == '(') ++depth;
    if (c == ')') {
      if (depth == 0) break;
      --depth;
    }
    if (depth == 0 && c == '*') {
      // lookahead: does a contraction follow?
      size_t k = j + 1;
      while (k < lx.s.size() && std::isspace((unsigned char)lx.s[k])) ++k;
      if (lx.s.compare(k, 6, "contr(") == 0 || lx.s.compare(k, 7, "pcontr(") == 0 ||
          lx.s.compare(k, 6, "contr ") == 0 || lx.s.compare(k, 7, "pcontr ") == 0)
        break;
    }
    if (depth == 0 && (c == '+' || (c == '-' && j > start))) break;
    if (!(std::isdigit((unsigned char)c) || c == 'n' || c == '^' || c == '*' || c == '/' ||
          c == '(' || c == ')' || c == '-' || c == '+' || std::isspace((unsigned char)c)))
      return false;
    ++j;
  }
  if (j == start) return false;
  std::string text = lx.s.substr(start, j - start);
  // trim
  while (!text.empty() && std::isspace((unsigned char)text.back())) text.pop_back();
  if (text.empty()) return false;
  try {
    out = DimensionCoefficient::parse(text);
  } catch (const std::exception&) {
    return false;
  }
  lx.i = j;
  return true;
}

}  // namespace

LinearCombination parse_expression(const std::string& text, Mode mode) {
  Lexer lx(text);
  LinearCombination out;
  bool first = true;
  for (;;) {
    lx.skip();
    if (lx.done()) {
      if (first) throw ParseError("empty expression");
      break;
    }
    DimensionCoefficient sign(1);
    if (lx.eat('-'))
      sign = DimensionCoefficient(-1);
    else if (!first)
      lx.expect('+');
    else
      lx.eat('+');
    DimensionCoefficient coeff(1);
    bool have_coeff = try_parse_coefficient(lx, coeff);
    if (have_coeff) {
      lx.skip();
      if (!lx.eat('*')) {
        // bare coefficient is only legal as "0"
        if (coeff.is_zero() && lx.done()) break;
        if (lx.done()) throw ParseError("number without a contraction (only '0' is allowed)");
      }
    }
    ContrParser cp{lx, mode};
    Term t = cp.parse_contraction();
    out.add(t, sign * coeff);
    first = false;
  }
  return out;
}

std::string print_expression(const LinearCombination& lc) {
  if (lc.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, e] : lc.terms()) {
    std::string c = e.coeff.to_string();
    bool neg = !c.empty() && c[0] == '-';
    if (neg) c = c.substr(1);
    if (first) {
      if (neg) os << "- ";
    } else {
      os << (neg ? " - " : " + ");
    }
    first = false;
    bool unit = c == "1";
    if (!unit) {
      bool needs_parens = c.find_first_of("+-") != std::string::npos && c[0] != '(';
      os << (needs_parens ? "(" + c + ")" : c) << " * ";
    }
    os << to_display(e.term);
  }
  return os.str();
}

}  // namespace invforge
