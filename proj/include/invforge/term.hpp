#pragma once

#include <optional>
#include <string>
#include <vector>

#include "invforge/coefficient.hpp"
#include "invforge/errors.hpp"

namespace invforge {

// Tensor factor kinds. Riemann-kind traces are carried as explicit edges, so
// Ricci and ScalarR only appear where the bookkeeping wants them as factors.
enum class FactorKind {
  Riemann,         // nabla^(m) R_ijkl
  Ricci,           // nabla^(m) Ric_ij
  ScalarR,         // nabla^(m) R (scalar curvature)
  Weyl,            // nabla^(m) W_ijkl
  Schouten,        // nabla^(m) P_ij
  TracedSchouten,  // nabla^(m) P^a_a
  Cotton,          // nabla^(m) C_ijk  (C_ijk = nabla_k P_ij - nabla_j P_ik)
  Metric,          // g_ab, survives only with two free slots
  FunctionJet,     // nabla^(m) f for a labeled scalar function
  SymField,        // nabla^(m) v_ab, labeled symmetric 2-tensor (metric variation direction)
};

const char* kind_name(FactorKind k);
int kind_arity(FactorKind k);
// conformal-scaling contribution of the lowered factor (t^2 g scaling degree)
int kind_scale(FactorKind k);
bool kind_is_curvature(FactorKind k);  // counts toward -(m+2)-style weight

enum class Mode { Exact, Graded };

struct Factor {
  FactorKind kind = FactorKind::Riemann;
  int deriv = 0;
  std::string label;  // FunctionJet / SymField only

  int slot_count() const { return deriv + kind_arity(kind); }
  bool operator==(const Factor& o) const {
    return kind == o.kind && deriv == o.deriv && label == o.label;
  }
};

struct SlotRef {
  int factor = -1;
  int slot = -1;
  bool operator==(const SlotRef& o) const { return factor == o.factor && slot == o.slot; }
  bool operator<(const SlotRef& o) const {
    return factor != o.factor ? factor < o.factor : slot < o.slot;
  }
};

struct Edge {
  SlotRef a, b;
};

// One complete or partial contraction: a multigraph of factors whose slots are
// either paired (edges) or free (ordered labels i_1..i_alpha).
// Slot layout per factor: 0..deriv-1 are derivative slots (0 = outermost),
// then kind_arity internal slots.
struct Term {
  std::vector<Factor> factors;
  std::vector<Edge> edges;
  std::vector<SlotRef> free;  // position = free-label ordinal
  Mode mode = Mode::Graded;

  int length() const { return (int)factors.size(); }
  int arity() const { return (int)free.size(); }
  bool is_deriv_slot(const SlotRef& s) const { return s.slot < factors[s.factor].deriv; }

  // throws StructuralError when a slot is unpaired/doubly used
  void validate() const;

  // finds the edge or free position using a slot; -1 if not found
  int edge_of(const SlotRef& s) const;
  int free_of(const SlotRef& s) const;
  SlotRef partner(const SlotRef& s) const;  // throws if s is free

  std::string raw_key() const;  // deterministic serialization of the raw graph
};

// homogeneity degree under g -> t^2 g, free indices counted lowered
int weight(const Term& t);

// The paper's bookkeeping counts for one term.
struct Counts {
  int length = 0;     // sigma: number of factors
  int deltaW = 0;     // internal contractions on Weyl factors
  int deltaP = 0;     // internal contractions on Schouten factors + TracedSchouten factors
  int deltaR = 0;     // internal contractions on Riemann factors
  int deltaRic = 0;   // internal contractions on Ricci factors + q + 2*alpha
  int deltaPsi = 0;   // internal contractions on psi-family jets
  int deltaJet = 0;   // internal contractions on all function jets
  int q = 0;          // Ricci factors
  int alpha = 0;      // ScalarR factors
  int deltaAbs = 0;   // |Delta|: Delta(psi-family) factors plus underived ScalarR factors
  int arity = 0;
  int weight = 0;
  int delta() const { return deltaR + deltaRic + deltaPsi; }      // (4.7)-world delta
  int deltaWP() const { return deltaW + deltaP; }                 // (5.16)-world delta
};
Counts counts(const Term& t);

// label family: leading alphabetic run ("psi3" -> "psi")
std::string label_family(const std::string& label);

enum class TermClass { Target, Contributor, Cumbersome1, Cumbersome2, None };
// Def-5.9-style classification of a (4.7)-form term relative to the minimum mu
TermClass classify(const Term& t, int mu);
const char* term_class_name(TermClass c);

// The s = sigma-1 / sigma-2 "good" predicate on a W-normalized combination
// (the 5.2-section special definition), at integer dimension n.
bool is_good(const class LinearCombination& lc, int s, int sigma, int n);

// Canonical form of a term's symmetry orbit.
struct Canonical {
  Term term;        // canonical representative (meaningless when sign == 0)
  std::string key;  // stable orbit key
  int sign = 1;     // +1 / -1, or 0 when the term vanishes by a monoterm symmetry
  // original (factor, slot) -> representative (factor, slot)
  std::vector<std::vector<SlotRef>> slot_map;
};

Canonical canonicalize(const Term& t);

// slow independent check used by tests: orbit equality by exhaustive search
bool brute_force_equal(const Term& a, const Term& b, int* sign_out = nullptr);

// ---- construction helpers ----

// single factor, all slots free in slot order
Term single_factor_term(Factor f, Mode mode = Mode::Graded);

// adds a derivative slot to a factor; outermost when innermost == false.
// Slot refs in the returned term are remapped accordingly; `touch` refs are
// remapped in place when given.
Term add_derivative(const Term& t, int factor, bool innermost, std::vector<SlotRef*> touch = {});

// removes one slot of a factor; the slot must be free or the caller must have
// detached it first. Remaining refs are remapped.
Term remove_slot(const Term& t, SlotRef victim, std::vector<SlotRef*> touch = {});

// removes a whole factor (all its slots must already be detached from the
// pairing, i.e. none of the edges/free refs touch it)
Term remove_factor(const Term& t, int factor);

std::string to_display(const Term& t);  // compact human-readable form

}  // namespace invforge
