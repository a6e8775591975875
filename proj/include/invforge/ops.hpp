#pragma once

#include "invforge/combination.hpp"

namespace invforge {

// --- free-index / internal-contraction conversions (Def. 2.3) ---

// replaces the chosen within-factor contraction (nabla^a, _a) by a free index:
// the derivative slot is erased, its partner becomes the next free label
Term make_free(const Term& t, const Edge& contraction);
// makes every within-factor (derivative-raised) contraction free, in canonical
// order; throws ShapeError on internal-internal contractions
Term make_all_free(const Term& t);
// inverse: the free label `ordinal` becomes an internal contraction again
Term restore_internal(const Term& t, int ordinal);
Term restore_all_internal(const Term& t);

// --- Xdiv (Def. 2.4 / Def. 5.5) ---

enum class XdivVariant { Standard, UpsilonExcluding };

// divergence of one free slot, restricted to hits on other factors (and, in
// the upsilon-excluding variant, skipping nabla(ups) factors). Free labels
// above `ordinal` shift down.
LinearCombination xdiv(const Term& t, int ordinal, XdivVariant variant = XdivVariant::Standard,
                       const std::string& upsilon_label = "ups");
LinearCombination xdiv(const LinearCombination& lc, int ordinal,
                       XdivVariant variant = XdivVariant::Standard,
                       const std::string& upsilon_label = "ups");

// full divergence (Xdiv plus own-factor hits), for the Leibniz cross-check
LinearCombination total_divergence(const Term& t, int ordinal);
LinearCombination total_divergence(const LinearCombination& lc, int ordinal);

// --- the Ric -> Omega substitution of Lemma 2.1 ---

// each nabla^(p)Ric_ij becomes -nabla^(p+2)Omega, each scalar R becomes
// -2 Delta Omega; `expected_m` checks the Ricci+ScalarR count when >= 0
LinearCombination ric_to_omega(const Term& t, const std::string& omega_label,
                               int expected_m = -1);
LinearCombination ric_to_omega(const LinearCombination& lc, const std::string& omega_label,
                               int expected_m = -1);

// --- Weylify / Riccify (Defs. 5.3, 5.6, and the 5.4-section Riccify'') ---

struct UpsilonOptions {
  std::string upsilon_label = "ups";
  std::string psi_family = "psi";
  std::string omega_family = "Omega";
};

// Def. 5.3: Riemann -> Weyl ((n-2)/(n-3) when an internal index meets ups),
// psi-jets -> Schouten, nabla psi nabla ups -> P^a_a; ups factors erased.
LinearCombination weylify(const Term& t, const UpsilonOptions& opt = {});
LinearCombination weylify(const LinearCombination& lc, const UpsilonOptions& opt = {});

// Def. 5.6: ups contacts become internal contractions; Omega-jets -> Ricci,
// nabla Omega nabla ups -> R/2; psi-jets keep their kind.
LinearCombination riccify(const Term& t, const UpsilonOptions& opt = {});
LinearCombination riccify(const LinearCombination& lc, const UpsilonOptions& opt = {});

// Riccify'': one ups-contacted slot of each Omega-jet is consumed together
// with its ups factor, producing a nabla^(p-1) R scalar factor.
LinearCombination riccify_dprime(const Term& t, const UpsilonOptions& opt = {});
LinearCombination riccify_dprime(const LinearCombination& lc, const UpsilonOptions& opt = {});

// --- Erase (Def. 6.1) ---

// deletes the nabla(phi_label) factor and the derivative slot it contracts
LinearCombination erase(const Term& t, const std::string& phi_label);
LinearCombination erase(const LinearCombination& lc, const std::string& phi_label);

// --- Sub_omega (Lemma 6.2) ---

LinearCombination sub_omega(const Term& t, const std::string& omega_label);
LinearCombination sub_omega(const LinearCombination& lc, const std::string& omega_label);

// --- nabla-upsilon inflation (Def. 5.11) ---

// each within-factor (nabla^a,_a) contraction becomes a contracted nabla(ups)
// factor; length grows by the number of contractions
Term inflate_upsilon(const Term& t, const std::string& upsilon_label = "ups");
LinearCombination inflate_upsilon(const LinearCombination& lc,
                                  const std::string& upsilon_label = "ups");

// --- polarization utility (psi^d -> psi_1 ... psi_d with 1/d! bookkeeping) ---

LinearCombination polarize(const LinearCombination& lc, const std::string& base_label,
                           const std::vector<std::string>& labels);
// inverse direction: set all the given labels equal to base_label
LinearCombination identify_labels(const LinearCombination& lc,
                                  const std::vector<std::string>& labels,
                                  const std::string& base_label);

}  // namespace invforge
