#pragma once

#include <optional>
#include <stdexcept>

#include "pmp/localfn.hpp"

namespace pmp {

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CollapseLimits {
  std::size_t read_cap = 256;  // consecutive branch follows at one output node
};

// The predecessor of (m,l) in reverse-lexicographic order over m <= N;
// nullopt below (0,0).
std::optional<Complexity> predecessor(Complexity c, std::uint32_t N);

// comp of the Read theory a tag root belongs to: the largest comp_abstracting
// over its leveled free set variables, (0,0) when there are none.
Complexity tag_complexity(const Tag& t);

// Every second-order quantified subformula and every tag of the declaration
// has complexity below c.
Verdict check_collapse_pre(const ExtSequent& decl, Complexity c);

// Copy of n with the free set variable `from` renamed to `to` in every rule.
NodePtr rename_setvar_node(const NodePtr& n, const SetVar& from, const SetVar& to);

// Removes CutOmegaFlat of complexity c, resolving Reads over BaseM(N,L,c)
// against the collapsed left premise. Throws PreconditionError.
NodePtr collapse_node(const NodePtr& d, Complexity c, CollapseLimits lim = {});
ProofTree collapse(const ProofTree& d, std::uint32_t m, std::uint32_t l, CollapseLimits lim = {});

// Collapses (N,L), (N-1,L), ..., (0,L), (N,L-1), ..., (0,0). The result is
// labelled Base(N,L).
ProofTree collapse_all(const ProofTree& d, CollapseLimits lim = {});

// Follows Rep chains; throws AddressError after `cap` consecutive Reps.
NodePtr erase_reps_node(const NodePtr& n, std::size_t cap = 1024);
ProofTree erase_reps(const ProofTree& d, std::size_t cap = 1024);

}  // namespace pmp
