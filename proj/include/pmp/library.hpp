#pragma once

#include <map>
#include <string>
#include <vector>

#include "pmp/localfn.hpp"

namespace pmp {

// A finite deduction; premises follow rule_premises order.
struct Deduction {
  Rule rule;
  std::vector<Deduction> premises;
};

struct DeductionReport {
  Verdict verdict;
  Sequent conclusion;  // Gamma of the root (meaningful when the verdict passes)
};

// Validity in `theory` (default PA2): membership, well-formedness, premise
// count, eigenvariable conditions.
DeductionReport check_deduction(const Deduction& d, const TheoryId& theory = TheoryId::pa2());
Sequent deduction_conclusion(const Deduction& d);
ProofTree deduction_tree(const Deduction& d, const TheoryId& theory = TheoryId::pa2());
std::size_t deduction_height(const Deduction& d);

// Id^phi reading `over`; root {phi}.
LocalFunction identity_fn_over(const Formula& phi, const TheoryId& over);
// Reads BaseM(N, L, comp) where comp abstracts y (complexity (0,0) without y).
LocalFunction identity_fn(const Formula& phi, std::uint32_t N, std::uint32_t L,
                          std::optional<SetVar> y = std::nullopt);

// d_phi, a proof of {phi, ~phi}. Throws SyntaxError unless phi is first-order closed.
NodePtr excluded_middle_node(const Formula& phi, std::uint32_t N, std::uint32_t L);
ProofTree excluded_middle(const Formula& phi, std::uint32_t N, std::uint32_t L);

// F^{phi, X -> psi}, root {phi} with X free in phi at level comp.level.
LocalFunction substitution_fn(const Formula& phi, const SetVar& x, const SetAbstract& psi,
                              std::uint32_t N, std::uint32_t L);

struct EmbedParams {
  std::uint32_t N = 0, L = 0, r = 0;
};

struct Embedding {
  ProofTree tree;
  EmbedParams params;
};

using NumMap = std::map<std::string, std::uint32_t>;
using LevelMap = std::map<std::string, std::uint32_t>;

// Throws std::invalid_argument when d is invalid or a free variable of the
// conclusion is not covered.
Embedding embed(const Deduction& d, const NumMap& nums = {}, const LevelMap& levels = {});

// Substitution of free first-order variables in a term.
Term subst_term(const Term& t, const NumMap& nums);

}  // namespace pmp
