#pragma once

#include <vector>

#include "pmp/prooftree.hpp"

namespace pmp {

// A proof-tree read as a function of one input per root. Reads whose root is
// roots[i] consult input i, a tree in domains[i].
struct LocalFunction {
  std::vector<Sequent> roots;
  std::vector<TheoryId> domains;
  TheoryId codomain;
  ProofTree body;  // declared: the function's own conclusion, root tags included

  Tag root_tag(std::size_t i) const { return Tag{roots[i], {}, roots[i], {}}; }
};

// The node of `root` at position `pos`; throws AddressError.
NodePtr input_at(const NodePtr& root, const Address& pos);

struct ApplyLimits {
  std::size_t read_cap = 64;  // Reads consumed before one output rule
};

// Evaluation at node level. The output never contains a Read on one of
// `roots`; an emitted Read directly above an emitted Read of the same root
// is separated by Rep.
NodePtr apply_node(const NodePtr& body, const std::vector<Sequent>& roots,
                   const std::vector<NodePtr>& inputs, ApplyLimits lim = {});
ProofTree apply(const LocalFunction& f, const std::vector<ProofTree>& inputs, ApplyLimits lim = {});
// Declaration of apply(f, inputs): each input's declaration minus its root, plus Gamma(f) without the root tags.
ExtSequent apply_declared(const LocalFunction& f, const std::vector<ExtSequent>& inputs);

// Lift to inputs in `plus`: rules outside a Read's theory pass through,
// foreign Reads get the Read's scope added.
NodePtr lift_node(const NodePtr& body, const std::vector<Sequent>& roots, const TheoryId& plus);
LocalFunction lift(const LocalFunction& f, const TheoryId& plus);

// Rule-by-rule conservativity of plus over base for a scope, over probes.
Verdict check_conservative(const TheoryId& plus, const TheoryId& base, const Sequent& scope,
                           const std::vector<Tag>& scope_tags, const std::vector<Rule>& probes);

// Scope union used when a foreign Read passes through a Read with scope (s, st).
Rule widen_read(const Rule& read, const Sequent& s, const std::vector<Tag>& st);

}  // namespace pmp
