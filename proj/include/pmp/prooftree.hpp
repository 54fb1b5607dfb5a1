#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmp/calculus.hpp"

namespace pmp {

struct AddressError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Node;
using NodePtr = std::shared_ptr<const Node>;
using ChildFn = std::function<NodePtr(const PremiseIndex&)>;

// One lazily generated node: its rule and a child generator.
struct Step {
  Rule rule;
  ChildFn child;
};

// A node of an intensional tree. rule() and child() are memoized; fills are
// idempotent so concurrent first calls are benign and every later read sees
// the first stored value.
class Node {
 public:
  virtual ~Node() = default;
  const Rule& rule() const;
  // Throws AddressError unless i is a premise index of rule().
  NodePtr child(const PremiseIndex& i) const;

 protected:
  virtual Step make() const = 0;

 private:
  const Step& step() const;
  mutable std::mutex mu_;
  mutable std::optional<Step> step_;
  mutable std::map<PremiseIndex, NodePtr> children_;
};

NodePtr lazy_node(std::function<Step()> make);
NodePtr fixed_node(Rule r, ChildFn child);
// A finite node: every premise must be listed.
NodePtr finite_node(Rule r, std::vector<std::pair<PremiseIndex, NodePtr>> children);
NodePtr leaf(Rule r);
// A tree given as a total generator on addresses.
NodePtr generator_node(std::function<Rule(const Address&)> gen, Address at = {});

// Observation parameters. Fuel counts address length; Reads count.
struct Observe {
  std::vector<std::uint32_t> naturals{0, 1, 2};
  std::vector<Rule> probes;
  bool structured = true;           // add rules built from the Read's own formulas
  std::size_t max_read_branches = 4;
  // Skip branches at a BaseM Read that mention its read variable outside the
  // scope; inputs of such a Read are generic in that variable.
  bool generic_reads = true;
  // Skip branches whose eigenvariable is free in the Read's scope; inputs use
  // fresh eigenvariables.
  bool fresh_eigenvariables = true;
  std::size_t budget = 400000;      // node visits before the walk stops descending
};

// Branches taken at a node by fuel-bounded walks.
std::vector<PremiseIndex> sampled_premises(const Rule& r, const Observe& obs);

class ProofTree {
 public:
  ProofTree() = default;
  ProofTree(TheoryId theory, ExtSequent declared, NodePtr root)
      : theory_(theory), declared_(std::move(declared)), root_(std::move(root)) {}

  const TheoryId& theory() const { return theory_; }
  const ExtSequent& declared() const { return declared_; }
  const NodePtr& root() const { return root_; }
  bool valid() const { return root_ != nullptr; }

  NodePtr node_at(const Address& sigma) const;
  Rule expand(const Address& sigma) const { return node_at(sigma)->rule(); }
  ProofTree with_declared(ExtSequent d) const { return {theory_, std::move(d), root_}; }

 private:
  TheoryId theory_;
  ExtSequent declared_;
  NodePtr root_;
};

struct Witness {
  std::string what;  // formula, tag or message
  Address at;
};

struct Verdict {
  bool pass = true;
  bool truncated = false;  // the visit budget ran out
  std::vector<Witness> failures;
  void fail(std::string what, Address at) {
    pass = false;
    failures.push_back({std::move(what), std::move(at)});
  }
  std::string str() const;
};

// Gamma(d, sigma) restricted to witnesses of length <= k.
ExtSequent conclusion_upto(const ProofTree& d, const Address& sigma, std::uint32_t k,
                           const Observe& obs = {});
ExtSequent conclusion_upto(const NodePtr& n, std::uint32_t k, const Observe& obs = {});
// conclusion_upto(d, <>, k) within `within` (default: the declaration).
Verdict check_conclusion_upto(const ProofTree& d, std::uint32_t k, const Observe& obs = {});
Verdict check_conclusion_within(const NodePtr& n, const ExtSequent& within, std::uint32_t k,
                                const Observe& obs = {});
Verdict check_valid_upto(const ProofTree& d, std::uint32_t k, const Observe& obs = {});
Verdict check_no_consecutive_reads_upto(const ProofTree& d, std::uint32_t k,
                                        const Observe& obs = {});
// Every rule in the depth-k prefix belongs to the tree's theory.
Verdict check_theory_upto(const ProofTree& d, std::uint32_t k, const Observe& obs = {});

// Visits the depth-k prefix in address order; return false to prune below.
void walk_prefix(const NodePtr& root, std::uint32_t k, const Observe& obs,
                 const std::function<bool(const Address&, const NodePtr&)>& visit);

// Distinct rules of the depth-k prefix in first-visit order; a default probe set.
std::vector<Rule> harvest_rules(const NodePtr& root, std::uint32_t k, const Observe& obs = {},
                                std::size_t limit = 64);

ProofTree subtree(const ProofTree& d, const Address& sigma,
                  std::optional<ExtSequent> declared = std::nullopt, std::uint32_t fuel = 12,
                  const Observe& obs = {});

std::string render(const ProofTree& d, std::uint32_t k, const Observe& obs = {});
std::string render(const NodePtr& n, std::uint32_t k, const Observe& obs = {});

}  // namespace pmp
