#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmp/localfn.hpp"

namespace pmp {

struct OrdinalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- CNF ordinals below epsilon_0

struct CnfTerm;

// omega^e1*c1 + ... + omega^ek*ck with e1 > ... > ek and every ci > 0.
class CnfOrdinal {
 public:
  CnfOrdinal() = default;
  static CnfOrdinal nat(std::uint64_t n);
  static CnfOrdinal omega();
  // omega^e.
  static CnfOrdinal wpow(const CnfOrdinal& e);
  // Throws OrdinalError unless exponents strictly decrease and coefficients are positive.
  static CnfOrdinal from_terms(std::vector<CnfTerm> terms);

  const std::vector<CnfTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_finite() const;
  std::optional<std::uint64_t> finite_value() const;
  // Nesting of exponents: 0 for 0, 1 for positive naturals, 2 for omega.
  std::size_t depth() const;

  friend CnfOrdinal operator+(const CnfOrdinal& a, const CnfOrdinal& b);
  friend CnfOrdinal operator*(const CnfOrdinal& a, const CnfOrdinal& b);
  std::strong_ordering operator<=>(const CnfOrdinal& o) const;
  bool operator==(const CnfOrdinal& o) const;

  // Readable form, e.g. "w^(w)*2+w+3".
  std::string str() const;

 private:
  std::vector<CnfTerm> terms_;
};

struct CnfTerm {
  CnfOrdinal exp;
  std::uint64_t coeff = 1;
  bool operator==(const CnfTerm& o) const { return exp == o.exp && coeff == o.coeff; }
};

// Hessenberg natural sum.
CnfOrdinal natsum(const CnfOrdinal& a, const CnfOrdinal& b);
CnfOrdinal max(const CnfOrdinal& a, const CnfOrdinal& b);

// 0, 1, 2, w, w+1, w*2, w^2, w^w, and their pairwise sums and natural sums;
// sorted and duplicate free.
std::vector<CnfOrdinal> default_grid();

// ---------------------------------------------------------------- symbolic terms

// Variables: placeholders Omega_{m,l}, and named variables (roles such as b,
// band, bor, or open-tag keys).
class OrdinalTerm {
 public:
  enum class Kind : std::uint8_t { Zero, Nat, Omega, Var, Placeholder, Plus, Times, NatSum, WPow, Max, Apply };

  OrdinalTerm() = default;  // zero
  static OrdinalTerm zero();
  static OrdinalTerm nat(std::uint64_t n);
  static OrdinalTerm omega();
  static OrdinalTerm var(std::string name);
  static OrdinalTerm placeholder(std::uint32_t m, std::uint32_t l);
  static OrdinalTerm plus(std::vector<OrdinalTerm> args);
  static OrdinalTerm times(OrdinalTerm a, OrdinalTerm b);
  static OrdinalTerm natsum(std::vector<OrdinalTerm> args);
  static OrdinalTerm wpow(OrdinalTerm a);
  static OrdinalTerm max(std::vector<OrdinalTerm> args);
  // An uninterpreted function variable applied to arguments.
  static OrdinalTerm apply(std::string head, std::vector<OrdinalTerm> args);
  static OrdinalTerm from_cnf(const CnfOrdinal& a);

  Kind kind() const;
  std::uint64_t n() const;
  const std::string& name() const;  // Var, Apply head
  std::uint32_t m() const;
  std::uint32_t l() const;
  const std::vector<OrdinalTerm>& args() const;
  // Variable name of a placeholder, shared with open-tag keys.
  static std::string placeholder_name(std::uint32_t m, std::uint32_t l);

  bool operator==(const OrdinalTerm& o) const { return str() == o.str(); }
  // S-expression form; parse_ordinal_term inverts it.
  std::string str() const;

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
  explicit OrdinalTerm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
};

OrdinalTerm parse_ordinal_term(std::string_view text);
// Variable names (placeholders by placeholder_name, Apply heads excluded).
std::vector<std::string> term_variables(const OrdinalTerm& t);
OrdinalTerm substitute(const OrdinalTerm& t, const std::map<std::string, OrdinalTerm>& s);

using OrdinalFn = std::function<CnfOrdinal(const std::vector<CnfOrdinal>&)>;
struct Valuation {
  std::map<std::string, CnfOrdinal> vars;
  std::map<std::string, OrdinalFn> fns;
};

struct EvalLimits {
  std::size_t max_depth = 6;  // exponent nesting of any intermediate value
};

// Throws OrdinalError on an unassigned variable or a value beyond the depth limit.
CnfOrdinal eval_term(const OrdinalTerm& t, const Valuation& v, EvalLimits lim = {});

struct SampleSpace {
  std::vector<CnfOrdinal> grid = default_grid();
  CnfOrdinal threshold;       // only assignments with every variable >= threshold
  std::size_t exhaustive_upto = 4096;  // enumerate the grid product when it is this small
  std::size_t samples = 512;  // otherwise draw this many
  std::uint64_t seed = 1;
};

struct Comparison {
  bool less_on_samples = true;
  std::size_t evaluated = 0;
  std::optional<std::map<std::string, CnfOrdinal>> counterexample;
  std::string str() const;
};

// s < t at every sampled assignment; a counterexample refutes soundly.
Comparison compare_eval(const OrdinalTerm& s, const OrdinalTerm& t, const SampleSpace& space = {});

// ---------------------------------------------------------------- open tags

struct OpenTag {
  enum class Kind : std::uint8_t { Placeholder, Tag, Family };
  Kind kind = Kind::Tag;
  Complexity c;                             // Placeholder
  Sequent root;                             // Tag, Family
  Address pos;                              // Tag: its position; Family: the base
  std::shared_ptr<const RuleNode> parent;   // Family: members sit at pos.i for premises i of parent
  // Variable name; placeholders use OrdinalTerm::placeholder_name.
  std::string key() const;
  // Whether a concrete tag is this open tag (or one of its members).
  bool names(const Tag& t) const;
};

// In order of opening.
struct OpenTagSet {
  std::vector<OpenTag> tags;
  const OpenTag* find(const Tag& t) const;
  const OpenTag* find_key(const std::string& key) const;
  // The most recently opened tag with this root.
  const OpenTag* current(const Sequent& root) const;
  std::vector<std::string> keys() const;
};

struct OpenTagParams {
  std::uint32_t m = 0, L = 0;
};
// m and L of a theory; theories without a depth parameter cover depths <= N.
OpenTagParams open_tag_params(const TheoryId& t);

OpenTagSet open_tags_root(OpenTagParams p, const std::vector<Tag>& extra);
// The set at sigma.i given the set at sigma whose rule is r.
OpenTagSet open_tags_step(const OpenTagSet& s, const Rule& r, const PremiseIndex& i, OpenTagParams p);
// T_T(sigma) with T the declared tags of d.
OpenTagSet open_tags(const ProofTree& d, const Address& sigma);

// pi: T(tau) -> T(sigma) as keys; nullopt when t has no image.
std::optional<std::string> project_tag(const OpenTagSet& sigma, const OpenTag& t, OpenTagParams p);

// ---------------------------------------------------------------- bounds

// Terms name tags by role; roles[name] is the root of the tag they stand for.
// A role variable at sigma denotes the current open tag with that root.
struct BoundAssignment {
  std::function<std::optional<OrdinalTerm>(const Address&)> at;
  std::map<std::string, Sequent> roles;
};

BoundAssignment uniform_bound(OrdinalTerm t, std::map<std::string, Sequent> roles = {});

enum class CatalogOp : std::uint8_t {
  Id, InverseBot, InverseAnd, InverseForall, ElimOr, ElimForall, ElimSetLit, ElimQ2, Reduce,
  Substitution, ExcludedMiddle, Embedding
};
std::string catalog_name(CatalogOp op);
std::optional<CatalogOp> parse_catalog_op(std::string_view s);

struct CatalogParams {
  std::uint32_t m = 0, L = 0;  // placeholders Omega_{m',l'} with m' < m, l' <= L
  std::uint32_t level = 0;     // Substitution: lvl(psi)
  std::uint64_t k = 0;         // ExcludedMiddle: the finite offset
};
// Role names: b; band, bor; ball, bex; bx, bnx; ball2, bex2.
OrdinalTerm bound_catalog(CatalogOp op, const CatalogParams& p = {});
// The role names the catalog term uses.
std::vector<std::string> catalog_roles(CatalogOp op);

// The bound a catalog operator's tree carries: its catalog term, except in
// the Bot premise of a Cut it emits (not one it copies), which is an
// inversion's tree and carries the inversion's bound (band for Elim or, ball
// for Elim forall). Ordinal + is not strictly monotone on the left, so the
// sum does not decrease there.
BoundAssignment catalog_assignment(CatalogOp op, std::map<std::string, Sequent> roles,
                                   const CatalogParams& p = {});

struct CatalogInstance {
  CatalogOp op;
  std::map<std::string, Sequent> roles;
};
// The entry and roles of the operator dispatch_cut picks for a cut on f.
CatalogInstance cut_catalog(const Formula& f, const LocalFunction& op);

// The Reduce entry w^b placed along reduce(r, N, L)'s tree. Copying the input
// at p with rule R carries w^F, F the tag family opened there; the Rep after a
// removed cut carries w^F * 2; a node of a cut's operator carries the
// operator's entry with each role replaced by the bound of its input, the
// inner Reduce, at the position read. Terms name open-tag keys directly.
BoundAssignment reduce_assignment(std::uint32_t r, std::uint32_t N, std::uint32_t L);

struct BoundCheckParams {
  std::uint32_t fuel = 8;
  std::size_t samples = 3;  // premise-assignment pairs per (sigma, tau)
  std::uint64_t seed = 1;
  std::vector<CnfOrdinal> grid = default_grid();
  Observe obs;
  EvalLimits lim;
  std::optional<OpenTagParams> params;  // default: from the tree's theory
};

struct BoundReport {
  Verdict verdict;
  std::size_t nodes = 0, pairs = 0, comparisons = 0;
};

// Sampled check of the ordinal-bound condition on the depth-k prefix.
BoundReport check_bound_upto(const ProofTree& d, const BoundAssignment& o, const BoundCheckParams& p = {});

// Strict decrease along edges between nearest non-Read nodes, for closed bounds.
Verdict check_decrease_direct(const ProofTree& d, const BoundAssignment& o, std::uint32_t fuel,
                              const Observe& obs = {});

// o_sigma = remaining height; throws OrdinalError unless the tree is finite within fuel.
BoundAssignment height_bound(const ProofTree& d, std::uint32_t fuel = 64, const Observe& obs = {});

// Bound on apply_node(f.body, f.roots, inputs): o^F at h(sigma) with every
// variable naming an open tag of an input root, directly or as a role,
// replaced by that input's bound at the tag's position.
BoundAssignment compose_bounds(const LocalFunction& f, const BoundAssignment& of,
                               const std::vector<NodePtr>& inputs,
                               const std::vector<BoundAssignment>& input_bounds);

// Bound on lift_node(f.body, f.roots, plus): o^F at h(sigma).
BoundAssignment lift_bounds(const LocalFunction& f, const BoundAssignment& of, const TheoryId& plus);

}  // namespace pmp
