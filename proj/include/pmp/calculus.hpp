#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pmp/syntax.hpp"

namespace pmp {

using Sequent = std::set<Formula>;

class Rule;
struct RuleNode;

enum class Label : std::uint8_t { Top, Bot, L, R, Nat, Branch };

// A premise index carries the rule it belongs to, so an address element
// determines its rule.
struct PremiseIndex {
  Label label = Label::Top;
  std::uint32_t n = 0;               // Nat
  std::shared_ptr<const RuleNode> branch;  // Branch: the rule chosen at a Read
  std::shared_ptr<const RuleNode> parent;

  Rule parent_rule() const;
  Rule branch_rule() const;
  std::strong_ordering operator<=>(const PremiseIndex& o) const;
  bool operator==(const PremiseIndex& o) const;
  std::string str() const;
};

using Address = std::vector<PremiseIndex>;
std::string address_str(const Address& a);
std::size_t address_hash(const Address& a);
struct AddressHash {
  std::size_t operator()(const Address& a) const { return address_hash(a); }
};
bool is_prefix(const Address& p, const Address& a);

struct Tag {
  Sequent root;
  Address pos;
  Sequent scope;
  std::vector<Tag> scope_tags;  // sorted, unique; tags may sit inside scopes

  std::strong_ordering operator<=>(const Tag& o) const;
  bool operator==(const Tag& o) const;
  std::string str() const;
  // Scope inclusion on both the formula and the tag part.
  bool scope_within(const Tag& wider) const;
};

// The tags (root, base.i, scope) for every premise i of `parent`.
struct TagFamily {
  Sequent root;
  Address base;
  std::shared_ptr<const RuleNode> parent;
  Sequent scope;
  std::vector<Tag> scope_tags;

  bool contains_position(const Address& pos) const;
  bool operator==(const TagFamily& o) const;
  std::string str() const;
};

struct ExtSequent {
  Sequent formulas;
  std::vector<Tag> tags;  // sorted, unique
  std::vector<TagFamily> families;

  void add(const Formula& f) { formulas.insert(f); }
  void add(const Tag& t);
  void merge(const ExtSequent& o);
  bool empty() const { return formulas.empty() && tags.empty() && families.empty(); }
  // Whether the premise-side sequent removes tag t (same root and position,
  // scope contained in t's scope).
  bool removes(const Tag& t) const;
  bool contains_tag(const Tag& t) const;
  // Whether t is one of the tags this sequent lists, explicitly or by family.
  bool covers(const Tag& t) const;
  bool operator==(const ExtSequent& o) const;
  std::string str() const;
};

// Removes every tag with t's root and position whose scope includes t's.
ExtSequent remove_tag(const ExtSequent& s, const Tag& t);
void sort_tags(std::vector<Tag>& v);

struct TheoryId {
  enum class Kind : std::uint8_t {
    PA2,
    PA2CutFree,
    Base,       // PA^{inf,N,L,-}_{2,<0}
    BaseM,      // PA^{inf,N,L,m,l,-}_{2,<0}
    Full,       // PA^{inf,N,L,m,l}_{2,<0}
    WithCuts,   // PA^{inf,N,L,m,l}_{2,<r}
    Infinitary, // PA^{inf,N,L}_{2,<r}: union over all (m,l)
    NoRead,     // PA^{inf,N,L,-}_{2,<r}
    CutTheory,  // C^{m,l}
    ReadTheory, // R^{N,L,m,l}
    Universal,  // every well-formed rule; target of lifts inside composites
  };
  Kind kind = Kind::PA2;
  std::uint32_t N = 0, L = 0, m = 0, l = 0, r = 0;

  static TheoryId pa2() { return {Kind::PA2}; }
  static TheoryId pa2_cut_free() { return {Kind::PA2CutFree}; }
  static TheoryId base(std::uint32_t N, std::uint32_t L) { return {Kind::Base, N, L}; }
  static TheoryId base_m(std::uint32_t N, std::uint32_t L, std::uint32_t m, std::uint32_t l) {
    return {Kind::BaseM, N, L, m, l};
  }
  static TheoryId full(std::uint32_t N, std::uint32_t L, std::uint32_t m, std::uint32_t l) {
    return {Kind::Full, N, L, m, l};
  }
  static TheoryId with_cuts(std::uint32_t N, std::uint32_t L, std::uint32_t m, std::uint32_t l,
                            std::uint32_t r) {
    return {Kind::WithCuts, N, L, m, l, r};
  }
  static TheoryId infinitary(std::uint32_t N, std::uint32_t L, std::uint32_t r) {
    return {Kind::Infinitary, N, L, 0, 0, r};
  }
  static TheoryId no_read(std::uint32_t N, std::uint32_t L, std::uint32_t r) {
    return {Kind::NoRead, N, L, 0, 0, r};
  }
  static TheoryId cut_theory(std::uint32_t m, std::uint32_t l) {
    return {Kind::CutTheory, 0, 0, m, l};
  }
  static TheoryId universal() { return {Kind::Universal}; }
  static TheoryId read_theory(std::uint32_t N, std::uint32_t L, std::uint32_t m, std::uint32_t l) {
    return {Kind::ReadTheory, N, L, m, l};
  }

  auto operator<=>(const TheoryId&) const = default;
  bool operator==(const TheoryId&) const = default;
  std::string str() const;
};

enum class RuleKind : std::uint8_t {
  True, Ax, IAnd, IOrL, IOrR, IForall1, IExists1, IForall2, IExists2Fin, Ind, Cut, Rep,
  Omega, OmegaFlat, CutOmegaFlat, Read
};

struct RuleNode {
  RuleKind kind = RuleKind::Rep;
  Formula f;         // principal formula (Ax: the positive member; Ind: body with hole)
  Term t;            // IExists1 witness, Ind target
  std::string y;     // IForall1 eigenvariable
  SetVar Y, Z;       // IForall2 / OmegaFlat / CutOmegaFlat variables
  SetAbstract psi;   // IExists2Fin witness
  TheoryId theory;   // Read
  Tag tag;           // Read
  std::size_t hash = 0;
};

class Rule {
 public:
  Rule() = default;
  explicit Rule(std::shared_ptr<const RuleNode> n) : node_(std::move(n)) {}

  static Rule true_lit(const Formula& eta);
  static Rule ax(const Formula& eta);
  static Rule iand(const Formula& conj);
  static Rule ior(const Formula& disj, bool left);
  static Rule iforall1(const Formula& all, const std::string& y);
  static Rule iexists1(const Formula& ex, const Term& t);
  static Rule iforall2(const Formula& all2, const SetVar& y);
  static Rule iexists2(const Formula& ex2, const SetAbstract& psi);
  static Rule ind(const Formula& body, const Term& t);
  static Rule cut(const Formula& f);
  static Rule rep();
  static Rule omega(const Formula& all);
  static Rule omega_flat(const SetVar& y, const Formula& ex2);
  static Rule cut_omega_flat(const SetVar& z, const SetVar& y, const Formula& ex2);
  static Rule read(const TheoryId& theory, const Tag& tag);

  bool valid() const { return node_ != nullptr; }
  RuleKind kind() const { return node_->kind; }
  const RuleNode& node() const { return *node_; }
  const std::shared_ptr<const RuleNode>& ptr() const { return node_; }
  std::size_t hash() const { return node_ ? node_->hash : 0; }
  bool is_read() const { return node_ && node_->kind == RuleKind::Read; }
  const Tag& tag() const { return node_->tag; }

  std::strong_ordering operator<=>(const Rule& o) const;
  bool operator==(const Rule& o) const;
  std::string str() const;
  std::string name() const;

  // Premise index constructors bound to this rule.
  PremiseIndex idx(Label l) const;
  PremiseIndex nat(std::uint32_t n) const;
  PremiseIndex branch(const Rule& r) const;

 private:
  std::shared_ptr<const RuleNode> node_;
};

struct RuleHash {
  std::size_t operator()(const Rule& r) const { return r.hash(); }
};

struct PremiseSpec {
  enum class Kind : std::uint8_t { Finite, Naturals, Rules };
  Kind kind = Kind::Finite;
  std::vector<PremiseIndex> list;
  TheoryId theory;
};

PremiseSpec rule_premises(const Rule& r);
bool is_premise(const Rule& r, const PremiseIndex& i);
// Well-formedness of the descriptor; a message on failure.
std::optional<std::string> rule_malformed(const Rule& r);
ExtSequent conclusion(const Rule& r);
ExtSequent premise_sequent(const Rule& r, const PremiseIndex& i);
FreeVars eigenvariables(const Rule& r, const PremiseIndex& i);
// Premise sequent of the last element of a position; empty at the root.
ExtSequent delta_of_position(const Address& pos);

bool theory_contains(const TheoryId& t, const Rule& r);
// The Read theory a descriptor belongs to, by its own parameters.
std::optional<Complexity> read_complexity(const Rule& r);
std::optional<Complexity> omega_complexity(const Rule& r);

// Formulas permitted at the top of a sequence of premise indices.
ExtSequent gamma_back(const Address& sigma);

// Applies a formula map to every formula parameter of a descriptor
// (including tags of Reads).
Rule map_rule(const Rule& r, const std::function<Formula(const Formula&)>& fm,
              const std::function<SetVar(const SetVar&)>& vm);
Tag map_tag(const Tag& t, const std::function<Formula(const Formula&)>& fm,
            const std::function<SetVar(const SetVar&)>& vm);

std::vector<Formula> sequent_list(const Sequent& s);
std::string sequent_str(const Sequent& s);

}  // namespace pmp
