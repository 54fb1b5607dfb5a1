#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmp {

struct SyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A term is S^succ applied to a base: zero, a free variable, or a bound
// first-order variable (de Bruijn index counting first-order binders only).
struct Term {
  enum class Base : std::uint8_t { Zero, Free, Bound };
  Base base = Base::Zero;
  std::uint32_t succ = 0;
  std::uint32_t index = 0;  // meaningful for Bound
  std::string name;         // meaningful for Free

  static Term numeral(std::uint32_t n) { return Term{Base::Zero, n, 0, {}}; }
  static Term var(std::string name) { return Term{Base::Free, 0, 0, std::move(name)}; }
  static Term bound(std::uint32_t index) { return Term{Base::Bound, 0, index, {}}; }

  Term successor() const {
    Term t = *this;
    ++t.succ;
    return t;
  }
  bool closed() const { return base == Base::Zero; }
  std::uint32_t value() const;  // throws unless closed

  auto operator<=>(const Term&) const = default;
  bool operator==(const Term&) const = default;
};

// Level of a free second-order variable; nullopt is the unleveled marker.
using Level = std::optional<std::uint32_t>;

struct SetVar {
  std::string name;
  Level level;
  auto operator<=>(const SetVar&) const = default;
  bool operator==(const SetVar&) const = default;
  std::string str() const;
};

// Reference to a second-order variable inside a formula: either free, or a
// de Bruijn index counting second-order binders only.
struct SetRef {
  bool bound = false;
  std::uint32_t index = 0;
  SetVar var;
  auto operator<=>(const SetRef&) const = default;
  bool operator==(const SetRef&) const = default;
};

enum class Kind : std::uint8_t { Prim, SetLit, And, Or, All1, Ex1, All2, Ex2 };

class Formula;
struct FormulaNode;

class Formula {
 public:
  Formula() = default;  // invalid handle; only for containers

  static Formula prim(std::string rel, bool positive, std::vector<Term> args);
  static Formula setlit(SetRef x, bool positive, Term t);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  // Quantifiers take a body whose bound index 0 refers to the new binder.
  static Formula all1(Formula body);
  static Formula ex1(Formula body);
  static Formula all2(Formula body);
  static Formula ex2(Formula body);
  // Binders over a named free variable, closing it in `body`.
  static Formula all1(const std::string& x, const Formula& body);
  static Formula ex1(const std::string& x, const Formula& body);
  static Formula all2(const SetVar& x, const Formula& body);
  static Formula ex2(const SetVar& x, const Formula& body);

  bool valid() const { return node_ != nullptr; }
  Kind kind() const;
  bool positive() const;                  // literals only
  const std::string& rel() const;         // Prim only
  const std::vector<Term>& args() const;  // Prim only
  const SetRef& setref() const;           // SetLit only
  const Term& setarg() const;             // SetLit only
  const Formula& lhs() const;             // And/Or
  const Formula& rhs() const;             // And/Or
  const Formula& body() const;            // quantifiers
  std::size_t hash() const;
  std::uint32_t size() const;

  bool is_literal() const { return kind() == Kind::Prim || kind() == Kind::SetLit; }
  bool is_quant2() const { return kind() == Kind::All2 || kind() == Kind::Ex2; }

  std::strong_ordering operator<=>(const Formula& o) const;
  bool operator==(const Formula& o) const;

  std::string str() const;  // s-expression with canonical bound names

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
  friend struct FormulaNode;
};

struct FormulaNode {
  Kind kind = Kind::Prim;
  bool positive = true;
  std::string rel;
  std::vector<Term> args;
  SetRef sref;
  Term sarg;
  Formula a, b;
  std::size_t hash = 0;
  std::uint32_t size = 1;
  static Formula make(FormulaNode n);
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

// A set abstract: a formula whose first-order bound index 0 is the hole.
struct SetAbstract {
  Formula body;
  Formula at(const Term& t) const;
  bool operator==(const SetAbstract& o) const { return body == o.body; }
  auto operator<=>(const SetAbstract& o) const { return body <=> o.body; }
  // Builds the abstract from a formula with named free variable `hole`.
  static SetAbstract from(const std::string& hole, const Formula& f);
};

struct Complexity {
  std::uint32_t depth = 0;
  std::uint32_t level = 0;
  bool operator==(const Complexity&) const = default;
  // Reverse lexicographic: level first, then depth.
  bool operator<(const Complexity& o) const {
    return level < o.level || (level == o.level && depth < o.depth);
  }
  bool operator<=(const Complexity& o) const { return *this < o || *this == o; }
  std::string str() const;
};

Formula negate(const Formula& f);

// Instantiate the outermost binder of a quantifier body.
Formula instantiate1(const Formula& body, const Term& t);
Formula instantiate2(const Formula& body, const SetVar& y);
Formula instantiate2(const Formula& body, const SetAbstract& psi);

// Capture-free replacement of the free first-order variable x.
Formula subst_num(const Formula& f, const std::string& x, const Term& t);
// X t becomes psi(t), its negation becomes ~psi(t).
Formula subst_set(const Formula& f, const SetVar& x, const SetAbstract& psi);
// Replace free occurrences of x by the variable y (levels may differ).
Formula rename_set(const Formula& f, const SetVar& x, const SetVar& y);

struct FreeVars {
  std::set<std::string> first;
  std::set<SetVar> second;
  bool operator==(const FreeVars&) const = default;
};
FreeVars free_vars(const Formula& f);
bool occurs_free(const Formula& f, const SetVar& x);
bool occurs_free(const Formula& f, const std::string& x);
bool closed_first_order(const Formula& f);

std::uint32_t dp(const Formula& f, const std::set<SetVar>& s);
std::uint32_t lvl(const Formula& f, const std::set<SetVar>& s);
// Complexity of a second-order quantified formula (All2 or Ex2).
Complexity comp(const Formula& q2);
// The nesting count of entangled second-order quantifiers including the
// outermost one: dp(body,{X}) + 1.
std::uint32_t nesting_depth(const Formula& q2);
// Complexity of Q2 X f[y := X] for a free variable y of f.
Complexity comp_abstracting(const Formula& f, const SetVar& y);
std::uint32_t rank(const Formula& f);

bool eval_literal(const Formula& lit);
// Truth of a closed formula without second-order content, with
// quantifiers bounded by `bound` (a sampling evaluator for tests).
std::optional<bool> eval_bounded(const Formula& f, std::uint32_t bound);

// Relation catalog.
struct Relation {
  std::string id;
  std::size_t arity;
  bool (*decide)(const std::vector<std::uint32_t>&);
};
const Relation* find_relation(const std::string& id);
const std::vector<Relation>& relation_catalog();

// Collects all subformulas (with bound variables as de Bruijn references).
void subformulas(const Formula& f, std::vector<Formula>& out);

std::string term_str(const Term& t, std::uint32_t depth1);

}  // namespace pmp
