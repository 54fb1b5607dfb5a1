#include "pmp/syntax.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace pmp {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t term_hash(const Term& t) {
  std::size_t h = static_cast<std::size_t>(t.base) * 131 + t.succ;
  h = mix(h, t.index);
  if (t.base == Term::Base::Free) h = mix(h, std::hash<std::string>{}(t.name));
  return h;
}

std::size_t setref_hash(const SetRef& r) {
  std::size_t h = r.bound ? 17 : 29;
  h = mix(h, r.index);
  if (!r.bound) {
    h = mix(h, std::hash<std::string>{}(r.var.name));
    h = mix(h, r.var.level ? *r.var.level + 1 : 0);
  }
  return h;
}

Term shift_term(Term t, std::uint32_t by) {
  if (t.base == Term::Base::Bound) t.index += by;
  return t;
}

// Rebuilds a formula, mapping terms and set literals. The callbacks see the
// number of first-order (d1) and second-order (d2) binders crossed so far.
using TermMap = std::function<Term(const Term&, std::uint32_t d1)>;
using SetMap = std::function<std::optional<Formula>(const Formula& lit, std::uint32_t d1,
                                                    std::uint32_t d2)>;

Formula rebuild(const Formula& f, const TermMap& tm, const SetMap& sm, std::uint32_t d1,
                std::uint32_t d2) {
  switch (f.kind()) {
    case Kind::Prim: {
      std::vector<Term> args;
      args.reserve(f.args().size());
      bool changed = false;
      for (const auto& a : f.args()) {
        args.push_back(tm ? tm(a, d1) : a);
        changed |= !(args.back() == a);
      }
      if (!changed) return f;
      return Formula::prim(f.rel(), f.positive(), std::move(args));
    }
    case Kind::SetLit: {
      if (sm) {
        if (auto r = sm(f, d1, d2)) return *r;
      }
      Term t = tm ? tm(f.setarg(), d1) : f.setarg();
      if (t == f.setarg()) return f;
      return Formula::setlit(f.setref(), f.positive(), t);
    }
    case Kind::And:
    case Kind::Or: {
      Formula a = rebuild(f.lhs(), tm, sm, d1, d2);
      Formula b = rebuild(f.rhs(), tm, sm, d1, d2);
      if (a == f.lhs() && b == f.rhs()) return f;
      return f.kind() == Kind::And ? Formula::conj(a, b) : Formula::disj(a, b);
    }
    case Kind::All1:
    case Kind::Ex1: {
      Formula b = rebuild(f.body(), tm, sm, d1 + 1, d2);
      if (b == f.body()) return f;
      return f.kind() == Kind::All1 ? Formula::all1(b) : Formula::ex1(b);
    }
    case Kind::All2:
    case Kind::Ex2: {
      Formula b = rebuild(f.body(), tm, sm, d1, d2 + 1);
      if (b == f.body()) return f;
      return f.kind() == Kind::All2 ? Formula::all2(b) : Formula::ex2(b);
    }
  }
  return f;
}

int cmp_node(const FormulaNode* x, const FormulaNode* y);

int cmp_formula(const Formula& a, const Formula& b) {
  auto r = a <=> b;
  return r < 0 ? -1 : (r > 0 ? 1 : 0);
}

template <class T>
int cmp3(const T& a, const T& b) {
  auto r = a <=> b;
  return r < 0 ? -1 : (r > 0 ? 1 : 0);
}

int cmp_node(const FormulaNode* x, const FormulaNode* y) {
  if (x == y) return 0;
  if (int c = cmp3(static_cast<int>(x->kind), static_cast<int>(y->kind))) return c;
  switch (x->kind) {
    case Kind::Prim:
      if (int c = cmp3(x->rel, y->rel)) return c;
      if (int c = cmp3(x->positive, y->positive)) return c;
      return cmp3(x->args, y->args);
    case Kind::SetLit:
      if (int c = cmp3(x->sref, y->sref)) return c;
      if (int c = cmp3(x->sarg, y->sarg)) return c;
      return cmp3(x->positive, y->positive);
    case Kind::And:
    case Kind::Or:
      if (int c = cmp_formula(x->a, y->a)) return c;
      return cmp_formula(x->b, y->b);
    default:
      return cmp_formula(x->a, y->a);
  }
}

}  // namespace

std::uint32_t Term::value() const {
  if (base != Base::Zero) throw SyntaxError("term is not closed");
  return succ;
}

std::string SetVar::str() const {
  return level ? name + "^" + std::to_string(*level) : name;
}

std::string Complexity::str() const {
  return "(" + std::to_string(depth) + "," + std::to_string(level) + ")";
}

Formula FormulaNode::make(FormulaNode n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 7919;
  switch (n.kind) {
    case Kind::Prim:
      h = mix(h, std::hash<std::string>{}(n.rel));
      h = mix(h, n.positive);
      for (const auto& t : n.args) h = mix(h, term_hash(t));
      break;
    case Kind::SetLit:
      h = mix(h, setref_hash(n.sref));
      h = mix(h, term_hash(n.sarg));
      h = mix(h, n.positive);
      break;
    case Kind::And:
    case Kind::Or:
      h = mix(mix(h, n.a.hash()), n.b.hash());
      n.size = 1 + n.a.size() + n.b.size();
      break;
    default:
      h = mix(h, n.a.hash());
      n.size = 1 + n.a.size();
      break;
  }
  n.hash = h;
  return Formula(std::make_shared<const FormulaNode>(std::move(n)));
}

Formula Formula::prim(std::string rel, bool positive, std::vector<Term> args) {
  FormulaNode n;
  n.kind = Kind::Prim;
  n.rel = std::move(rel);
  n.positive = positive;
  n.args = std::move(args);
  return FormulaNode::make(std::move(n));
}

Formula Formula::setlit(SetRef x, bool positive, Term t) {
  FormulaNode n;
  n.kind = Kind::SetLit;
  n.sref = std::move(x);
  n.positive = positive;
  n.sarg = std::move(t);
  return FormulaNode::make(std::move(n));
}

Formula Formula::conj(Formula a, Formula b) {
  FormulaNode n;
  n.kind = Kind::And;
  n.a = std::move(a);
  n.b = std::move(b);
  return FormulaNode::make(std::move(n));
}

Formula Formula::disj(Formula a, Formula b) {
  FormulaNode n;
  n.kind = Kind::Or;
  n.a = std::move(a);
  n.b = std::move(b);
  return FormulaNode::make(std::move(n));
}

namespace {
Formula quant(Kind k, Formula body) {
  FormulaNode n;
  n.kind = k;
  n.a = std::move(body);
  return FormulaNode::make(std::move(n));
}

Formula abstract1(const Formula& f, const std::string& x) {
  return rebuild(
      f,
      [&](const Term& t, std::uint32_t d1) {
        Term r = t;
        if (t.base == Term::Base::Free && t.name == x) {
          r.base = Term::Base::Bound;
          r.index = d1;
          r.name.clear();
        } else if (t.base == Term::Base::Bound && t.index >= d1) {
          ++r.index;
        }
        return r;
      },
      nullptr, 0, 0);
}

Formula abstract2(const Formula& f, const SetVar& x) {
  return rebuild(
      f, nullptr,
      [&](const Formula& lit, std::uint32_t, std::uint32_t d2) -> std::optional<Formula> {
        SetRef r = lit.setref();
        if (!r.bound && r.var == x) {
          r = SetRef{true, d2, {}};
        } else if (r.bound && r.index >= d2) {
          ++r.index;
        } else {
          return std::nullopt;
        }
        return Formula::setlit(r, lit.positive(), lit.setarg());
      },
      0, 0);
}
}  // namespace

Formula Formula::all1(Formula body) { return quant(Kind::All1, std::move(body)); }
Formula Formula::ex1(Formula body) { return quant(Kind::Ex1, std::move(body)); }
Formula Formula::all2(Formula body) { return quant(Kind::All2, std::move(body)); }
Formula Formula::ex2(Formula body) { return quant(Kind::Ex2, std::move(body)); }
Formula Formula::all1(const std::string& x, const Formula& body) {
  return all1(abstract1(body, x));
}
Formula Formula::ex1(const std::string& x, const Formula& body) {
  return ex1(abstract1(body, x));
}
Formula Formula::all2(const SetVar& x, const Formula& body) { return all2(abstract2(body, x)); }
Formula Formula::ex2(const SetVar& x, const Formula& body) { return ex2(abstract2(body, x)); }

Kind Formula::kind() const { return node_->kind; }
bool Formula::positive() const { return node_->positive; }
const std::string& Formula::rel() const { return node_->rel; }
const std::vector<Term>& Formula::args() const { return node_->args; }
const SetRef& Formula::setref() const { return node_->sref; }
const Term& Formula::setarg() const { return node_->sarg; }
const Formula& Formula::lhs() const { return node_->a; }
const Formula& Formula::rhs() const { return node_->b; }
const Formula& Formula::body() const { return node_->a; }
std::size_t Formula::hash() const { return node_ ? node_->hash : 0; }
std::uint32_t Formula::size() const { return node_ ? node_->size : 0; }

std::strong_ordering Formula::operator<=>(const Formula& o) const {
  if (node_ == o.node_) return std::strong_ordering::equal;
  if (!node_) return std::strong_ordering::less;
  if (!o.node_) return std::strong_ordering::greater;
  int c = cmp_node(node_.get(), o.node_.get());
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

bool Formula::operator==(const Formula& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_ || node_->hash != o.node_->hash) return false;
  return cmp_node(node_.get(), o.node_.get()) == 0;
}

std::string term_str(const Term& t, std::uint32_t depth1) {
  std::string base;
  switch (t.base) {
    case Term::Base::Zero:
      if (t.succ == 0) return "0";
      return "(num " + std::to_string(t.succ) + ")";
    case Term::Base::Free:
      base = t.name;
      break;
    case Term::Base::Bound:
      base = t.index < depth1 ? "_" + std::to_string(depth1 - 1 - t.index)
                              : "_free" + std::to_string(t.index - depth1);
      break;
  }
  std::string out = base;
  for (std::uint32_t i = 0; i < t.succ; ++i) out = "(s " + out + ")";
  return out;
}

namespace {
void print(const Formula& f, std::ostringstream& os, std::uint32_t d1, std::uint32_t d2) {
  switch (f.kind()) {
    case Kind::Prim:
      if (!f.positive()) os << "(not ";
      os << "(lit \"" << f.rel() << "\"";
      for (const auto& a : f.args()) os << ' ' << term_str(a, d1);
      os << ')';
      if (!f.positive()) os << ')';
      return;
    case Kind::SetLit: {
      if (!f.positive()) os << "(not ";
      const SetRef& r = f.setref();
      os << "(setlit ";
      if (r.bound)
        os << (r.index < d2 ? "_X" + std::to_string(d2 - 1 - r.index) : "_Xfree");
      else
        os << r.var.str();
      os << ' ' << term_str(f.setarg(), d1) << ')';
      if (!f.positive()) os << ')';
      return;
    }
    case Kind::And:
    case Kind::Or:
      os << (f.kind() == Kind::And ? "(and " : "(or ");
      print(f.lhs(), os, d1, d2);
      os << ' ';
      print(f.rhs(), os, d1, d2);
      os << ')';
      return;
    case Kind::All1:
    case Kind::Ex1:
      os << (f.kind() == Kind::All1 ? "(all _" : "(ex _") << d1 << ' ';
      print(f.body(), os, d1 + 1, d2);
      os << ')';
      return;
    case Kind::All2:
    case Kind::Ex2:
      os << (f.kind() == Kind::All2 ? "(all2 _X" : "(ex2 _X") << d2 << ' ';
      print(f.body(), os, d1, d2 + 1);
      os << ')';
      return;
  }
}
}  // namespace

std::string Formula::str() const {
  if (!node_) return "<null>";
  std::ostringstream os;
  print(*this, os, 0, 0);
  return os.str();
}

Formula SetAbstract::at(const Term& t) const { return instantiate1(body, t); }

SetAbstract SetAbstract::from(const std::string& hole, const Formula& f) {
  return SetAbstract{abstract1(f, hole)};
}

Formula negate(const Formula& f) {
  switch (f.kind()) {
    case Kind::Prim:
      return Formula::prim(f.rel(), !f.positive(), f.args());
    case Kind::SetLit:
      return Formula::setlit(f.setref(), !f.positive(), f.setarg());
    case Kind::And:
      return Formula::disj(negate(f.lhs()), negate(f.rhs()));
    case Kind::Or:
      return Formula::conj(negate(f.lhs()), negate(f.rhs()));
    case Kind::All1:
      return Formula::ex1(negate(f.body()));
    case Kind::Ex1:
      return Formula::all1(negate(f.body()));
    case Kind::All2:
      return Formula::ex2(negate(f.body()));
    case Kind::Ex2:
      return Formula::all2(negate(f.body()));
  }
  return f;
}

Formula instantiate1(const Formula& body, const Term& t) {
  auto tm = [&](const Term& u, std::uint32_t d1) {
    if (u.base != Term::Base::Bound) return u;
    if (u.index == d1) {
      Term r = shift_term(t, d1);
      r.succ += u.succ;
      return r;
    }
    Term r = u;
    if (u.index > d1) --r.index;
    return r;
  };
  return rebuild(body, tm, nullptr, 0, 0);
}

Formula instantiate2(const Formula& body, const SetVar& y) {
  return rebuild(
      body, nullptr,
      [&](const Formula& lit, std::uint32_t, std::uint32_t d2) -> std::optional<Formula> {
        const SetRef& r = lit.setref();
        if (!r.bound || r.index < d2) return std::nullopt;
        SetRef nr = r.index == d2 ? SetRef{false, 0, y} : SetRef{true, r.index - 1, {}};
        return Formula::setlit(nr, lit.positive(), lit.setarg());
      },
      0, 0);
}

Formula instantiate2(const Formula& body, const SetAbstract& psi) {
  return rebuild(
      body, nullptr,
      [&](const Formula& lit, std::uint32_t, std::uint32_t d2) -> std::optional<Formula> {
        const SetRef& r = lit.setref();
        if (!r.bound || r.index < d2) return std::nullopt;
        if (r.index > d2)
          return Formula::setlit(SetRef{true, r.index - 1, {}}, lit.positive(), lit.setarg());
        Formula v = psi.at(lit.setarg());
        return lit.positive() ? v : negate(v);
      },
      0, 0);
}

Formula subst_num(const Formula& f, const std::string& x, const Term& t) {
  auto tm = [&](const Term& u, std::uint32_t d1) {
    if (u.base != Term::Base::Free || u.name != x) return u;
    Term r = shift_term(t, d1);
    r.succ += u.succ;
    return r;
  };
  return rebuild(f, tm, nullptr, 0, 0);
}

Formula subst_set(const Formula& f, const SetVar& x, const SetAbstract& psi) {
  return rebuild(
      f, nullptr,
      [&](const Formula& lit, std::uint32_t, std::uint32_t) -> std::optional<Formula> {
        const SetRef& r = lit.setref();
        if (r.bound || !(r.var == x)) return std::nullopt;
        Formula v = psi.at(lit.setarg());
        return lit.positive() ? v : negate(v);
      },
      0, 0);
}

Formula rename_set(const Formula& f, const SetVar& x, const SetVar& y) {
  return rebuild(
      f, nullptr,
      [&](const Formula& lit, std::uint32_t, std::uint32_t) -> std::optional<Formula> {
        const SetRef& r = lit.setref();
        if (r.bound || !(r.var == x)) return std::nullopt;
        return Formula::setlit(SetRef{false, 0, y}, lit.positive(), lit.setarg());
      },
      0, 0);
}

namespace {
void collect_fv(const Formula& f, FreeVars& out) {
  auto term = [&](const Term& t) {
    if (t.base == Term::Base::Free) out.first.insert(t.name);
  };
  switch (f.kind()) {
    case Kind::Prim:
      for (const auto& a : f.args()) term(a);
      return;
    case Kind::SetLit:
      term(f.setarg());
      if (!f.setref().bound) out.second.insert(f.setref().var);
      return;
    case Kind::And:
    case Kind::Or:
      collect_fv(f.lhs(), out);
      collect_fv(f.rhs(), out);
      return;
    default:
      collect_fv(f.body(), out);
      return;
  }
}
}  // namespace

FreeVars free_vars(const Formula& f) {
  FreeVars out;
  collect_fv(f, out);
  return out;
}

bool occurs_free(const Formula& f, const SetVar& x) { return free_vars(f).second.count(x) > 0; }
bool occurs_free(const Formula& f, const std::string& x) {
  return free_vars(f).first.count(x) > 0;
}
bool closed_first_order(const Formula& f) { return free_vars(f).first.empty(); }

namespace {
// Context for dp/lvl: a set of free variables and marks on the enclosing
// second-order binders (innermost last).
struct Marks {
  const std::set<SetVar>* s;
  std::vector<bool> bound;
};

bool touches(const Formula& f, const Marks& m, std::uint32_t d2) {
  switch (f.kind()) {
    case Kind::Prim:
      return false;
    case Kind::SetLit: {
      const SetRef& r = f.setref();
      if (!r.bound) return m.s->count(r.var) > 0;
      if (r.index < d2) return false;
      std::uint32_t k = r.index - d2;
      return k < m.bound.size() && m.bound[m.bound.size() - 1 - k];
    }
    case Kind::And:
    case Kind::Or:
      return touches(f.lhs(), m, d2) || touches(f.rhs(), m, d2);
    case Kind::All1:
    case Kind::Ex1:
      return touches(f.body(), m, d2);
    default:
      return touches(f.body(), m, d2 + 1);
  }
}

std::uint32_t dp_rec(const Formula& f, Marks& m) {
  switch (f.kind()) {
    case Kind::Prim:
    case Kind::SetLit:
      return 0;
    case Kind::And:
    case Kind::Or:
      return std::max(dp_rec(f.lhs(), m), dp_rec(f.rhs(), m));
    case Kind::All1:
    case Kind::Ex1:
      return dp_rec(f.body(), m);
    default: {
      if (!touches(f.body(), m, 1)) return 0;
      m.bound.push_back(true);
      std::uint32_t r = dp_rec(f.body(), m) + 1;
      m.bound.pop_back();
      return r;
    }
  }
}

std::uint32_t lvl_rec(const Formula& f, Marks& m) {
  switch (f.kind()) {
    case Kind::Prim:
      return 0;
    case Kind::SetLit: {
      const SetRef& r = f.setref();
      if (!r.bound && r.var.level) return *r.var.level + 1;
      return 0;
    }
    case Kind::And:
    case Kind::Or:
      return std::max(lvl_rec(f.lhs(), m), lvl_rec(f.rhs(), m));
    case Kind::All1:
    case Kind::Ex1:
      return lvl_rec(f.body(), m);
    default: {
      if (touches(f.body(), m, 1)) {
        m.bound.push_back(true);
        std::uint32_t r = lvl_rec(f.body(), m);
        m.bound.pop_back();
        return r;
      }
      static const std::set<SetVar> empty;
      Marks fresh{&empty, std::vector<bool>(m.bound.size() + 1, false)};
      return lvl_rec(f.body(), fresh) + 1;
    }
  }
}
}  // namespace

std::uint32_t dp(const Formula& f, const std::set<SetVar>& s) {
  Marks m{&s, {}};
  return dp_rec(f, m);
}

std::uint32_t lvl(const Formula& f, const std::set<SetVar>& s) {
  Marks m{&s, {}};
  return lvl_rec(f, m);
}

Complexity comp(const Formula& q2) {
  if (!q2.is_quant2()) throw SyntaxError("comp needs a second-order quantifier: " + q2.str());
  static const std::set<SetVar> empty;
  Marks m{&empty, {true}};
  Complexity c;
  c.depth = dp_rec(q2.body(), m);
  Marks m2{&empty, {true}};
  c.level = lvl_rec(q2.body(), m2);
  return c;
}

std::uint32_t nesting_depth(const Formula& q2) { return comp(q2).depth + 1; }

Complexity comp_abstracting(const Formula& f, const SetVar& y) {
  return comp(Formula::ex2(y, f));
}

std::uint32_t rank(const Formula& f) {
  switch (f.kind()) {
    case Kind::Prim:
    case Kind::SetLit:
      return 0;
    case Kind::And:
    case Kind::Or:
      return std::max(rank(f.lhs()), rank(f.rhs())) + 1;
    default:
      return rank(f.body()) + 1;
  }
}

namespace {
bool rel_eq(const std::vector<std::uint32_t>& v) { return v[0] == v[1]; }
bool rel_lt(const std::vector<std::uint32_t>& v) { return v[0] < v[1]; }
bool rel_le(const std::vector<std::uint32_t>& v) { return v[0] <= v[1]; }
bool rel_add(const std::vector<std::uint32_t>& v) {
  return static_cast<std::uint64_t>(v[0]) + v[1] == v[2];
}
bool rel_mul(const std::vector<std::uint32_t>& v) {
  return static_cast<std::uint64_t>(v[0]) * v[1] == v[2];
}
}  // namespace

const std::vector<Relation>& relation_catalog() {
  static const std::vector<Relation> cat{
      {"=", 2, rel_eq}, {"<", 2, rel_lt}, {"<=", 2, rel_le}, {"add", 3, rel_add}, {"mul", 3, rel_mul}};
  return cat;
}

const Relation* find_relation(const std::string& id) {
  for (const auto& r : relation_catalog())
    if (r.id == id) return &r;
  return nullptr;
}

bool eval_literal(const Formula& lit) {
  if (lit.kind() != Kind::Prim) throw SyntaxError("eval_literal needs a primitive literal: " + lit.str());
  const Relation* r = find_relation(lit.rel());
  if (!r) throw SyntaxError("unknown relation " + lit.rel());
  if (r->arity != lit.args().size()) throw SyntaxError("arity mismatch for " + lit.rel());
  std::vector<std::uint32_t> vals;
  for (const auto& a : lit.args()) {
    if (!a.closed()) throw SyntaxError("eval_literal needs a closed literal: " + lit.str());
    vals.push_back(a.value());
  }
  return r->decide(vals) == lit.positive();
}

std::optional<bool> eval_bounded(const Formula& f, std::uint32_t bound) {
  switch (f.kind()) {
    case Kind::Prim:
      for (const auto& a : f.args())
        if (!a.closed()) return std::nullopt;
      return eval_literal(f);
    case Kind::SetLit:
      return std::nullopt;
    case Kind::And:
    case Kind::Or: {
      auto a = eval_bounded(f.lhs(), bound);
      auto b = eval_bounded(f.rhs(), bound);
      if (!a || !b) return std::nullopt;
      return f.kind() == Kind::And ? (*a && *b) : (*a || *b);
    }
    case Kind::All1:
    case Kind::Ex1: {
      bool all = f.kind() == Kind::All1;
      for (std::uint32_t n = 0; n < bound; ++n) {
        auto v = eval_bounded(instantiate1(f.body(), Term::numeral(n)), bound);
        if (!v) return std::nullopt;
        if (all && !*v) return false;
        if (!all && *v) return true;
      }
      return all;
    }
    default:
      return std::nullopt;
  }
}

void subformulas(const Formula& f, std::vector<Formula>& out) {
  out.push_back(f);
  switch (f.kind()) {
    case Kind::Prim:
    case Kind::SetLit:
      return;
    case Kind::And:
    case Kind::Or:
      subformulas(f.lhs(), out);
      subformulas(f.rhs(), out);
      return;
    default:
      subformulas(f.body(), out);
      return;
  }
}

}  // namespace pmp
