#include "pmp/ordinals.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

#include "pmp/collapse.hpp"
#include "pmp/cutelim.hpp"
#include "pmp/sexpr.hpp"

namespace pmp {

// ---------------------------------------------------------------- CNF

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) throw OrdinalError("coefficient overflow");
  return a + b;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) throw OrdinalError("coefficient overflow");
  return a * b;
}

}  // namespace

CnfOrdinal CnfOrdinal::nat(std::uint64_t n) {
  CnfOrdinal a;
  if (n > 0) a.terms_.push_back({CnfOrdinal{}, n});
  return a;
}

CnfOrdinal CnfOrdinal::omega() { return wpow(nat(1)); }

CnfOrdinal CnfOrdinal::wpow(const CnfOrdinal& e) {
  CnfOrdinal a;
  a.terms_.push_back({e, 1});
  return a;
}

CnfOrdinal CnfOrdinal::from_terms(std::vector<CnfTerm> terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].coeff == 0) throw OrdinalError("CNF coefficient must be positive");
    if (i > 0 && !(terms[i].exp < terms[i - 1].exp)) throw OrdinalError("CNF exponents must decrease");
  }
  CnfOrdinal a;
  a.terms_ = std::move(terms);
  return a;
}

bool CnfOrdinal::is_finite() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].exp.is_zero()); }

std::optional<std::uint64_t> CnfOrdinal::finite_value() const {
  if (!is_finite()) return std::nullopt;
  return terms_.empty() ? 0 : terms_[0].coeff;
}

std::size_t CnfOrdinal::depth() const {
  std::size_t d = 0;
  for (const auto& t : terms_) d = std::max(d, t.exp.depth() + 1);
  return d;
}

std::strong_ordering CnfOrdinal::operator<=>(const CnfOrdinal& o) const {
  std::size_t n = std::min(terms_.size(), o.terms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = terms_[i].exp <=> o.terms_[i].exp; c != 0) return c;
    if (auto c = terms_[i].coeff <=> o.terms_[i].coeff; c != 0) return c;
  }
  return terms_.size() <=> o.terms_.size();
}

bool CnfOrdinal::operator==(const CnfOrdinal& o) const { return terms_ == o.terms_; }

CnfOrdinal operator+(const CnfOrdinal& a, const CnfOrdinal& b) {
  if (b.is_zero()) return a;
  const CnfOrdinal& lead = b.terms_[0].exp;
  CnfOrdinal out;
  for (const auto& t : a.terms_) {
    if (t.exp < lead) break;
    out.terms_.push_back(t);
  }
  std::size_t from = 0;
  if (!out.terms_.empty() && out.terms_.back().exp == lead) {
    out.terms_.back().coeff = checked_add(out.terms_.back().coeff, b.terms_[0].coeff);
    from = 1;
  }
  out.terms_.insert(out.terms_.end(), b.terms_.begin() + static_cast<std::ptrdiff_t>(from), b.terms_.end());
  return out;
}

CnfOrdinal operator*(const CnfOrdinal& a, const CnfOrdinal& b) {
  if (a.is_zero() || b.is_zero()) return {};
  // Right distributivity: a * (sum w^e c) = sum a * w^e * c.
  CnfOrdinal out;
  for (const auto& t : b.terms_) {
    CnfOrdinal piece;
    if (t.exp.is_zero()) {
      piece = a;
      piece.terms_[0].coeff = checked_mul(piece.terms_[0].coeff, t.coeff);
    } else {
      piece.terms_.push_back({a.terms_[0].exp + t.exp, t.coeff});
    }
    out = out + piece;
  }
  return out;
}

CnfOrdinal natsum(const CnfOrdinal& a, const CnfOrdinal& b) {
  std::vector<CnfTerm> out;
  std::size_t i = 0, j = 0;
  const auto& x = a.terms();
  const auto& y = b.terms();
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && y[j].exp < x[i].exp)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || x[i].exp < y[j].exp) {
      out.push_back(y[j++]);
    } else {
      out.push_back({x[i].exp, checked_add(x[i].coeff, y[j].coeff)});
      ++i, ++j;
    }
  }
  return CnfOrdinal::from_terms(std::move(out));
}

CnfOrdinal max(const CnfOrdinal& a, const CnfOrdinal& b) { return a < b ? b : a; }

std::string CnfOrdinal::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& t : terms_) {
    if (!s.empty()) s += "+";
    if (t.exp.is_zero()) {
      s += std::to_string(t.coeff);
      continue;
    }
    if (t.exp == nat(1)) s += "w";
    else if (t.exp.is_finite()) s += "w^" + t.exp.str();
    else s += "w^(" + t.exp.str() + ")";
    if (t.coeff > 1) s += "*" + std::to_string(t.coeff);
  }
  return s;
}

std::vector<CnfOrdinal> default_grid() {
  CnfOrdinal w = CnfOrdinal::omega();
  std::vector<CnfOrdinal> base{CnfOrdinal::nat(0), CnfOrdinal::nat(1), CnfOrdinal::nat(2), w,
                               w + CnfOrdinal::nat(1), w * CnfOrdinal::nat(2), CnfOrdinal::wpow(CnfOrdinal::nat(2)),
                               CnfOrdinal::wpow(w)};
  std::set<CnfOrdinal> all(base.begin(), base.end());
  for (const auto& a : base)
    for (const auto& b : base) {
      all.insert(a + b);
      all.insert(natsum(a, b));
    }
  return {all.begin(), all.end()};
}

// ---------------------------------------------------------------- terms

struct OrdinalTerm::Node {
  Kind kind = Kind::Zero;
  std::uint64_t n = 0;
  std::string name;
  std::uint32_t m = 0, l = 0;
  std::vector<OrdinalTerm> args;
};

namespace {
const std::vector<OrdinalTerm> kNoArgs;
const std::string kNoName;
}  // namespace

OrdinalTerm OrdinalTerm::zero() { return {}; }

OrdinalTerm OrdinalTerm::nat(std::uint64_t n) {
  if (n == 0) return {};
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::Nat, n, {}, 0, 0, {}}));
}

OrdinalTerm OrdinalTerm::omega() { return OrdinalTerm(std::make_shared<Node>(Node{Kind::Omega, 0, {}, 0, 0, {}})); }

OrdinalTerm OrdinalTerm::var(std::string name) {
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::Var, 0, std::move(name), 0, 0, {}}));
}

OrdinalTerm OrdinalTerm::placeholder(std::uint32_t m, std::uint32_t l) {
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::Placeholder, 0, {}, m, l, {}}));
}

OrdinalTerm OrdinalTerm::plus(std::vector<OrdinalTerm> args) {
  if (args.size() == 1) return args[0];
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::Plus, 0, {}, 0, 0, std::move(args)}));
}

OrdinalTerm OrdinalTerm::times(OrdinalTerm a, OrdinalTerm b) {
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::Times, 0, {}, 0, 0, {std::move(a), std::move(b)}}));
}

OrdinalTerm OrdinalTerm::natsum(std::vector<OrdinalTerm> args) {
  if (args.size() == 1) return args[0];
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::NatSum, 0, {}, 0, 0, std::move(args)}));
}

OrdinalTerm OrdinalTerm::wpow(OrdinalTerm a) {
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::WPow, 0, {}, 0, 0, {std::move(a)}}));
}

OrdinalTerm OrdinalTerm::max(std::vector<OrdinalTerm> args) {
  if (args.size() == 1) return args[0];
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::Max, 0, {}, 0, 0, std::move(args)}));
}

OrdinalTerm OrdinalTerm::apply(std::string head, std::vector<OrdinalTerm> args) {
  return OrdinalTerm(std::make_shared<Node>(Node{Kind::Apply, 0, std::move(head), 0, 0, std::move(args)}));
}

OrdinalTerm OrdinalTerm::from_cnf(const CnfOrdinal& a) {
  std::vector<OrdinalTerm> parts;
  for (const auto& t : a.terms()) {
    OrdinalTerm base = t.exp == CnfOrdinal::nat(1) ? omega() : wpow(from_cnf(t.exp));
    if (t.exp.is_zero()) parts.push_back(nat(t.coeff));
    else parts.push_back(t.coeff == 1 ? base : times(base, nat(t.coeff)));
  }
  if (parts.empty()) return zero();
  return plus(std::move(parts));
}

OrdinalTerm::Kind OrdinalTerm::kind() const { return node_ ? node_->kind : Kind::Zero; }
std::uint64_t OrdinalTerm::n() const { return node_ ? node_->n : 0; }
const std::string& OrdinalTerm::name() const { return node_ ? node_->name : kNoName; }
std::uint32_t OrdinalTerm::m() const { return node_ ? node_->m : 0; }
std::uint32_t OrdinalTerm::l() const { return node_ ? node_->l : 0; }
const std::vector<OrdinalTerm>& OrdinalTerm::args() const { return node_ ? node_->args : kNoArgs; }

std::string OrdinalTerm::placeholder_name(std::uint32_t m, std::uint32_t l) {
  return "Omega_" + std::to_string(m) + "_" + std::to_string(l);
}

std::string OrdinalTerm::str() const {
  auto list = [this](const std::string& head) {
    std::string s = "(" + head;
    for (const auto& a : args()) s += " " + a.str();
    return s + ")";
  };
  switch (kind()) {
    case Kind::Zero: return "0";
    case Kind::Nat: return std::to_string(n());
    case Kind::Omega: return "w";
    case Kind::Var: return "(var " + name() + ")";
    case Kind::Placeholder: return "(omega " + std::to_string(m()) + " " + std::to_string(l()) + ")";
    case Kind::Plus: return list("plus");
    case Kind::Times: return list("times");
    case Kind::NatSum: return list("natsum");
    case Kind::WPow: return list("wpow");
    case Kind::Max: return list("max");
    case Kind::Apply: return list("apply " + name());
  }
  return "?";
}

namespace {

std::uint64_t parse_u64(const Sexp& s) {
  if (s.kind != Sexp::Kind::Atom || s.text.empty() ||
      !std::all_of(s.text.begin(), s.text.end(), [](char c) { return c >= '0' && c <= '9'; }))
    s.error("expected a natural number");
  try {
    return std::stoull(s.text);
  } catch (const std::out_of_range&) {
    s.error("number out of range");
  }
}

OrdinalTerm term_of(const Sexp& s) {
  if (s.kind == Sexp::Kind::Atom) {
    if (s.text == "w") return OrdinalTerm::omega();
    return OrdinalTerm::nat(parse_u64(s));
  }
  if (s.kind != Sexp::Kind::List || s.items.empty()) s.error("expected an ordinal term");
  std::string h = s.head();
  auto arity = [&](std::size_t k) {
    if (s.items.size() != k + 1) s.error(h + " takes " + std::to_string(k) + " argument(s)");
  };
  auto rest = [&](std::size_t from) {
    std::vector<OrdinalTerm> v;
    for (std::size_t i = from; i < s.items.size(); ++i) v.push_back(term_of(s.items[i]));
    return v;
  };
  if (h == "var") {
    arity(1);
    if (s.items[1].kind != Sexp::Kind::Atom) s.items[1].error("expected a variable name");
    return OrdinalTerm::var(s.items[1].text);
  }
  if (h == "omega") {
    arity(2);
    return OrdinalTerm::placeholder(static_cast<std::uint32_t>(parse_u64(s.items[1])),
                                    static_cast<std::uint32_t>(parse_u64(s.items[2])));
  }
  if (h == "wpow") {
    arity(1);
    return OrdinalTerm::wpow(term_of(s.items[1]));
  }
  if (h == "times") {
    arity(2);
    return OrdinalTerm::times(term_of(s.items[1]), term_of(s.items[2]));
  }
  if (h == "plus" || h == "natsum" || h == "max") {
    if (s.items.size() < 2) s.error(h + " needs an argument");
    if (h == "plus") return OrdinalTerm::plus(rest(1));
    if (h == "natsum") return OrdinalTerm::natsum(rest(1));
    return OrdinalTerm::max(rest(1));
  }
  if (h == "apply") {
    if (s.items.size() < 2 || s.items[1].kind != Sexp::Kind::Atom) s.error("apply needs a head name");
    return OrdinalTerm::apply(s.items[1].text, rest(2));
  }
  s.error("unknown ordinal term head '" + h + "'");
}

void collect_vars(const OrdinalTerm& t, std::set<std::string>& out) {
  if (t.kind() == OrdinalTerm::Kind::Var) out.insert(t.name());
  if (t.kind() == OrdinalTerm::Kind::Placeholder) out.insert(OrdinalTerm::placeholder_name(t.m(), t.l()));
  for (const auto& a : t.args()) collect_vars(a, out);
}

}  // namespace

OrdinalTerm parse_ordinal_term(std::string_view text) {
  auto v = read_sexps(text);
  if (v.size() != 1) throw ParseError("expected exactly one ordinal term", 1, 1);
  return term_of(v[0]);
}

std::vector<std::string> term_variables(const OrdinalTerm& t) {
  std::set<std::string> s;
  collect_vars(t, s);
  return {s.begin(), s.end()};
}

OrdinalTerm substitute(const OrdinalTerm& t, const std::map<std::string, OrdinalTerm>& s) {
  using K = OrdinalTerm::Kind;
  auto sub_args = [&] {
    std::vector<OrdinalTerm> v;
    for (const auto& a : t.args()) v.push_back(substitute(a, s));
    return v;
  };
  switch (t.kind()) {
    case K::Var: {
      auto it = s.find(t.name());
      return it == s.end() ? t : it->second;
    }
    case K::Placeholder: {
      auto it = s.find(OrdinalTerm::placeholder_name(t.m(), t.l()));
      return it == s.end() ? t : it->second;
    }
    case K::Plus: return OrdinalTerm::plus(sub_args());
    case K::Times: return OrdinalTerm::times(substitute(t.args()[0], s), substitute(t.args()[1], s));
    case K::NatSum: return OrdinalTerm::natsum(sub_args());
    case K::WPow: return OrdinalTerm::wpow(substitute(t.args()[0], s));
    case K::Max: return OrdinalTerm::max(sub_args());
    case K::Apply: return OrdinalTerm::apply(t.name(), sub_args());
    default: return t;
  }
}

CnfOrdinal eval_term(const OrdinalTerm& t, const Valuation& v, EvalLimits lim) {
  using K = OrdinalTerm::Kind;
  auto lookup = [&](const std::string& name) {
    auto it = v.vars.find(name);
    if (it == v.vars.end()) throw OrdinalError("unassigned variable " + name);
    return it->second;
  };
  auto args = [&] {
    std::vector<CnfOrdinal> out;
    for (const auto& a : t.args()) out.push_back(eval_term(a, v, lim));
    return out;
  };
  CnfOrdinal r;
  switch (t.kind()) {
    case K::Zero: break;
    case K::Nat: r = CnfOrdinal::nat(t.n()); break;
    case K::Omega: r = CnfOrdinal::omega(); break;
    case K::Var: r = lookup(t.name()); break;
    case K::Placeholder: r = lookup(OrdinalTerm::placeholder_name(t.m(), t.l())); break;
    case K::Plus:
      for (const auto& a : args()) r = r + a;
      break;
    case K::Times: {
      auto a = args();
      r = a[0] * a[1];
      break;
    }
    case K::NatSum:
      for (const auto& a : args()) r = natsum(r, a);
      break;
    case K::WPow: r = CnfOrdinal::wpow(args()[0]); break;
    case K::Max:
      for (const auto& a : args()) r = max(r, a);
      break;
    case K::Apply: {
      auto it = v.fns.find(t.name());
      if (it == v.fns.end()) throw OrdinalError("uninterpreted function " + t.name());
      r = it->second(args());
      break;
    }
  }
  if (r.depth() > lim.max_depth)
    throw OrdinalError("value " + r.str() + " exceeds exponent depth " + std::to_string(lim.max_depth));
  return r;
}

std::string Comparison::str() const {
  if (!counterexample) return "less on " + std::to_string(evaluated) + " samples";
  std::string s = "counterexample";
  for (const auto& [k, v] : *counterexample) s += " " + k + "=" + v.str();
  return s;
}

Comparison compare_eval(const OrdinalTerm& s, const OrdinalTerm& t, const SampleSpace& space) {
  std::set<std::string> names;
  collect_vars(s, names);
  collect_vars(t, names);
  std::vector<std::string> vars(names.begin(), names.end());
  std::vector<CnfOrdinal> grid;
  for (const auto& g : space.grid)
    if (!(g < space.threshold)) grid.push_back(g);
  Comparison out;
  if (grid.empty() && !vars.empty()) return out;
  auto test = [&](const Valuation& v) {
    ++out.evaluated;
    if (eval_term(s, v) < eval_term(t, v)) return true;
    out.less_on_samples = false;
    out.counterexample = v.vars;
    return false;
  };
  double total = 1;
  for (std::size_t i = 0; i < vars.size(); ++i) total *= static_cast<double>(grid.size());
  if (total <= static_cast<double>(space.exhaustive_upto)) {
    std::vector<std::size_t> idx(vars.size(), 0);
    for (;;) {
      Valuation v;
      for (std::size_t i = 0; i < vars.size(); ++i) v.vars[vars[i]] = grid[idx[i]];
      if (!test(v)) return out;
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == grid.size()) idx[k++] = 0;
      if (k == idx.size()) return out;
    }
  }
  std::mt19937_64 rng(space.seed);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  for (std::size_t n = 0; n < space.samples; ++n) {
    Valuation v;
    for (const auto& x : vars) v.vars[x] = grid[pick(rng)];
    if (!test(v)) return out;
  }
  return out;
}

// ---------------------------------------------------------------- open tags

std::string OpenTag::key() const {
  switch (kind) {
    case Kind::Placeholder: return OrdinalTerm::placeholder_name(c.depth, c.level);
    case Kind::Tag: return "tag" + sequent_str(root) + "@" + address_str(pos);
    case Kind::Family: return "fam" + sequent_str(root) + "@" + address_str(pos) + "/" + Rule(parent).str();
  }
  return "?";
}

bool OpenTag::names(const Tag& t) const {
  if (kind == Kind::Placeholder || t.root != root) return false;
  if (kind == Kind::Tag) return t.pos == pos;
  if (t.pos.size() != pos.size() + 1 || !is_prefix(pos, t.pos)) return false;
  const PremiseIndex& last = t.pos.back();
  return last.parent && Rule(last.parent) == Rule(parent);
}

const OpenTag* OpenTagSet::find(const Tag& t) const {
  for (auto it = tags.rbegin(); it != tags.rend(); ++it)
    if (it->names(t)) return &*it;
  return nullptr;
}

const OpenTag* OpenTagSet::find_key(const std::string& key) const {
  for (const auto& t : tags)
    if (t.key() == key) return &t;
  return nullptr;
}

const OpenTag* OpenTagSet::current(const Sequent& root) const {
  for (auto it = tags.rbegin(); it != tags.rend(); ++it)
    if (it->kind != OpenTag::Kind::Placeholder && it->root == root) return &*it;
  return nullptr;
}

std::vector<std::string> OpenTagSet::keys() const {
  std::vector<std::string> out;
  for (const auto& t : tags) out.push_back(t.key());
  return out;
}

OpenTagParams open_tag_params(const TheoryId& t) {
  using K = TheoryId::Kind;
  switch (t.kind) {
    case K::BaseM:
    case K::Full:
    case K::WithCuts:
    case K::ReadTheory:
    case K::CutTheory: return {t.m, t.L};
    case K::PA2:
    case K::PA2CutFree: return {0, 0};
    default: return {t.N + 1, t.L};
  }
}

namespace {

bool single_ex2_too_deep(const Sequent& root, std::uint32_t m) {
  if (root.size() != 1) return false;
  const Formula& f = *root.begin();
  return f.kind() == Kind::Ex2 && comp(f).depth >= m;
}

void add_unique(OpenTagSet& s, OpenTag t) {
  std::string k = t.key();
  if (!s.find_key(k)) s.tags.push_back(std::move(t));
}

}  // namespace

OpenTagSet open_tags_root(OpenTagParams p, const std::vector<Tag>& extra) {
  OpenTagSet s;
  for (std::uint32_t m = 0; m < p.m; ++m)
    for (std::uint32_t l = 0; l <= p.L; ++l) s.tags.push_back(OpenTag{OpenTag::Kind::Placeholder, {m, l}, {}, {}, {}});
  std::vector<Tag> sorted = extra;
  sort_tags(sorted);
  for (const auto& t : sorted)
    if (!single_ex2_too_deep(t.root, p.m)) add_unique(s, OpenTag{OpenTag::Kind::Tag, {}, t.root, t.pos, {}});
  return s;
}

OpenTagSet open_tags_step(const OpenTagSet& s, const Rule& r, const PremiseIndex& i, OpenTagParams p) {
  OpenTagSet out = s;
  auto flat_tag = [&] {
    if (comp(r.node().f).depth >= p.m) return;
    for (const auto& t : premise_sequent(r, i).tags) add_unique(out, OpenTag{OpenTag::Kind::Tag, {}, t.root, t.pos, {}});
  };
  switch (r.kind()) {
    case RuleKind::OmegaFlat: flat_tag(); break;
    case RuleKind::CutOmegaFlat:
      if (i.label == Label::Bot) flat_tag();
      break;
    case RuleKind::Read:
      if (s.find(r.tag())) {
        for (const auto& fam : premise_sequent(r, i).families)
          add_unique(out, OpenTag{OpenTag::Kind::Family, {}, fam.root, fam.base, fam.parent});
        for (const auto& t : premise_sequent(r, i).tags)
          if (t.root == r.tag().root) add_unique(out, OpenTag{OpenTag::Kind::Tag, {}, t.root, t.pos, {}});
      }
      break;
    default: break;
  }
  return out;
}

OpenTagSet open_tags(const ProofTree& d, const Address& sigma) {
  OpenTagParams p = open_tag_params(d.theory());
  OpenTagSet s = open_tags_root(p, d.declared().tags);
  NodePtr n = d.root();
  for (const auto& i : sigma) {
    Rule r = n->rule();
    s = open_tags_step(s, r, i, p);
    n = n->child(i);
  }
  return s;
}

std::optional<std::string> project_tag(const OpenTagSet& sigma, const OpenTag& t, OpenTagParams p) {
  std::string key = t.key();
  if (sigma.find_key(key)) return key;
  if (t.kind == OpenTag::Kind::Placeholder) return std::nullopt;
  const OpenTag* best = nullptr;
  for (const auto& c : sigma.tags) {
    if (c.kind == OpenTag::Kind::Placeholder || c.root != t.root || !is_prefix(c.pos, t.pos)) continue;
    if (!best || c.pos.size() >= best->pos.size()) best = &c;
  }
  if (best) return best->key();
  Complexity c = tag_complexity(Tag{t.root, {}, t.root, {}});
  if (c.depth < p.m && c.level <= p.L) return OrdinalTerm::placeholder_name(c.depth, c.level);
  return std::nullopt;
}

// ---------------------------------------------------------------- bounds

BoundAssignment uniform_bound(OrdinalTerm t, std::map<std::string, Sequent> roles) {
  return BoundAssignment{[t](const Address&) { return std::optional<OrdinalTerm>(t); }, std::move(roles)};
}

namespace {

struct CatalogEntry {
  CatalogOp op;
  const char* name;
  std::vector<std::string> roles;
};

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> v{
      {CatalogOp::Id, "id", {"b"}},
      {CatalogOp::InverseBot, "inverse-bot", {"b"}},
      {CatalogOp::InverseAnd, "inverse-and", {"b"}},
      {CatalogOp::InverseForall, "inverse-forall", {"b"}},
      {CatalogOp::ElimOr, "elim-or", {"band", "bor"}},
      {CatalogOp::ElimForall, "elim-forall", {"ball", "bex"}},
      {CatalogOp::ElimSetLit, "elim-setlit", {"bx", "bnx"}},
      {CatalogOp::ElimQ2, "elim-q2", {"ball2", "bex2"}},
      {CatalogOp::Reduce, "reduce", {"b"}},
      {CatalogOp::Substitution, "substitution", {}},
      {CatalogOp::ExcludedMiddle, "excluded-middle", {}},
      {CatalogOp::Embedding, "embedding", {}},
  };
  return v;
}

std::vector<OrdinalTerm> placeholders_below(std::uint32_t m, std::uint32_t L) {
  std::vector<OrdinalTerm> v;
  for (std::uint32_t a = 0; a < m; ++a)
    for (std::uint32_t l = 0; l <= L; ++l) v.push_back(OrdinalTerm::placeholder(a, l));
  return v;
}

}  // namespace

std::string catalog_name(CatalogOp op) {
  for (const auto& e : catalog_entries())
    if (e.op == op) return e.name;
  return "?";
}

std::optional<CatalogOp> parse_catalog_op(std::string_view s) {
  for (const auto& e : catalog_entries())
    if (s == e.name) return e.op;
  return std::nullopt;
}

std::vector<std::string> catalog_roles(CatalogOp op) {
  for (const auto& e : catalog_entries())
    if (e.op == op) return e.roles;
  return {};
}

OrdinalTerm bound_catalog(CatalogOp op, const CatalogParams& p) {
  using T = OrdinalTerm;
  switch (op) {
    case CatalogOp::Id:
    case CatalogOp::InverseBot:
    case CatalogOp::InverseAnd:
    case CatalogOp::InverseForall: return T::var("b");
    case CatalogOp::ElimOr: return T::plus({T::var("band"), T::var("bor")});
    case CatalogOp::ElimForall: return T::plus({T::var("ball"), T::var("bex")});
    case CatalogOp::ElimSetLit: return T::natsum({T::var("bx"), T::var("bnx")});
    case CatalogOp::ElimQ2: return T::natsum({T::var("ball2"), T::var("bex2")});
    case CatalogOp::Reduce: return T::wpow(T::var("b"));
    case CatalogOp::Substitution: {
      std::vector<T> args;
      for (std::uint32_t a = 0; a < p.m; ++a) args.push_back(T::placeholder(a, p.level));
      return T::apply("b", std::move(args));
    }
    case CatalogOp::ExcludedMiddle: {
      auto ph = placeholders_below(p.m, p.L);
      if (ph.empty()) return T::nat(p.k);
      return T::plus({T::max(std::move(ph)), T::nat(p.k)});
    }
    case CatalogOp::Embedding: {
      std::vector<T> parts;
      for (std::uint32_t a = 0; a < p.m; ++a)
        for (std::uint32_t l = 0; l <= p.L; ++l)
          parts.push_back(T::apply(T::placeholder_name(a, l), placeholders_below(a, p.L)));
      parts.push_back(T::omega());
      parts.push_back(T::nat(p.k));
      return T::plus(std::move(parts));
    }
  }
  return {};
}

BoundAssignment catalog_assignment(CatalogOp op, std::map<std::string, Sequent> roles, const CatalogParams& p) {
  OrdinalTerm spine = bound_catalog(op, p);
  std::optional<OrdinalTerm> below;
  if (op == CatalogOp::ElimOr) below = OrdinalTerm::var("band");
  if (op == CatalogOp::ElimForall) below = OrdinalTerm::var("ball");
  if (!below) return uniform_bound(spine, std::move(roles));
  return BoundAssignment{[spine, below](const Address& a) -> std::optional<OrdinalTerm> {
                           for (std::size_t j = 0; j < a.size(); ++j) {
                             const PremiseIndex& i = a[j];
                             if (i.label != Label::Bot || !i.parent || Rule(i.parent).kind() != RuleKind::Cut) continue;
                             // A copied input rule sits right below the Read branch naming it.
                             bool copied = j > 0 && a[j - 1].label == Label::Branch &&
                                           a[j - 1].branch_rule() == Rule(i.parent);
                             if (!copied) return below;
                           }
                           return spine;
                         },
                         std::move(roles)};
}

namespace {

struct Frame {
  Address at;
  OpenTagSet open;
  std::optional<OrdinalTerm> term;  // set for non-Read nodes
};

// A role or placeholder name resolved against open tags, as open-tag keys.
std::optional<std::string> resolve(const std::string& name, const BoundAssignment& o, const OpenTagSet& open) {
  auto it = o.roles.find(name);
  if (it == o.roles.end()) return open.find_key(name) ? std::optional<std::string>(name) : std::nullopt;
  const OpenTag* t = open.current(it->second);
  if (!t) return std::nullopt;
  return t->key();
}

struct Checker {
  const BoundAssignment& o;
  const BoundCheckParams& p;
  OpenTagParams tp;
  std::mt19937_64 rng;
  BoundReport rep;
  std::size_t visits = 0;

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

  // Valuation of a term at a frame from values of open-tag keys.
  std::optional<Valuation> valuation(const OrdinalTerm& t, const Frame& f, const std::map<std::string, CnfOrdinal>& vals,
                                     std::string& err) {
    Valuation v;
    for (const auto& name : term_variables(t)) {
      auto key = resolve(name, o, f.open);
      if (!key) {
        err = "variable " + name + " names no open tag";
        return std::nullopt;
      }
      v.vars[name] = vals.at(*key);
    }
    return v;
  }

  void check_pair(const Frame& s, const Frame& t) {
    ++rep.pairs;
    const auto& grid = p.grid;
    for (std::size_t k = 0; k < p.samples; ++k) {
      std::map<std::string, CnfOrdinal> fs, ft;
      for (const auto& x : s.open.tags) fs[x.key()] = grid[pick(grid.size())];
      bool feasible = true;
      for (const auto& x : t.open.tags) {
        auto img = project_tag(s.open, x, tp);
        std::vector<std::size_t> allowed;
        if (!img) {
          for (std::size_t i = 0; i < grid.size(); ++i) allowed.push_back(i);
        } else {
          const CnfOrdinal& cap = fs.at(*img);
          bool strict = *img != x.key();
          for (std::size_t i = 0; i < grid.size(); ++i)
            if (strict ? grid[i] < cap : grid[i] <= cap) allowed.push_back(i);
        }
        if (allowed.empty()) {
          feasible = false;
          break;
        }
        // The first sample takes every tag as large as allowed.
        ft[x.key()] = grid[k == 0 ? allowed.back() : allowed[pick(allowed.size())]];
      }
      if (!feasible) continue;
      std::string err;
      auto vs = valuation(*s.term, s, fs, err);
      auto vt = vs ? valuation(*t.term, t, ft, err) : std::nullopt;
      if (!vs || !vt) {
        rep.verdict.fail(err, vs ? t.at : s.at);
        return;
      }
      ++rep.comparisons;
      CnfOrdinal a, b;
      try {
        a = eval_term(*t.term, *vt, p.lim);
        b = eval_term(*s.term, *vs, p.lim);
      } catch (const OrdinalError& e) {
        rep.verdict.fail(e.what(), t.at);
        return;
      }
      if (a < b) continue;
      std::string w = "bound " + t.term->str() + " = " + a.str() + " at " + address_str(t.at) + " not below " +
                      s.term->str() + " = " + b.str() + " at " + address_str(s.at) + " under";
      for (const auto& [name, val] : vt->vars) w += " " + name + "=" + val.str();
      w += " /";
      for (const auto& [name, val] : vs->vars) w += " " + name + "=" + val.str();
      rep.verdict.fail(w, t.at);
      return;
    }
  }

  void walk(const NodePtr& n, Frame f, std::vector<const Frame*>& stack) {
    if (rep.verdict.failures.size() >= 8) return;
    if (++visits > p.obs.budget) {
      rep.verdict.truncated = true;
      return;
    }
    ++rep.nodes;
    const Rule& r = n->rule();
    if (!r.is_read()) {
      f.term = o.at(f.at);
      if (!f.term) {
        rep.verdict.fail("missing bound", f.at);
        return;
      }
      for (const Frame* s : stack)
        if (s->term) check_pair(*s, f);
    }
    if (f.at.size() >= p.fuel) return;
    stack.push_back(&f);
    for (const auto& i : sampled_premises(r, p.obs)) {
      NodePtr c;
      try {
        c = n->child(i);
      } catch (const AddressError& e) {
        rep.verdict.fail(e.what(), f.at);
        continue;
      }
      Frame next{f.at, open_tags_step(f.open, r, i, tp), std::nullopt};
      next.at.push_back(i);
      walk(c, std::move(next), stack);
    }
    stack.pop_back();
  }
};

}  // namespace

BoundReport check_bound_upto(const ProofTree& d, const BoundAssignment& o, const BoundCheckParams& p) {
  if (p.grid.empty()) throw std::invalid_argument("empty sample grid");
  OpenTagParams tp = p.params ? *p.params : open_tag_params(d.theory());
  Checker c{o, p, tp, std::mt19937_64(p.seed), {}, 0};
  std::vector<const Frame*> stack;
  try {
    c.walk(d.root(), Frame{{}, open_tags_root(tp, d.declared().tags), std::nullopt}, stack);
  } catch (const AddressError& e) {
    c.rep.verdict.fail(e.what(), {});
  }
  return c.rep;
}

Verdict check_decrease_direct(const ProofTree& d, const BoundAssignment& o, std::uint32_t fuel, const Observe& obs) {
  Verdict v;
  std::size_t visits = 0;
  std::function<void(const NodePtr&, const Address&, std::optional<CnfOrdinal>)> go =
      [&](const NodePtr& n, const Address& at, std::optional<CnfOrdinal> above) {
        if (v.failures.size() >= 8) return;
        if (++visits > obs.budget) {
          v.truncated = true;
          return;
        }
        const Rule& r = n->rule();
        if (!r.is_read()) {
          auto t = o.at(at);
          if (!t) {
            v.fail("missing bound", at);
            return;
          }
          CnfOrdinal here = eval_term(*t, {});
          if (above && !(here < *above)) v.fail(here.str() + " not below " + above->str(), at);
          above = here;
        }
        if (at.size() >= fuel) return;
        for (const auto& i : sampled_premises(r, obs)) {
          Address next = at;
          next.push_back(i);
          go(n->child(i), next, above);
        }
      };
  go(d.root(), {}, std::nullopt);
  return v;
}

BoundAssignment height_bound(const ProofTree& d, std::uint32_t fuel, const Observe& obs) {
  (void)obs;
  auto heights = std::make_shared<std::unordered_map<Address, std::uint64_t, AddressHash>>();
  std::function<std::uint64_t(const NodePtr&, const Address&)> go = [&](const NodePtr& n, const Address& at) {
    if (at.size() > fuel) throw OrdinalError("tree deeper than " + std::to_string(fuel) + " at " + address_str(at));
    const Rule& r = n->rule();
    PremiseSpec spec = rule_premises(r);
    if (spec.kind != PremiseSpec::Kind::Finite)
      throw OrdinalError("infinitely branching " + r.name() + " at " + address_str(at));
    std::uint64_t h = 0;
    for (const auto& i : spec.list) {
      Address next = at;
      next.push_back(i);
      h = std::max(h, go(n->child(i), next) + 1);
    }
    (*heights)[at] = h;
    return h;
  };
  go(d.root(), {});
  return BoundAssignment{[heights](const Address& a) -> std::optional<OrdinalTerm> {
                           auto it = heights->find(a);
                           if (it == heights->end()) return std::nullopt;
                           return OrdinalTerm::nat(it->second);
                         },
                         {}};
}

namespace {

std::optional<std::size_t> root_index(const std::vector<Sequent>& roots, const Rule& r) {
  if (!r.is_read()) return std::nullopt;
  for (std::size_t i = 0; i < roots.size(); ++i)
    if (roots[i] == r.tag().root) return i;
  return std::nullopt;
}

struct ApplyTrace {
  Address h;
  OpenTagSet tags;
};

// h(sigma) for apply_node, replaying its Read resolution and Rep insertion.
ApplyTrace trace_apply(const LocalFunction& f, const std::vector<NodePtr>& inputs, const Address& out) {
  OpenTagParams tp = open_tag_params(f.body.theory());
  ApplyTrace tr{{}, open_tags_root(tp, f.body.declared().tags)};
  NodePtr cur = f.body.root();
  std::optional<Sequent> prev;
  std::size_t k = 0;
  for (;;) {
    for (auto idx = root_index(f.roots, cur->rule()); idx; idx = root_index(f.roots, cur->rule())) {
      Rule r = cur->rule();
      PremiseIndex i = r.branch(input_at(inputs[*idx], r.tag().pos)->rule());
      tr.tags = open_tags_step(tr.tags, r, i, tp);
      tr.h.push_back(i);
      cur = cur->child(i);
    }
    Rule r = cur->rule();
    if (k == out.size()) return tr;
    if (prev && r.is_read() && r.tag().root == *prev) {
      ++k;  // the separating Rep
      prev.reset();
      if (k == out.size()) return tr;
    }
    const PremiseIndex& i = out[k++];
    tr.tags = open_tags_step(tr.tags, r, i, tp);
    tr.h.push_back(i);
    prev = r.is_read() ? std::optional<Sequent>(r.tag().root) : std::nullopt;
    cur = cur->child(i);
  }
}

}  // namespace

BoundAssignment compose_bounds(const LocalFunction& f, const BoundAssignment& of, const std::vector<NodePtr>& inputs,
                               const std::vector<BoundAssignment>& input_bounds) {
  if (inputs.size() != f.roots.size() || input_bounds.size() != f.roots.size())
    throw std::invalid_argument("one input and one input bound per root required");
  BoundAssignment out;
  for (const auto& [name, root] : of.roles)
    if (std::find(f.roots.begin(), f.roots.end(), root) == f.roots.end()) out.roles[name] = root;
  for (const auto& ib : input_bounds) out.roles.insert(ib.roles.begin(), ib.roles.end());
  out.at = [f, of, inputs, input_bounds](const Address& a) -> std::optional<OrdinalTerm> {
    ApplyTrace tr = trace_apply(f, inputs, a);
    auto t = of.at(tr.h);
    if (!t) return std::nullopt;
    std::map<std::string, OrdinalTerm> sub;
    for (const auto& name : term_variables(*t)) {
      auto role = of.roles.find(name);
      const OpenTag* tag = role != of.roles.end() ? tr.tags.current(role->second) : tr.tags.find_key(name);
      if (!tag) {
        if (role != of.roles.end()) return std::nullopt;
        continue;
      }
      auto it = std::find(f.roots.begin(), f.roots.end(), tag->root);
      if (tag->kind == OpenTag::Kind::Placeholder || it == f.roots.end()) continue;
      auto v = input_bounds[static_cast<std::size_t>(it - f.roots.begin())].at(tag->pos);
      if (!v) return std::nullopt;
      sub[name] = *v;
    }
    return substitute(*t, sub);
  };
  return out;
}

BoundAssignment lift_bounds(const LocalFunction& f, const BoundAssignment& of, const TheoryId& plus) {
  (void)plus;
  BoundAssignment out;
  out.roles = of.roles;
  out.at = [f, of](const Address& a) -> std::optional<OrdinalTerm> {
    // h follows the lifted tree back to f, staying put across passed-through rules.
    NodePtr cur = f.body.root();
    Address h;
    std::size_t k = 0;
    while (k < a.size()) {
      Rule r = cur->rule();
      if (!root_index(f.roots, r)) {
        h.push_back(a[k]);
        cur = cur->child(a[k++]);
        continue;
      }
      Rule br = a[k++].branch_rule();
      if (theory_contains(r.node().theory, br)) {
        PremiseIndex i = r.branch(br);
        h.push_back(i);
        cur = cur->child(i);
        continue;
      }
      if (k == a.size()) break;
      ++k;  // premise of the passed-through rule; f stays at its Read
    }
    return of.at(h);
  };
  return out;
}

CatalogInstance cut_catalog(const Formula& f, const LocalFunction& op) {
  const auto& r = op.roots;
  switch (f.kind()) {
    case Kind::Prim: return {CatalogOp::InverseBot, {{"b", r[0]}}};
    case Kind::SetLit: return {CatalogOp::ElimSetLit, {{"bx", r[0]}, {"bnx", r[1]}}};
    case Kind::And:
    case Kind::Or: return {CatalogOp::ElimOr, {{"bor", r[0]}, {"band", r[1]}}};
    case Kind::All1:
    case Kind::Ex1: return {CatalogOp::ElimForall, {{"bex", r[0]}, {"ball", r[1]}}};
    case Kind::All2:
    case Kind::Ex2: return {CatalogOp::ElimQ2, {{"ball2", r[0]}, {"bex2", r[1]}}};
  }
  throw std::logic_error("cut catalog: unknown formula kind");
}

namespace {

struct ReduceBound {
  std::uint32_t r, N, L;

  static OrdinalTerm family(const Address& base, const Rule& parent) {
    OpenTag t;
    t.kind = OpenTag::Kind::Family;
    t.pos = base;
    t.parent = parent.ptr();
    return OrdinalTerm::var(t.key());
  }

  // The open tag a Read at pos reads: the root tag or a family member.
  static OrdinalTerm read_tag(const Address& pos) {
    OpenTag t;
    if (pos.empty()) return OrdinalTerm::var(t.key());
    Address base(pos.begin(), pos.end() - 1);
    return family(base, Rule(pos.back().parent));
  }

  // Bound at a[k..] below n, the Read of the input at its tag position.
  OrdinalTerm at_read(const NodePtr& n, const Address& a, std::size_t k) const {
    const Address& p = n->rule().tag().pos;
    if (k == a.size()) return OrdinalTerm::wpow(read_tag(p));
    Rule in = a[k].branch_rule();
    NodePtr c = n->child(a[k]);
    bool removed = in.kind() == RuleKind::Cut && rank(in.node().f) == r;
    if (k + 1 == a.size())
      return removed ? OrdinalTerm::times(OrdinalTerm::wpow(family(p, in)), OrdinalTerm::nat(2))
                     : OrdinalTerm::wpow(family(p, in));
    if (removed) return at_operator(p, in, a, k + 2);
    return at_read(c->child(a[k + 1]), a, k + 2);
  }

  OrdinalTerm at_operator(const Address& p, const Rule& cut, const Address& a, std::size_t k) const {
    TheoryId ops = TheoryId::no_read(N, L, r);
    CutDispatch d = dispatch_cut(cut.node().f, ops);
    std::vector<NodePtr> inputs;
    for (Label side : d.sides) {
      Address q = p;
      q.push_back(cut.idx(side));
      inputs.push_back(reduce_read(r, N, L, q));
    }
    LocalFunction lifted{d.op.roots, d.op.domains, TheoryId::universal(),
                         ProofTree(TheoryId::universal(), d.op.body.declared(),
                                   lift_node(d.op.body.root(), d.op.roots, TheoryId::universal()))};
    ApplyTrace tr = trace_apply(lifted, inputs, Address(a.begin() + static_cast<std::ptrdiff_t>(k), a.end()));
    CatalogInstance ci = cut_catalog(cut.node().f, d.op);
    auto t = lift_bounds(d.op, catalog_assignment(ci.op, ci.roles), TheoryId::universal()).at(tr.h);
    if (!t) throw OrdinalError("reduce bound: operator has no bound at " + address_str(tr.h));
    std::map<std::string, OrdinalTerm> sub;
    for (const auto& [name, root] : ci.roles) {
      auto it = std::find(d.op.roots.begin(), d.op.roots.end(), root);
      const NodePtr& input = inputs[static_cast<std::size_t>(it - d.op.roots.begin())];
      const OpenTag* cur = tr.tags.current(root);
      sub[name] = cur ? at_read(input, cur->pos, 0) : at_read(input, {}, 0);
    }
    return substitute(*t, sub);
  }
};

}  // namespace

BoundAssignment reduce_assignment(std::uint32_t r, std::uint32_t N, std::uint32_t L) {
  ReduceBound rb{r, N, L};
  NodePtr root = reduce_read(r, N, L, {});
  return BoundAssignment{[rb, root](const Address& a) -> std::optional<OrdinalTerm> {
                           if (a.empty()) return std::nullopt;
                           return rb.at_read(root, a, 0);
                         },
                         {}};
}

}  // namespace pmp
