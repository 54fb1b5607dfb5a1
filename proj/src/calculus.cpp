#include "pmp/calculus.hpp"

#include <algorithm>
#include <sstream>

namespace pmp {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t seq_hash(const Sequent& s) {
  std::size_t h = 0x51ed;
  for (const auto& f : s) h = mix(h, f.hash());
  return h;
}

std::size_t tag_hash(const Tag& t) {
  std::size_t h = mix(seq_hash(t.root), address_hash(t.pos));
  h = mix(h, seq_hash(t.scope));
  for (const auto& st : t.scope_tags) h = mix(h, tag_hash(st));
  return h;
}

std::size_t term_hash(const Term& t) {
  std::size_t h = static_cast<std::size_t>(t.base) * 977 + t.succ;
  h = mix(h, t.index);
  return mix(h, std::hash<std::string>{}(t.name));
}

std::size_t setvar_hash(const SetVar& v) {
  return mix(std::hash<std::string>{}(v.name), v.level ? *v.level + 1 : 0);
}

template <class T>
int cmp3(const T& a, const T& b) {
  auto r = a <=> b;
  return r < 0 ? -1 : (r > 0 ? 1 : 0);
}

int rule_cmp(const RuleNode* a, const RuleNode* b);

int rule_ptr_cmp(const std::shared_ptr<const RuleNode>& a,
                 const std::shared_ptr<const RuleNode>& b) {
  if (a == b) return 0;
  if (!a) return -1;
  if (!b) return 1;
  return rule_cmp(a.get(), b.get());
}

int index_cmp(const PremiseIndex& a, const PremiseIndex& b) {
  if (int c = cmp3(static_cast<int>(a.label), static_cast<int>(b.label))) return c;
  if (int c = cmp3(a.n, b.n)) return c;
  if (int c = rule_ptr_cmp(a.branch, b.branch)) return c;
  return rule_ptr_cmp(a.parent, b.parent);
}

int address_cmp(const Address& a, const Address& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (int c = index_cmp(a[i], b[i])) return c;
  return cmp3(a.size(), b.size());
}

int tag_cmp(const Tag& a, const Tag& b);

int tags_cmp(const std::vector<Tag>& a, const std::vector<Tag>& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (int c = tag_cmp(a[i], b[i])) return c;
  return cmp3(a.size(), b.size());
}

int tag_cmp(const Tag& a, const Tag& b) {
  if (int c = cmp3(a.root, b.root)) return c;
  if (int c = address_cmp(a.pos, b.pos)) return c;
  if (int c = cmp3(a.scope, b.scope)) return c;
  return tags_cmp(a.scope_tags, b.scope_tags);
}

int rule_cmp(const RuleNode* a, const RuleNode* b) {
  if (a == b) return 0;
  if (int c = cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind))) return c;
  if (int c = cmp3(a->f, b->f)) return c;
  if (int c = cmp3(a->t, b->t)) return c;
  if (int c = cmp3(a->y, b->y)) return c;
  if (int c = cmp3(a->Y, b->Y)) return c;
  if (int c = cmp3(a->Z, b->Z)) return c;
  if (int c = cmp3(a->psi.body, b->psi.body)) return c;
  if (int c = cmp3(a->theory, b->theory)) return c;
  return tag_cmp(a->tag, b->tag);
}

std::strong_ordering to_order(int c) {
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

Rule finish(RuleNode n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 104729;
  h = mix(h, n.f.hash());
  h = mix(h, term_hash(n.t));
  h = mix(h, std::hash<std::string>{}(n.y));
  h = mix(h, setvar_hash(n.Y));
  h = mix(h, setvar_hash(n.Z));
  h = mix(h, n.psi.body.hash());
  if (n.kind == RuleKind::Read) {
    h = mix(h, static_cast<std::size_t>(n.theory.kind));
    h = mix(mix(mix(h, n.theory.N), n.theory.L), mix(mix(n.theory.m, n.theory.l), n.theory.r));
    h = mix(h, tag_hash(n.tag));
  }
  n.hash = h;
  return Rule(std::make_shared<const RuleNode>(std::move(n)));
}

void subtract(ExtSequent& s, const Sequent& formulas, const std::vector<Tag>& tags) {
  for (const auto& f : formulas) s.formulas.erase(f);
  if (!tags.empty()) {
    std::vector<Tag> kept;
    for (const auto& t : s.tags)
      if (!std::binary_search(tags.begin(), tags.end(), t)) kept.push_back(t);
    s.tags = std::move(kept);
  }
}

bool no_unleveled_free(const Formula& f) {
  auto fv = free_vars(f);
  if (!fv.first.empty()) return false;
  for (const auto& v : fv.second)
    if (!v.level) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------- indices

Rule PremiseIndex::parent_rule() const { return Rule(parent); }
Rule PremiseIndex::branch_rule() const { return Rule(branch); }

std::strong_ordering PremiseIndex::operator<=>(const PremiseIndex& o) const {
  return to_order(index_cmp(*this, o));
}
bool PremiseIndex::operator==(const PremiseIndex& o) const { return index_cmp(*this, o) == 0; }

std::string PremiseIndex::str() const {
  switch (label) {
    case Label::Top: return "T";
    case Label::Bot: return "B";
    case Label::L: return "L";
    case Label::R: return "R";
    case Label::Nat: return std::to_string(n);
    case Label::Branch: return "[" + Rule(branch).name() + "]";
  }
  return "?";
}

std::string address_str(const Address& a) {
  if (a.empty()) return ".";
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += '.';
    s += a[i].str();
  }
  return s;
}

std::size_t address_hash(const Address& a) {
  std::size_t h = 0xadd2;
  for (const auto& i : a) {
    h = mix(h, static_cast<std::size_t>(i.label) * 31 + i.n);
    if (i.branch) h = mix(h, i.branch->hash);
    if (i.parent) h = mix(h, i.parent->hash);
  }
  return h;
}

bool is_prefix(const Address& p, const Address& a) {
  if (p.size() > a.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!(p[i] == a[i])) return false;
  return true;
}

// ---------------------------------------------------------------- tags

std::strong_ordering Tag::operator<=>(const Tag& o) const { return to_order(tag_cmp(*this, o)); }
bool Tag::operator==(const Tag& o) const { return tag_cmp(*this, o) == 0; }

bool Tag::scope_within(const Tag& wider) const {
  if (!std::includes(wider.scope.begin(), wider.scope.end(), scope.begin(), scope.end()))
    return false;
  return std::includes(wider.scope_tags.begin(), wider.scope_tags.end(), scope_tags.begin(),
                       scope_tags.end());
}

std::string sequent_str(const Sequent& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& f : s) {
    if (!first) out += ", ";
    first = false;
    out += f.str();
  }
  return out + "}";
}

std::vector<Formula> sequent_list(const Sequent& s) { return {s.begin(), s.end()}; }

std::string Tag::str() const {
  std::string out = "(tag " + sequent_str(root) + " @" + address_str(pos) + " " + sequent_str(scope);
  for (const auto& t : scope_tags) out += " +" + t.str();
  return out + ")";
}

void sort_tags(std::vector<Tag>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool TagFamily::contains_position(const Address& pos) const {
  if (pos.size() != base.size() + 1) return false;
  for (std::size_t i = 0; i < base.size(); ++i)
    if (!(pos[i] == base[i])) return false;
  const PremiseIndex& last = pos.back();
  if (rule_ptr_cmp(last.parent, parent) != 0) return false;
  return is_premise(Rule(parent), last);
}

bool TagFamily::operator==(const TagFamily& o) const {
  return root == o.root && address_cmp(base, o.base) == 0 && rule_ptr_cmp(parent, o.parent) == 0 &&
         scope == o.scope && tags_cmp(scope_tags, o.scope_tags) == 0;
}

std::string TagFamily::str() const {
  return "(tags " + sequent_str(root) + " @" + address_str(base) + ".* [" + Rule(parent).name() +
         "] " + sequent_str(scope) + ")";
}

void ExtSequent::add(const Tag& t) {
  auto it = std::lower_bound(tags.begin(), tags.end(), t);
  if (it == tags.end() || !(*it == t)) tags.insert(it, t);
}

void ExtSequent::merge(const ExtSequent& o) {
  formulas.insert(o.formulas.begin(), o.formulas.end());
  for (const auto& t : o.tags) add(t);
  for (const auto& f : o.families) {
    bool have = false;
    for (const auto& g : families) have |= (g == f);
    if (!have) families.push_back(f);
  }
}

bool ExtSequent::removes(const Tag& t) const {
  for (const auto& p : tags)
    if (p.root == t.root && address_cmp(p.pos, t.pos) == 0 && p.scope_within(t)) return true;
  for (const auto& fam : families) {
    if (!(fam.root == t.root) || !fam.contains_position(t.pos)) continue;
    Tag probe{fam.root, t.pos, fam.scope, fam.scope_tags};
    if (probe.scope_within(t)) return true;
  }
  return false;
}

bool ExtSequent::contains_tag(const Tag& t) const {
  return std::binary_search(tags.begin(), tags.end(), t);
}

bool ExtSequent::covers(const Tag& t) const {
  if (contains_tag(t)) return true;
  for (const auto& fam : families)
    if (fam.root == t.root && fam.scope == t.scope && tags_cmp(fam.scope_tags, t.scope_tags) == 0 &&
        fam.contains_position(t.pos))
      return true;
  return false;
}

bool ExtSequent::operator==(const ExtSequent& o) const {
  if (formulas != o.formulas || tags_cmp(tags, o.tags) != 0) return false;
  if (families.size() != o.families.size()) return false;
  for (std::size_t i = 0; i < families.size(); ++i)
    if (!(families[i] == o.families[i])) return false;
  return true;
}

std::string ExtSequent::str() const {
  std::string out = sequent_str(formulas);
  if (!tags.empty() || !families.empty()) {
    out += " ;";
    for (const auto& t : tags) out += " " + t.str();
    for (const auto& f : families) out += " " + f.str();
  }
  return out;
}

ExtSequent remove_tag(const ExtSequent& s, const Tag& t) {
  ExtSequent out = s;
  out.tags.clear();
  for (const auto& u : s.tags) {
    bool drop = u.root == t.root && address_cmp(u.pos, t.pos) == 0 && t.scope_within(u);
    if (!drop) out.tags.push_back(u);
  }
  return out;
}

// ---------------------------------------------------------------- theories

std::string TheoryId::str() const {
  auto n = [](std::uint32_t v) { return std::to_string(v); };
  switch (kind) {
    case Kind::PA2: return "(pa2)";
    case Kind::PA2CutFree: return "(pa2-cut-free)";
    case Kind::Base: return "(base- " + n(N) + " " + n(L) + ")";
    case Kind::BaseM: return "(basem- " + n(N) + " " + n(L) + " " + n(m) + " " + n(l) + ")";
    case Kind::Full: return "(full " + n(N) + " " + n(L) + " " + n(m) + " " + n(l) + ")";
    case Kind::WithCuts:
      return "(cuts " + n(N) + " " + n(L) + " " + n(m) + " " + n(l) + " " + n(r) + ")";
    case Kind::Infinitary: return "(inf " + n(N) + " " + n(L) + " " + n(r) + ")";
    case Kind::NoRead: return "(noread " + n(N) + " " + n(L) + " " + n(r) + ")";
    case Kind::CutTheory: return "(c " + n(m) + " " + n(l) + ")";
    case Kind::ReadTheory: return "(r " + n(N) + " " + n(L) + " " + n(m) + " " + n(l) + ")";
    case Kind::Universal: return "(any)";
  }
  return "?";
}

// ---------------------------------------------------------------- rules

std::strong_ordering Rule::operator<=>(const Rule& o) const {
  return to_order(rule_ptr_cmp(node_, o.node_));
}

bool Rule::operator==(const Rule& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_ || node_->hash != o.node_->hash) return false;
  return rule_cmp(node_.get(), o.node_.get()) == 0;
}

PremiseIndex Rule::idx(Label l) const { return PremiseIndex{l, 0, nullptr, node_}; }
PremiseIndex Rule::nat(std::uint32_t n) const { return PremiseIndex{Label::Nat, n, nullptr, node_}; }
PremiseIndex Rule::branch(const Rule& r) const {
  return PremiseIndex{Label::Branch, 0, r.ptr(), node_};
}

Rule Rule::true_lit(const Formula& eta) {
  RuleNode n;
  n.kind = RuleKind::True;
  n.f = eta;
  return finish(std::move(n));
}

Rule Rule::ax(const Formula& eta) {
  RuleNode n;
  n.kind = RuleKind::Ax;
  n.f = eta.positive() ? eta : negate(eta);
  return finish(std::move(n));
}

Rule Rule::iand(const Formula& c) {
  RuleNode n;
  n.kind = RuleKind::IAnd;
  n.f = c;
  return finish(std::move(n));
}

Rule Rule::ior(const Formula& d, bool left) {
  RuleNode n;
  n.kind = left ? RuleKind::IOrL : RuleKind::IOrR;
  n.f = d;
  return finish(std::move(n));
}

Rule Rule::iforall1(const Formula& all, const std::string& y) {
  RuleNode n;
  n.kind = RuleKind::IForall1;
  n.f = all;
  n.y = y;
  return finish(std::move(n));
}

Rule Rule::iexists1(const Formula& ex, const Term& t) {
  RuleNode n;
  n.kind = RuleKind::IExists1;
  n.f = ex;
  n.t = t;
  return finish(std::move(n));
}

Rule Rule::iforall2(const Formula& all2, const SetVar& y) {
  RuleNode n;
  n.kind = RuleKind::IForall2;
  n.f = all2;
  n.Y = y;
  return finish(std::move(n));
}

Rule Rule::iexists2(const Formula& ex2, const SetAbstract& psi) {
  RuleNode n;
  n.kind = RuleKind::IExists2Fin;
  n.f = ex2;
  n.psi = psi;
  return finish(std::move(n));
}

Rule Rule::ind(const Formula& body, const Term& t) {
  RuleNode n;
  n.kind = RuleKind::Ind;
  n.f = body;
  n.t = t;
  return finish(std::move(n));
}

Rule Rule::cut(const Formula& f) {
  RuleNode n;
  n.kind = RuleKind::Cut;
  n.f = f;
  return finish(std::move(n));
}

Rule Rule::rep() {
  static const Rule r = [] {
    RuleNode n;
    n.kind = RuleKind::Rep;
    return finish(std::move(n));
  }();
  return r;
}

Rule Rule::omega(const Formula& all) {
  RuleNode n;
  n.kind = RuleKind::Omega;
  n.f = all;
  return finish(std::move(n));
}

Rule Rule::omega_flat(const SetVar& y, const Formula& ex2) {
  RuleNode n;
  n.kind = RuleKind::OmegaFlat;
  n.f = ex2;
  n.Y = y;
  return finish(std::move(n));
}

Rule Rule::cut_omega_flat(const SetVar& z, const SetVar& y, const Formula& ex2) {
  RuleNode n;
  n.kind = RuleKind::CutOmegaFlat;
  n.f = ex2;
  n.Y = y;
  n.Z = z;
  return finish(std::move(n));
}

Rule Rule::read(const TheoryId& theory, const Tag& tag) {
  RuleNode n;
  n.kind = RuleKind::Read;
  n.theory = theory;
  n.tag = tag;
  return finish(std::move(n));
}

std::string Rule::name() const {
  const RuleNode& n = *node_;
  switch (n.kind) {
    case RuleKind::True: return "True " + n.f.str();
    case RuleKind::Ax: return "Ax " + n.f.str();
    case RuleKind::IAnd: return "IAnd " + n.f.str();
    case RuleKind::IOrL: return "IOrL " + n.f.str();
    case RuleKind::IOrR: return "IOrR " + n.f.str();
    case RuleKind::IForall1: return "IForall1 " + n.y + " " + n.f.str();
    case RuleKind::IExists1: return "IExists1 " + term_str(n.t, 0) + " " + n.f.str();
    case RuleKind::IForall2: return "IForall2 " + n.Y.str() + " " + n.f.str();
    case RuleKind::IExists2Fin: return "IExists2 " + n.psi.body.str() + " " + n.f.str();
    case RuleKind::Ind: return "Ind " + term_str(n.t, 0) + " " + n.f.str();
    case RuleKind::Cut: return "Cut " + n.f.str();
    case RuleKind::Rep: return "Rep";
    case RuleKind::Omega: return "Omega " + n.f.str();
    case RuleKind::OmegaFlat: return "OmegaFlat " + n.Y.str() + " " + n.f.str();
    case RuleKind::CutOmegaFlat:
      return "CutOmegaFlat " + n.Z.str() + " " + n.Y.str() + " " + n.f.str();
    case RuleKind::Read:
      return "Read " + n.theory.str() + " " + sequent_str(n.tag.root) + " @" +
             address_str(n.tag.pos);
  }
  return "?";
}

std::string Rule::str() const {
  if (!node_) return "<none>";
  if (node_->kind == RuleKind::Read) return "Read " + node_->theory.str() + " " + node_->tag.str();
  return name();
}

// ---------------------------------------------------------------- sequents

PremiseSpec rule_premises(const Rule& r) {
  PremiseSpec s;
  switch (r.kind()) {
    case RuleKind::True:
    case RuleKind::Ax:
    case RuleKind::Ind:
      break;
    case RuleKind::IAnd:
      s.list = {r.idx(Label::L), r.idx(Label::R)};
      break;
    case RuleKind::IOrL:
    case RuleKind::IOrR:
    case RuleKind::IForall1:
    case RuleKind::IExists1:
    case RuleKind::IForall2:
    case RuleKind::IExists2Fin:
    case RuleKind::Rep:
      s.list = {r.idx(Label::Top)};
      break;
    case RuleKind::Cut:
    case RuleKind::CutOmegaFlat:
      s.list = {r.idx(Label::Top), r.idx(Label::Bot)};
      break;
    case RuleKind::OmegaFlat:
      s.list = {r.idx(Label::Bot)};
      break;
    case RuleKind::Omega:
      s.kind = PremiseSpec::Kind::Naturals;
      break;
    case RuleKind::Read:
      s.kind = PremiseSpec::Kind::Rules;
      s.theory = r.node().theory;
      break;
  }
  return s;
}

bool is_premise(const Rule& r, const PremiseIndex& i) {
  if (!i.parent || !(Rule(i.parent) == r)) return false;
  PremiseSpec s = rule_premises(r);
  switch (s.kind) {
    case PremiseSpec::Kind::Finite:
      for (const auto& p : s.list)
        if (p.label == i.label) return true;
      return false;
    case PremiseSpec::Kind::Naturals:
      return i.label == Label::Nat;
    case PremiseSpec::Kind::Rules:
      return i.label == Label::Branch && i.branch && theory_contains(s.theory, Rule(i.branch));
  }
  return false;
}

std::optional<std::string> rule_malformed(const Rule& r) {
  const RuleNode& n = r.node();
  auto need = [&](bool ok, const char* what) -> std::optional<std::string> {
    if (ok) return std::nullopt;
    return std::string(what) + ": " + r.name();
  };
  switch (n.kind) {
    case RuleKind::True: {
      if (n.f.kind() != Kind::Prim) return need(false, "True needs a primitive literal");
      for (const auto& a : n.f.args())
        if (!a.closed()) return need(false, "True needs a closed literal");
      if (!find_relation(n.f.rel())) return need(false, "unknown relation");
      return need(eval_literal(n.f), "True on a false literal");
    }
    case RuleKind::Ax:
      return need(n.f.is_literal(), "Ax needs a literal");
    case RuleKind::IAnd:
      return need(n.f.kind() == Kind::And, "IAnd needs a conjunction");
    case RuleKind::IOrL:
    case RuleKind::IOrR:
      return need(n.f.kind() == Kind::Or, "IOr needs a disjunction");
    case RuleKind::IForall1:
      if (n.f.kind() != Kind::All1) return need(false, "IForall1 needs a universal");
      return need(!n.y.empty() && !occurs_free(n.f, n.y), "IForall1 eigenvariable free in conclusion");
    case RuleKind::Omega:
      return need(n.f.kind() == Kind::All1, "Omega needs a universal");
    case RuleKind::IExists1:
      return need(n.f.kind() == Kind::Ex1, "IExists1 needs an existential");
    case RuleKind::IForall2:
      if (n.f.kind() != Kind::All2) return need(false, "IForall2 needs a second-order universal");
      return need(!occurs_free(n.f, n.Y), "IForall2 eigenvariable free in conclusion");
    case RuleKind::IExists2Fin:
      return need(n.f.kind() == Kind::Ex2, "IExists2 needs a second-order existential");
    case RuleKind::OmegaFlat:
    case RuleKind::CutOmegaFlat:
      return need(n.f.kind() == Kind::Ex2, "Omega-flat rules need a second-order existential");
    case RuleKind::Read:
      return need(std::includes(n.tag.scope.begin(), n.tag.scope.end(), n.tag.root.begin(),
                                n.tag.root.end()),
                  "Read root must lie in its scope");
    case RuleKind::Ind:
    case RuleKind::Cut:
    case RuleKind::Rep:
      return std::nullopt;
  }
  return std::nullopt;
}

ExtSequent conclusion(const Rule& r) {
  const RuleNode& n = r.node();
  ExtSequent s;
  switch (n.kind) {
    case RuleKind::True:
    case RuleKind::IAnd:
    case RuleKind::IOrL:
    case RuleKind::IOrR:
    case RuleKind::IForall1:
    case RuleKind::IExists1:
    case RuleKind::IForall2:
    case RuleKind::IExists2Fin:
    case RuleKind::Omega:
    case RuleKind::OmegaFlat:
      s.add(n.f);
      break;
    case RuleKind::Ax:
      s.add(n.f);
      s.add(negate(n.f));
      break;
    case RuleKind::Ind: {
      Formula at0 = instantiate1(n.f, Term::numeral(0));
      Formula step = Formula::ex1(
          Formula::conj(n.f, negate(instantiate1(n.f, Term::bound(0).successor()))));
      // n.f has hole index 0; under the new binder, the hole is that binder.
      s.add(negate(at0));
      s.add(step);
      s.add(instantiate1(n.f, n.t));
      break;
    }
    case RuleKind::Cut:
    case RuleKind::CutOmegaFlat:
    case RuleKind::Rep:
      break;
    case RuleKind::Read: {
      s = delta_of_position(n.tag.pos);
      subtract(s, n.tag.scope, n.tag.scope_tags);
      s.add(n.tag);
      break;
    }
  }
  return s;
}

namespace {
Tag omega_flat_tag(const RuleNode& n) {
  Formula body = negate(instantiate2(n.f.body(), n.Y));
  return Tag{{body}, {}, {body}, {}};
}
}  // namespace

ExtSequent premise_sequent(const Rule& r, const PremiseIndex& i) {
  const RuleNode& n = r.node();
  ExtSequent s;
  switch (n.kind) {
    case RuleKind::IAnd:
      s.add(i.label == Label::L ? n.f.lhs() : n.f.rhs());
      break;
    case RuleKind::IOrL:
      s.add(n.f.lhs());
      break;
    case RuleKind::IOrR:
      s.add(n.f.rhs());
      break;
    case RuleKind::IForall1:
      s.add(instantiate1(n.f.body(), Term::var(n.y)));
      break;
    case RuleKind::IExists1:
      s.add(instantiate1(n.f.body(), n.t));
      break;
    case RuleKind::IForall2:
      s.add(instantiate2(n.f.body(), n.Y));
      break;
    case RuleKind::IExists2Fin:
      s.add(instantiate2(n.f.body(), n.psi));
      break;
    case RuleKind::Cut:
      s.add(i.label == Label::Top ? n.f : negate(n.f));
      break;
    case RuleKind::Omega:
      s.add(instantiate1(n.f.body(), Term::numeral(i.n)));
      break;
    case RuleKind::OmegaFlat:
      s.add(omega_flat_tag(n));
      break;
    case RuleKind::CutOmegaFlat:
      if (i.label == Label::Top)
        s.add(negate(instantiate2(n.f.body(), n.Z)));
      else
        s.add(omega_flat_tag(n));
      break;
    case RuleKind::Read: {
      Rule branch(i.branch);
      s = conclusion(branch);
      subtract(s, n.tag.scope, n.tag.scope_tags);
      s.families.push_back(
          TagFamily{n.tag.root, n.tag.pos, branch.ptr(), n.tag.scope, n.tag.scope_tags});
      break;
    }
    case RuleKind::True:
    case RuleKind::Ax:
    case RuleKind::Ind:
    case RuleKind::Rep:
      break;
  }
  return s;
}

FreeVars eigenvariables(const Rule& r, const PremiseIndex& i) {
  const RuleNode& n = r.node();
  FreeVars e;
  switch (n.kind) {
    case RuleKind::IForall1:
      e.first.insert(n.y);
      break;
    case RuleKind::IForall2:
      e.second.insert(n.Y);
      break;
    case RuleKind::CutOmegaFlat:
      if (i.label == Label::Top) e.second.insert(n.Z);
      break;
    default:
      break;
  }
  return e;
}

ExtSequent delta_of_position(const Address& pos) {
  if (pos.empty()) return {};
  const PremiseIndex& last = pos.back();
  return premise_sequent(last.parent_rule(), last);
}

// ---------------------------------------------------------------- membership

namespace {

bool descriptor_closed(const RuleNode& n) {
  if (n.f.valid() && !no_unleveled_free(n.f)) return false;
  if (n.kind == RuleKind::IExists1 && !n.t.closed()) return false;
  return true;
}

bool in_base(std::uint32_t N, std::uint32_t L, const Rule& r) {
  const RuleNode& n = r.node();
  if (rule_malformed(r)) return false;
  switch (n.kind) {
    case RuleKind::Rep:
      return true;
    case RuleKind::True:
    case RuleKind::Ax:
    case RuleKind::IAnd:
    case RuleKind::IOrL:
    case RuleKind::IOrR:
    case RuleKind::Omega:
    case RuleKind::IExists1:
      return descriptor_closed(n);
    case RuleKind::IForall2:
      return descriptor_closed(n) && n.Y.level && *n.Y.level == comp(n.f).level;
    case RuleKind::OmegaFlat: {
      if (!descriptor_closed(n) || !n.Y.level) return false;
      Complexity c = comp(n.f);
      return *n.Y.level == c.level && c.depth <= N && c.level <= L;
    }
    default:
      return false;
  }
}

bool in_cut_theory(std::uint32_t m, std::uint32_t l, const Rule& r) {
  const RuleNode& n = r.node();
  if (n.kind != RuleKind::CutOmegaFlat || rule_malformed(r) || !descriptor_closed(n)) return false;
  Complexity c = comp(n.f);
  return c == Complexity{m, l} && n.Y.level == Level(l) && n.Z.level == Level(l);
}

}  // namespace

std::optional<Complexity> read_complexity(const Rule& r) {
  if (!r.is_read()) return std::nullopt;
  const TheoryId& t = r.node().theory;
  if (t.kind != TheoryId::Kind::BaseM) return std::nullopt;
  return Complexity{t.m, t.l};
}

std::optional<Complexity> omega_complexity(const Rule& r) {
  if (r.kind() != RuleKind::OmegaFlat && r.kind() != RuleKind::CutOmegaFlat) return std::nullopt;
  return comp(r.node().f);
}

namespace {

bool read_root_matches(const Rule& r, std::uint32_t m, std::uint32_t l) {
  const Tag& t = r.tag();
  if (t.root.size() != 1) return false;
  const Formula& rho = *t.root.begin();
  if (!closed_first_order(rho)) return false;
  for (const auto& v : free_vars(rho).second) {
    if (v.level != Level(l)) continue;
    if (comp_abstracting(rho, v) == Complexity{m, l}) return true;
  }
  return false;
}

bool in_read_theory(std::uint32_t N, std::uint32_t L, std::uint32_t m, std::uint32_t l,
                    const Rule& r) {
  if (!r.is_read() || rule_malformed(r)) return false;
  if (!(r.node().theory == TheoryId::base_m(N, L, m, l))) return false;
  return read_root_matches(r, m, l);
}

bool in_base_m(std::uint32_t N, std::uint32_t L, std::uint32_t m, std::uint32_t l, const Rule& r) {
  if (in_base(N, L, r)) return true;
  if (r.kind() == RuleKind::CutOmegaFlat) {
    Complexity c = comp(r.node().f);
    return c < Complexity{m, l} && c.depth <= N && c.level <= L && in_cut_theory(c.depth, c.level, r);
  }
  if (auto c = read_complexity(r)) {
    return c->depth < m && c->level <= L && in_read_theory(N, L, c->depth, c->level, r);
  }
  return false;
}

bool in_full(std::uint32_t N, std::uint32_t L, std::uint32_t m, std::uint32_t l, const Rule& r) {
  if (in_base_m(N, L, m, l, r)) return true;
  if (auto c = read_complexity(r))
    return c->depth <= N && c->level < l && in_read_theory(N, L, c->depth, c->level, r);
  return false;
}

bool cut_ok(std::uint32_t rr, const Rule& r) {
  return r.kind() == RuleKind::Cut && no_unleveled_free(r.node().f) && rank(r.node().f) < rr;
}

bool in_infinitary(std::uint32_t N, std::uint32_t L, std::uint32_t rr, const Rule& r, bool reads) {
  if (in_base(N, L, r)) return true;
  if (cut_ok(rr, r)) return true;
  if (r.kind() == RuleKind::CutOmegaFlat) {
    Complexity c = comp(r.node().f);
    return c.depth <= N && c.level <= L && in_cut_theory(c.depth, c.level, r);
  }
  if (!reads) return false;
  if (auto c = read_complexity(r))
    return c->depth <= N && c->level <= L && in_read_theory(N, L, c->depth, c->level, r);
  return false;
}

bool in_pa2(const Rule& r, bool cuts) {
  if (rule_malformed(r)) return false;
  switch (r.kind()) {
    case RuleKind::True:
    case RuleKind::Ax:
    case RuleKind::IAnd:
    case RuleKind::IOrL:
    case RuleKind::IOrR:
    case RuleKind::IForall1:
    case RuleKind::IExists1:
    case RuleKind::IForall2:
    case RuleKind::IExists2Fin:
    case RuleKind::Ind:
      return true;
    case RuleKind::Cut:
      return cuts;
    default:
      return false;
  }
}

}  // namespace

bool theory_contains(const TheoryId& t, const Rule& r) {
  switch (t.kind) {
    case TheoryId::Kind::PA2: return in_pa2(r, true);
    case TheoryId::Kind::PA2CutFree: return in_pa2(r, false);
    case TheoryId::Kind::Base: return in_base(t.N, t.L, r);
    case TheoryId::Kind::BaseM: return in_base_m(t.N, t.L, t.m, t.l, r);
    case TheoryId::Kind::Full: return in_full(t.N, t.L, t.m, t.l, r);
    case TheoryId::Kind::WithCuts: return in_full(t.N, t.L, t.m, t.l, r) || cut_ok(t.r, r);
    case TheoryId::Kind::Infinitary: return in_infinitary(t.N, t.L, t.r, r, true);
    case TheoryId::Kind::NoRead: return in_infinitary(t.N, t.L, t.r, r, false);
    case TheoryId::Kind::CutTheory: return in_cut_theory(t.m, t.l, r);
    case TheoryId::Kind::ReadTheory: return in_read_theory(t.N, t.L, t.m, t.l, r);
    case TheoryId::Kind::Universal: return !rule_malformed(r);
  }
  return false;
}

ExtSequent gamma_back(const Address& sigma) {
  ExtSequent g;
  for (const auto& i : sigma) {
    if (!i.parent) throw std::invalid_argument("premise index without a rule");
    Rule r = i.parent_rule();
    if (!is_premise(r, i)) throw std::invalid_argument("not a premise of its rule: " + i.str());
    ExtSequent c = conclusion(r);
    for (const auto& f : c.formulas) g.formulas.erase(f);
    for (const auto& t : c.tags) g = remove_tag(g, t);
    g.merge(premise_sequent(r, i));
  }
  return g;
}

Tag map_tag(const Tag& t, const std::function<Formula(const Formula&)>& fm,
            const std::function<SetVar(const SetVar&)>& vm) {
  Tag out;
  for (const auto& f : t.root) out.root.insert(fm(f));
  for (const auto& f : t.scope) out.scope.insert(fm(f));
  out.pos = t.pos;
  for (const auto& s : t.scope_tags) out.scope_tags.push_back(map_tag(s, fm, vm));
  sort_tags(out.scope_tags);
  return out;
}

Rule map_rule(const Rule& r, const std::function<Formula(const Formula&)>& fm,
              const std::function<SetVar(const SetVar&)>& vm) {
  RuleNode n = r.node();
  if (n.f.valid()) n.f = fm(n.f);
  if (n.psi.body.valid()) n.psi.body = fm(n.psi.body);
  if (n.kind == RuleKind::IForall2 || n.kind == RuleKind::OmegaFlat ||
      n.kind == RuleKind::CutOmegaFlat)
    n.Y = vm(n.Y);
  if (n.kind == RuleKind::CutOmegaFlat) n.Z = vm(n.Z);
  if (n.kind == RuleKind::Read) n.tag = map_tag(n.tag, fm, vm);
  if (n.kind == RuleKind::Ax && n.f.valid() && !n.f.positive()) n.f = negate(n.f);
  return finish(std::move(n));
}

}  // namespace pmp
