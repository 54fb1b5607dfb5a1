#include "pmp/collapse.hpp"

#include <map>

namespace pmp {

std::optional<Complexity> predecessor(Complexity c, std::uint32_t N) {
  if (c.depth > 0) return Complexity{c.depth - 1, c.level};
  if (c.level > 0) return Complexity{N, c.level - 1};
  return std::nullopt;
}

Complexity tag_complexity(const Tag& t) {
  Complexity best{0, 0};
  for (const auto& rho : t.root)
    for (const auto& v : free_vars(rho).second) {
      if (!v.level) continue;
      Complexity c = comp_abstracting(rho, v);
      if (best < c) best = c;
    }
  return best;
}

Verdict check_collapse_pre(const ExtSequent& decl, Complexity c) {
  Verdict v;
  for (const auto& f : decl.formulas) {
    std::vector<Formula> subs;
    subformulas(f, subs);
    for (const auto& s : subs)
      if ((s.kind() == Kind::Ex2 || s.kind() == Kind::All2) && !(comp(s) < c))
        v.fail("second-order subformula " + s.str() + " has complexity " + comp(s).str() +
                   ", needs below " + c.str(),
               {});
  }
  for (const auto& t : decl.tags)
    if (!(tag_complexity(t) < c))
      v.fail("tag " + t.str() + " has complexity " + tag_complexity(t).str() + ", needs below " +
                 c.str(),
             {});
  for (const auto& fam : decl.families)
    if (!(tag_complexity(Tag{fam.root, {}, fam.scope, {}}) < c))
      v.fail("tag family " + fam.str() + " is not below " + c.str(), {});
  return v;
}

namespace {

Rule rename_rule(const Rule& r, const SetVar& from, const SetVar& to);

// Tag positions name rules of the tree being read, so they rename with it.
Address rename_address(const Address& a, const SetVar& from, const SetVar& to) {
  Address out = a;
  for (auto& i : out) {
    if (i.parent) i.parent = rename_rule(i.parent_rule(), from, to).ptr();
    if (i.branch) i.branch = rename_rule(i.branch_rule(), from, to).ptr();
  }
  return out;
}

void rename_positions(Tag& t, const SetVar& from, const SetVar& to) {
  t.pos = rename_address(t.pos, from, to);
  for (auto& s : t.scope_tags) rename_positions(s, from, to);
}

Rule rename_rule(const Rule& r, const SetVar& from, const SetVar& to) {
  Rule out = map_rule(
      r, [&](const Formula& f) { return rename_set(f, from, to); },
      [&](const SetVar& v) { return v == from ? to : v; });
  if (!out.is_read()) return out;
  RuleNode n = out.node();
  rename_positions(n.tag, from, to);
  return Rule::read(n.theory, n.tag);
}

// The index of `orig` corresponding to index i of its renamed image.
PremiseIndex unrename_index(const Rule& orig, const PremiseIndex& i, const SetVar& from,
                            const SetVar& to) {
  switch (i.label) {
    case Label::Nat: return orig.nat(i.n);
    case Label::Branch: return orig.branch(rename_rule(i.branch_rule(), to, from));
    default: return orig.idx(i.label);
  }
}

}  // namespace

NodePtr rename_setvar_node(const NodePtr& n, const SetVar& from, const SetVar& to) {
  if (from == to) return n;
  return lazy_node([n, from, to]() -> Step {
    Rule orig = n->rule();
    return {rename_rule(orig, from, to), [n, orig, from, to](const PremiseIndex& i) {
              return rename_setvar_node(n->child(unrename_index(orig, i, from, to)), from, to);
            }};
  });
}

// ---------------------------------------------------------------- collapse

namespace {

// Positions read so far, as tag-side position -> input-side position.
using PiMap = std::vector<std::pair<Address, Address>>;

Address pi_lookup(const PiMap& pi, const Address& p) {
  const std::pair<Address, Address>* best = nullptr;
  for (const auto& e : pi)
    if (is_prefix(e.first, p) && (!best || e.first.size() > best->first.size())) best = &e;
  if (!best) return p;
  Address out = best->second;
  out.insert(out.end(), p.begin() + static_cast<std::ptrdiff_t>(best->first.size()), p.end());
  return out;
}

PiMap pi_set(const PiMap& pi, const Address& p, const Address& real, bool drop_below) {
  PiMap out;
  for (const auto& e : pi) {
    if (e.first == p) continue;
    if (drop_below && is_prefix(p, e.first)) continue;
    out.push_back(e);
  }
  out.emplace_back(p, real);
  return out;
}

// The collapsed left premise of a removed CutOmegaFlat, renamed onto its
// tag root, and the positions consumed from it.
struct Cursor {
  NodePtr input;
  PiMap pi;
};
using TagEnv = std::map<Sequent, Cursor>;

struct CollapseCtx {
  Complexity top;
  CollapseLimits lim;
};
using Ctx = std::shared_ptr<const CollapseCtx>;

NodePtr col(const Ctx& ctx, NodePtr d, TagEnv env, std::optional<Sequent> prev);

// Emits r, with Rep in front when r would read the root just read.
Step guarded(Rule r, ChildFn child, const std::optional<Sequent>& prev) {
  if (prev && r.is_read() && r.tag().root == *prev) {
    NodePtr inner = fixed_node(std::move(r), std::move(child));
    return {Rule::rep(), [inner](const PremiseIndex&) { return inner; }};
  }
  return {std::move(r), std::move(child)};
}

std::optional<Sequent> read_root(const Rule& r) {
  if (r.is_read()) return r.tag().root;
  return std::nullopt;
}

NodePtr col(const Ctx& ctx, NodePtr d, TagEnv env, std::optional<Sequent> prev) {
  return lazy_node([ctx, d, env, prev]() mutable -> Step {
    NodePtr cur = d;
    for (std::size_t steps = 0;; ++steps) {
      Rule r = cur->rule();
      if (r.kind() == RuleKind::CutOmegaFlat && comp(r.node().f) == ctx->top) {
        const RuleNode& n = r.node();
        NodePtr left = rename_setvar_node(col(ctx, cur->child(r.idx(Label::Top)), env, std::nullopt),
                                          n.Z, n.Y);
        Sequent root = premise_sequent(r, r.idx(Label::Bot)).tags.front().root;
        TagEnv next = env;
        next[root] = Cursor{left, {{Address{}, Address{}}}};
        NodePtr right = col(ctx, cur->child(r.idx(Label::Bot)), std::move(next), std::nullopt);
        return {Rule::rep(), [right](const PremiseIndex&) { return right; }};
      }
      auto rc = read_complexity(r);
      auto hit = r.is_read() && rc && *rc == ctx->top ? env.find(r.tag().root) : env.end();
      if (hit == env.end()) {
        return guarded(r, [ctx, cur, env, r](const PremiseIndex& i) {
          return col(ctx, cur->child(i), env, read_root(r));
        }, prev);
      }
      if (steps >= ctx->lim.read_cap)
        throw AddressError("collapse: read cap exceeded at " + r.str());
      const Tag& t = r.tag();
      Address real = pi_lookup(hit->second.pi, t.pos);
      Rule in = input_at(hit->second.input, real)->rule();
      if (theory_contains(r.node().theory, in)) {
        hit->second.pi = pi_set(hit->second.pi, t.pos, real, true);
        cur = cur->child(r.branch(in));
        continue;
      }
      Rule shown = in.is_read() ? widen_read(in, t.scope, t.scope_tags) : in;
      Sequent key = hit->first;
      return guarded(shown, [ctx, cur, env, key, in, real, t, shown](const PremiseIndex& j) {
        PremiseIndex step = in.is_read() ? in.branch(j.branch_rule()) : j;
        Address adv = real;
        adv.push_back(step);
        TagEnv next = env;
        Cursor& c = next.at(key);
        c.pi = pi_set(c.pi, t.pos, adv, false);
        return col(ctx, cur, std::move(next), read_root(shown));
      }, prev);
    }
  });
}

void require(const Verdict& v, const std::string& what) {
  if (v.pass) return;
  std::string msg = what + ":";
  for (const auto& w : v.failures) msg += " " + w.what + ";";
  throw PreconditionError(msg);
}

}  // namespace

NodePtr collapse_node(const NodePtr& d, Complexity c, CollapseLimits lim) {
  auto ctx = std::make_shared<CollapseCtx>(CollapseCtx{c, lim});
  return col(ctx, d, {}, std::nullopt);
}

ProofTree collapse(const ProofTree& d, std::uint32_t m, std::uint32_t l, CollapseLimits lim) {
  Complexity c{m, l};
  require(check_collapse_pre(d.declared(), c), "collapse " + c.str());
  TheoryId out = d.theory();
  if (out.kind == TheoryId::Kind::Full && out.m == m && out.l == l) {
    if (auto p = predecessor(c, out.N)) out = TheoryId::full(out.N, out.L, p->depth, p->level);
    else out = TheoryId::base(out.N, out.L);
  }
  return ProofTree(out, d.declared(), collapse_node(d.root(), c, lim));
}

ProofTree collapse_all(const ProofTree& d, CollapseLimits lim) {
  const TheoryId& t = d.theory();
  if (t.r != 0) throw PreconditionError("collapse_all: input admits cuts of rank below " + std::to_string(t.r));
  require(check_collapse_pre(d.declared(), Complexity{0, 0}), "collapse_all");
  NodePtr cur = d.root();
  for (std::optional<Complexity> c = Complexity{t.N, t.L}; c; c = predecessor(*c, t.N))
    cur = collapse_node(cur, *c, lim);
  return ProofTree(TheoryId::base(t.N, t.L), d.declared(), cur);
}

NodePtr erase_reps_node(const NodePtr& n, std::size_t cap) {
  return lazy_node([n, cap]() -> Step {
    NodePtr cur = n;
    for (std::size_t k = 0; cur->rule().kind() == RuleKind::Rep; ++k) {
      if (k >= cap) throw AddressError("Rep chain longer than " + std::to_string(cap));
      cur = cur->child(cur->rule().idx(Label::Top));
    }
    return {cur->rule(), [cur, cap](const PremiseIndex& i) { return erase_reps_node(cur->child(i), cap); }};
  });
}

ProofTree erase_reps(const ProofTree& d, std::size_t cap) {
  return ProofTree(d.theory(), d.declared(), erase_reps_node(d.root(), cap));
}

}  // namespace pmp
