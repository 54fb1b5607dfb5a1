#include "pmp/localfn.hpp"

#include <algorithm>

namespace pmp {

NodePtr input_at(const NodePtr& root, const Address& pos) {
  NodePtr n = root;
  for (const auto& i : pos) n = n->child(i);
  return n;
}

Rule widen_read(const Rule& read, const Sequent& s, const std::vector<Tag>& st) {
  Tag t = read.tag();
  t.scope.insert(s.begin(), s.end());
  t.scope_tags.insert(t.scope_tags.end(), st.begin(), st.end());
  sort_tags(t.scope_tags);
  return Rule::read(read.node().theory, t);
}

// ---------------------------------------------------------------- apply

namespace {

struct ApplyCtx {
  std::vector<Sequent> roots;
  std::vector<NodePtr> inputs;
  ApplyLimits lim;

  std::optional<std::size_t> root_of(const Rule& r) const {
    if (!r.is_read()) return std::nullopt;
    for (std::size_t i = 0; i < roots.size(); ++i)
      if (roots[i] == r.tag().root) return i;
    return std::nullopt;
  }
};

NodePtr apply_at(std::shared_ptr<const ApplyCtx> ctx, NodePtr f, std::optional<Sequent> prev);

// f is resolved: its rule is not a Read on an input root.
Step emit(const std::shared_ptr<const ApplyCtx>& ctx, const NodePtr& f) {
  Rule r = f->rule();
  std::optional<Sequent> mine;
  if (r.is_read()) mine = r.tag().root;
  return {r, [ctx, f, mine](const PremiseIndex& i) { return apply_at(ctx, f->child(i), mine); }};
}

NodePtr apply_at(std::shared_ptr<const ApplyCtx> ctx, NodePtr f, std::optional<Sequent> prev) {
  return lazy_node([ctx, f, prev]() -> Step {
    NodePtr cur = f;
    std::optional<std::size_t> last;
    for (std::size_t steps = 0;; ++steps) {
      Rule r = cur->rule();
      auto idx = ctx->root_of(r);
      if (!idx) break;
      if (last && *last == *idx)
        throw AddressError("consecutive Reads on root " + sequent_str(ctx->roots[*idx]));
      if (steps >= ctx->lim.read_cap) throw AddressError("read cap exceeded during evaluation");
      NodePtr in = input_at(ctx->inputs[*idx], r.tag().pos);
      cur = cur->child(r.branch(in->rule()));
      last = idx;
    }
    const Rule& r = cur->rule();
    if (prev && r.is_read() && r.tag().root == *prev) {
      NodePtr inner = lazy_node([ctx, cur] { return emit(ctx, cur); });
      return {Rule::rep(), [inner](const PremiseIndex&) { return inner; }};
    }
    return emit(ctx, cur);
  });
}

}  // namespace

NodePtr apply_node(const NodePtr& body, const std::vector<Sequent>& roots,
                   const std::vector<NodePtr>& inputs, ApplyLimits lim) {
  if (roots.size() != inputs.size()) throw std::invalid_argument("one input per root required");
  auto ctx = std::make_shared<ApplyCtx>(ApplyCtx{roots, inputs, lim});
  return apply_at(ctx, body, std::nullopt);
}

ExtSequent apply_declared(const LocalFunction& f, const std::vector<ExtSequent>& inputs) {
  ExtSequent out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ExtSequent in = inputs[i];
    for (const auto& x : f.roots[i]) in.formulas.erase(x);
    out.merge(in);
  }
  ExtSequent own = f.body.declared();
  for (std::size_t i = 0; i < f.roots.size(); ++i) own = remove_tag(own, f.root_tag(i));
  out.merge(own);
  return out;
}

ProofTree apply(const LocalFunction& f, const std::vector<ProofTree>& inputs, ApplyLimits lim) {
  if (inputs.size() != f.roots.size())
    throw std::invalid_argument("function has " + std::to_string(f.roots.size()) +
                                " roots, given " + std::to_string(inputs.size()) + " inputs");
  std::vector<NodePtr> nodes;
  std::vector<ExtSequent> decls;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const TheoryId& want = f.domains[i];
    if (want.kind != TheoryId::Kind::Universal && !(want == inputs[i].theory()))
      throw std::invalid_argument("input " + std::to_string(i) + " is in " +
                                  inputs[i].theory().str() + ", function reads " + want.str());
    nodes.push_back(inputs[i].root());
    decls.push_back(inputs[i].declared());
  }
  return ProofTree(f.codomain, apply_declared(f, decls), apply_node(f.body.root(), f.roots, nodes, lim));
}

// ---------------------------------------------------------------- lift

namespace {

// Positions read so far, as function-side position -> input-side position.
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

struct LiftCtx {
  std::vector<Sequent> roots;
  TheoryId plus;
  std::optional<std::size_t> root_of(const Rule& r) const {
    if (!r.is_read()) return std::nullopt;
    for (std::size_t i = 0; i < roots.size(); ++i)
      if (roots[i] == r.tag().root) return i;
    return std::nullopt;
  }
};

NodePtr lift_at(std::shared_ptr<const LiftCtx> ctx, NodePtr f, std::vector<PiMap> pis) {
  return lazy_node([ctx, f, pis]() -> Step {
    Rule r = f->rule();
    auto idx = ctx->root_of(r);
    if (!idx)
      return {r, [ctx, f, pis](const PremiseIndex& i) { return lift_at(ctx, f->child(i), pis); }};
    const Tag& t = r.tag();
    Address real = pi_lookup(pis[*idx], t.pos);
    Rule out = Rule::read(ctx->plus, Tag{t.root, real, t.scope, t.scope_tags});
    std::size_t k = *idx;
    return {out, [ctx, f, pis, r, real, k](const PremiseIndex& i) -> NodePtr {
              Rule br = i.branch_rule();
              const Tag& t = r.tag();
              if (theory_contains(r.node().theory, br)) {
                auto next = pis;
                next[k] = pi_set(pis[k], t.pos, real, true);
                return lift_at(ctx, f->child(r.branch(br)), std::move(next));
              }
              Rule shown = br.is_read() ? widen_read(br, t.scope, t.scope_tags) : br;
              return fixed_node(shown, [ctx, f, pis, br, real, k, t](const PremiseIndex& j) {
                PremiseIndex in = br.is_read() ? br.branch(j.branch_rule()) : j;
                Address adv = real;
                adv.push_back(in);
                auto next = pis;
                next[k] = pi_set(pis[k], t.pos, adv, false);
                return lift_at(ctx, f, std::move(next));
              });
            }};
  });
}

}  // namespace

NodePtr lift_node(const NodePtr& body, const std::vector<Sequent>& roots, const TheoryId& plus) {
  auto ctx = std::make_shared<LiftCtx>(LiftCtx{roots, plus});
  std::vector<PiMap> pis(roots.size(), PiMap{{Address{}, Address{}}});
  return lift_at(ctx, body, std::move(pis));
}

LocalFunction lift(const LocalFunction& f, const TheoryId& plus) {
  LocalFunction out = f;
  out.domains.assign(f.roots.size(), plus);
  out.body = ProofTree(f.body.theory(), f.body.declared(), lift_node(f.body.root(), f.roots, plus));
  return out;
}

Verdict check_conservative(const TheoryId& plus, const TheoryId& base, const Sequent& scope,
                           const std::vector<Tag>& scope_tags, const std::vector<Rule>& probes) {
  Verdict v;
  for (const auto& p : probes) {
    if (!theory_contains(plus, p) || theory_contains(base, p)) continue;
    ExtSequent c = conclusion(p);
    if (p.is_read()) {
      for (const auto& t : c.tags)
        if (std::binary_search(scope_tags.begin(), scope_tags.end(), t))
          v.fail("Read " + p.name() + " concludes scoped tag " + t.str(), {});
    } else {
      for (const auto& f : c.formulas)
        if (scope.count(f)) v.fail(p.name() + " introduces scoped " + f.str(), {});
    }
  }
  return v;
}

}  // namespace pmp
