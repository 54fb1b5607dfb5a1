#include "pmp/library.hpp"

#include <algorithm>
#include <functional>

namespace pmp {

// ---------------------------------------------------------------- deductions

namespace {

Sequent check_rec(const Deduction& d, const TheoryId& theory, const Address& at, Verdict& v) {
  const Rule& r = d.rule;
  if (!r.valid()) {
    v.fail("missing rule", at);
    return {};
  }
  if (auto m = rule_malformed(r)) v.fail(*m, at);
  if (!theory_contains(theory, r)) v.fail("not in " + theory.str() + ": " + r.name(), at);
  PremiseSpec spec = rule_premises(r);
  if (spec.kind != PremiseSpec::Kind::Finite) {
    v.fail("finite deductions need finitely many premises: " + r.name(), at);
    return conclusion(r).formulas;
  }
  if (spec.list.size() != d.premises.size()) {
    v.fail(r.name() + " needs " + std::to_string(spec.list.size()) + " premises, has " +
               std::to_string(d.premises.size()),
           at);
    return conclusion(r).formulas;
  }
  Sequent g = conclusion(r).formulas;
  for (std::size_t i = 0; i < spec.list.size(); ++i) {
    const PremiseIndex& idx = spec.list[i];
    Address below = at;
    below.push_back(idx);
    Sequent child = check_rec(d.premises[i], theory, below, v);
    for (const auto& f : premise_sequent(r, idx).formulas) child.erase(f);
    FreeVars e = eigenvariables(r, idx);
    for (const auto& f : child) {
      for (const auto& y : e.first)
        if (occurs_free(f, y)) v.fail("eigenvariable " + y + " free in side formula " + f.str(), at);
      for (const auto& y : e.second)
        if (occurs_free(f, y))
          v.fail("eigenvariable " + y.str() + " free in side formula " + f.str(), at);
    }
    g.insert(child.begin(), child.end());
  }
  return g;
}

NodePtr tree_rec(const Deduction& d) {
  std::vector<std::pair<PremiseIndex, NodePtr>> kids;
  PremiseSpec spec = rule_premises(d.rule);
  for (std::size_t i = 0; i < spec.list.size() && i < d.premises.size(); ++i)
    kids.emplace_back(spec.list[i], tree_rec(d.premises[i]));
  return finite_node(d.rule, std::move(kids));
}

}  // namespace

DeductionReport check_deduction(const Deduction& d, const TheoryId& theory) {
  DeductionReport rep;
  rep.conclusion = check_rec(d, theory, {}, rep.verdict);
  return rep;
}

Sequent deduction_conclusion(const Deduction& d) {
  Verdict v;
  return check_rec(d, TheoryId::universal(), {}, v);
}

ProofTree deduction_tree(const Deduction& d, const TheoryId& theory) {
  ExtSequent decl;
  decl.formulas = deduction_conclusion(d);
  return ProofTree(theory, decl, tree_rec(d));
}

std::size_t deduction_height(const Deduction& d) {
  std::size_t h = 0;
  for (const auto& p : d.premises) h = std::max(h, deduction_height(p));
  return h + 1;
}

Term subst_term(const Term& t, const NumMap& nums) {
  if (t.base != Term::Base::Free) return t;
  auto it = nums.find(t.name);
  if (it == nums.end()) return t;
  return Term::numeral(it->second + t.succ);
}

// ---------------------------------------------------------------- Id

namespace {

struct IdCtx {
  TheoryId over;
  Sequent root;
};

NodePtr id_read(std::shared_ptr<const IdCtx> ctx, Address pos) {
  Rule read = Rule::read(ctx->over, Tag{ctx->root, pos, ctx->root, {}});
  return fixed_node(read, [ctx, pos](const PremiseIndex& i) {
    Rule r = i.branch_rule();
    return fixed_node(r, [ctx, pos](const PremiseIndex& j) {
      Address next = pos;
      next.push_back(j);
      return id_read(ctx, std::move(next));
    });
  });
}

Complexity abstracted(const Formula& phi, const std::optional<SetVar>& y) {
  return y ? comp_abstracting(phi, *y) : Complexity{};
}

}  // namespace

LocalFunction identity_fn_over(const Formula& phi, const TheoryId& over) {
  auto ctx = std::make_shared<IdCtx>(IdCtx{over, {phi}});
  ExtSequent decl;
  decl.add(phi);
  decl.add(Tag{{phi}, {}, {phi}, {}});
  return LocalFunction{{{phi}}, {over}, over, ProofTree(over, decl, id_read(ctx, {}))};
}

LocalFunction identity_fn(const Formula& phi, std::uint32_t N, std::uint32_t L,
                          std::optional<SetVar> y) {
  Complexity c = abstracted(phi, y);
  if (c.depth > N || c.level > L)
    throw std::invalid_argument("Id: complexity " + c.str() + " exceeds (" + std::to_string(N) +
                                "," + std::to_string(L) + ")");
  LocalFunction f = identity_fn_over(phi, TheoryId::base_m(N, L, c.depth, c.level));
  f.codomain = TheoryId::full(N, L, c.depth, c.level);
  return f;
}

// ---------------------------------------------------------------- d_phi

namespace {

SetVar fresh_setvar(const Formula& phi, const std::string& stem, std::uint32_t level) {
  auto taken = free_vars(phi).second;
  for (std::uint32_t k = 0;; ++k) {
    SetVar v{stem + std::to_string(k), level};
    bool clash = false;
    for (const auto& t : taken) clash = clash || t.name == v.name;
    if (!clash) return v;
  }
}

}  // namespace

NodePtr excluded_middle_node(const Formula& phi, std::uint32_t N, std::uint32_t L) {
  if (!closed_first_order(phi)) throw SyntaxError("excluded middle needs a closed formula: " + phi.str());
  switch (phi.kind()) {
    case Kind::Prim:
    case Kind::SetLit:
      return leaf(Rule::ax(phi));
    case Kind::Or:
    case Kind::Ex1:
    case Kind::Ex2:
      return excluded_middle_node(negate(phi), N, L);
    case Kind::And: {
      Rule r = Rule::iand(phi);
      Formula dual = negate(phi);
      Rule left = Rule::ior(dual, true);
      Rule right = Rule::ior(dual, false);
      NodePtr l = finite_node(left, {{left.idx(Label::Top), excluded_middle_node(phi.lhs(), N, L)}});
      NodePtr rr = finite_node(right, {{right.idx(Label::Top), excluded_middle_node(phi.rhs(), N, L)}});
      return finite_node(r, {{r.idx(Label::L), l}, {r.idx(Label::R), rr}});
    }
    case Kind::All1: {
      Formula dual = negate(phi);
      Formula body = phi.body();
      return fixed_node(Rule::omega(phi), [dual, body, N, L](const PremiseIndex& i) {
        Term n = Term::numeral(i.n);
        Rule ex = Rule::iexists1(dual, n);
        return finite_node(ex, {{ex.idx(Label::Top), excluded_middle_node(instantiate1(body, n), N, L)}});
      });
    }
    case Kind::All2: {
      Complexity c = comp(phi);
      SetVar y = fresh_setvar(phi, "_d", c.level);
      Formula inst = instantiate2(phi.body(), y);
      Rule all = Rule::iforall2(phi, y);
      Rule flat = Rule::omega_flat(y, negate(phi));
      LocalFunction id = identity_fn_over(inst, TheoryId::base_m(N, L, c.depth, c.level));
      NodePtr omega = finite_node(flat, {{flat.idx(Label::Bot), id.body.root()}});
      return finite_node(all, {{all.idx(Label::Top), omega}});
    }
  }
  throw SyntaxError("unreachable formula kind");
}

ProofTree excluded_middle(const Formula& phi, std::uint32_t N, std::uint32_t L) {
  ExtSequent decl;
  decl.add(phi);
  decl.add(negate(phi));
  return ProofTree(TheoryId::infinitary(N, L, 0), decl, excluded_middle_node(phi, N, L));
}

// ---------------------------------------------------------------- F^{phi, X -> psi}

namespace {

// Where Reads of an input tag land in the output. An exact entry maps the
// position in_base itself; a family entry maps in_base.i for premises i of
// in_parent onto out_base.i' for the same-labelled premise of out_parent.
struct Replacement {
  Sequent in_root;
  Address in_base;
  std::shared_ptr<const RuleNode> in_parent;
  Sequent out_root;
  Address out_base;
  std::shared_ptr<const RuleNode> out_parent;
  TheoryId out_theory;
  Sequent out_scope;
};

struct SubstCtx {
  Sequent root;
  SetVar x;
  SetAbstract psi;
  std::uint32_t N, L;
  TheoryId reads;
};

using Renames = std::vector<std::pair<SetVar, SetVar>>;

struct SubstState {
  Address pos;
  ExtSequent theta;
  Renames ren;
  std::vector<Replacement> store;
  std::uint32_t fuel = 16;  // fallback budget of the retargeted-Read clause
};

struct Mapper {
  const SubstCtx* ctx;
  const Renames* ren;
  Formula operator()(const Formula& f) const {
    Formula g = f;
    for (const auto& [a, b] : *ren) g = rename_set(g, a, b);
    return subst_set(g, ctx->x, ctx->psi);
  }
  SetVar var(const SetVar& v) const {
    for (const auto& [a, b] : *ren)
      if (a == v) return b;
    return v;
  }
  Rule rule(const Rule& r) const {
    return map_rule(
        r, [this](const Formula& f) { return (*this)(f); }, [this](const SetVar& v) { return var(v); });
  }
};

NodePtr subst_at(std::shared_ptr<const SubstCtx> ctx, SubstState s);

bool is_x_literal(const SubstCtx& ctx, const Formula& f) {
  return f.kind() == Kind::SetLit && !f.setref().bound && f.setref().var == ctx.x;
}

std::optional<std::pair<Address, const Replacement*>> lookup(const std::vector<Replacement>& store,
                                                             const Tag& t) {
  for (auto it = store.rbegin(); it != store.rend(); ++it) {
    if (it->in_root != t.root) continue;
    if (!it->in_parent) {
      if (it->in_base == t.pos) return std::make_pair(it->out_base, &*it);
      continue;
    }
    if (t.pos.size() != it->in_base.size() + 1 || !is_prefix(it->in_base, t.pos)) continue;
    const PremiseIndex& last = t.pos.back();
    if (!(Rule(last.parent) == Rule(it->in_parent))) continue;
    if (last.label == Label::Branch) continue;
    Address out = it->out_base;
    out.push_back(PremiseIndex{last.label, last.n, nullptr, it->out_parent});
    return std::make_pair(out, &*it);
  }
  return std::nullopt;
}

PremiseIndex same_label(const PremiseIndex& j, const Rule& parent) {
  return PremiseIndex{j.label, j.n, j.branch, parent.ptr()};
}

Sequent back_pool(const Rule& read, const ExtSequent& theta) {
  Sequent pool = theta.formulas;
  const Tag& t = read.tag();
  pool.insert(t.root.begin(), t.root.end());
  pool.insert(t.scope.begin(), t.scope.end());
  for (const auto& f : delta_of_position(t.pos).formulas) pool.insert(f);
  std::vector<Formula> work(pool.begin(), pool.end());
  while (!work.empty()) {
    Formula f = work.back();
    work.pop_back();
    if (f.kind() == Kind::And || f.kind() == Kind::Or) {
      for (const auto& g : {f.lhs(), f.rhs()})
        if (pool.insert(g).second) work.push_back(g);
    }
  }
  return pool;
}

// A rule R of the input Read's theory whose substituted conclusion is that
// of `out`, with the same kind (so premises correspond label by label).
std::optional<Rule> back_translate(const Rule& out, const Rule& read, const ExtSequent& theta,
                                   const Mapper& m) {
  const TheoryId& t = read.node().theory;
  auto matches = [&](const Rule& cand) {
    if (cand.kind() != out.kind() || !theory_contains(t, cand)) return false;
    Sequent mapped;
    for (const auto& f : conclusion(cand).formulas) mapped.insert(m(f));
    return mapped == conclusion(out).formulas;
  };
  // When out meets the substituted scope its preimage comes from the tracked
  // formulas, even if out also maps to itself.
  Sequent lam;
  for (const auto& f : read.tag().scope) lam.insert(m(f));
  const auto& outs = conclusion(out).formulas;
  bool meets = std::any_of(outs.begin(), outs.end(), [&](const Formula& f) { return lam.count(f) > 0; });
  if (!meets || out.is_read() || out.kind() == RuleKind::Rep || out.kind() == RuleKind::CutOmegaFlat)
    return matches(out) ? std::optional<Rule>(out) : std::nullopt;
  const RuleNode& n = out.node();
  for (const auto& theta_f : back_pool(read, theta)) {
    if (!(m(theta_f) == n.f) && !(out.kind() == RuleKind::Ax && m(theta_f) == negate(n.f))) continue;
    Rule cand;
    switch (out.kind()) {
      case RuleKind::True: cand = Rule::true_lit(theta_f); break;
      case RuleKind::Ax: cand = Rule::ax(theta_f); break;
      case RuleKind::IAnd: cand = Rule::iand(theta_f); break;
      case RuleKind::IOrL: cand = Rule::ior(theta_f, true); break;
      case RuleKind::IOrR: cand = Rule::ior(theta_f, false); break;
      case RuleKind::Omega: cand = Rule::omega(theta_f); break;
      case RuleKind::IExists1: cand = Rule::iexists1(theta_f, n.t); break;
      case RuleKind::IForall2:
        if (theta_f.kind() != Kind::All2) continue;
        cand = Rule::iforall2(theta_f, SetVar{n.Y.name, comp(theta_f).level});
        break;
      case RuleKind::OmegaFlat:
        if (theta_f.kind() != Kind::Ex2) continue;
        cand = Rule::omega_flat(SetVar{n.Y.name, comp(theta_f).level}, theta_f);
        break;
      default: continue;
    }
    if (matches(cand)) return cand;
  }
  if (matches(out)) return out;
  return std::nullopt;
}

SubstState advance(const SubstState& s, const Rule& r, const PremiseIndex& in, bool widen) {
  SubstState next = s;
  next.pos.push_back(in);
  if (widen) next.theta.merge(premise_sequent(r, in));
  return next;
}

Step subst_branch(const std::shared_ptr<const SubstCtx>& ctx, const SubstState& s, const Rule& r);

NodePtr subst_at(std::shared_ptr<const SubstCtx> ctx, SubstState s) {
  Tag own{ctx->root, s.pos, s.theta.formulas, s.theta.tags};
  Rule read = Rule::read(ctx->reads, own);
  return fixed_node(read, [ctx, s](const PremiseIndex& i) {
    Rule r = i.branch_rule();
    return lazy_node([ctx, s, r] { return subst_branch(ctx, s, r); });
  });
}

// The output below an input position whose rule is r.
Step subst_branch(const std::shared_ptr<const SubstCtx>& ctx, const SubstState& s, const Rule& r) {
  Mapper m{ctx.get(), &s.ren};
  // X^l n, ~X^l n is replaced by d_{psi(n)}.
  if (r.kind() == RuleKind::Ax && is_x_literal(*ctx, r.node().f)) {
    NodePtr d = excluded_middle_node(ctx->psi.at(r.node().f.setarg()), ctx->N, ctx->L);
    return {d->rule(), [d](const PremiseIndex& i) { return d->child(i); }};
  }
  if (r.is_read()) {
    const Tag& t = r.tag();
    if (s.theta.removes(t)) {
      if (auto hit = lookup(s.store, t)) {
        const Replacement& e = *hit->second;
        Sequent scope = e.out_scope;
        for (const auto& f : t.scope) scope.insert(m(f));
        scope.insert(e.out_root.begin(), e.out_root.end());
        Rule out = Rule::read(e.out_theory, Tag{e.out_root, hit->first, scope, {}});
        Replacement base = e;
        base.out_base = hit->first;
        base.in_base = t.pos;
        return {out, [ctx, s, r, base](const PremiseIndex& i) -> NodePtr {
                  Rule rp = i.branch_rule();
                  Mapper mm{ctx.get(), &s.ren};
                  if (auto back = back_translate(rp, r, s.theta, mm)) {
                    PremiseIndex in = r.branch(*back);
                    SubstState next = advance(s, r, in, true);
                    Replacement fam = base;
                    fam.in_parent = back->ptr();
                    fam.out_parent = rp.ptr();
                    next.store.push_back(fam);
                    return subst_at(ctx, std::move(next));
                  }
                  if (s.fuel == 0) throw AddressError("substitution: retargeted Read fallback exhausted");
                  SubstState next = advance(s, r, r.branch(Rule::rep()), true);
                  --next.fuel;
                  return subst_at(ctx, std::move(next));
                }};
      }
    }
    Rule out = widen_read(r, s.theta.formulas, s.theta.tags);
    return {out, [ctx, s, r](const PremiseIndex& i) {
              PremiseIndex in = r.branch(i.branch_rule());
              return subst_at(ctx, advance(s, r, in, true));
            }};
  }
  ExtSequent c = conclusion(r);
  bool touches = std::any_of(c.formulas.begin(), c.formulas.end(),
                             [&](const Formula& f) { return s.theta.formulas.count(f) > 0; });
  if (!touches) {
    return {r, [ctx, s, r](const PremiseIndex& i) { return subst_at(ctx, advance(s, r, i, false)); }};
  }
  Rule out;
  Renames ren = s.ren;
  std::optional<Replacement> fresh;
  const RuleNode& n = r.node();
  if (r.kind() == RuleKind::IForall2 || r.kind() == RuleKind::OmegaFlat) {
    Formula f = m(n.f);
    SetVar y{n.Y.name, comp(f).level};
    if (!(y == n.Y)) ren.emplace_back(n.Y, y);
    if (r.kind() == RuleKind::IForall2) {
      out = Rule::iforall2(f, y);
    } else {
      out = Rule::omega_flat(y, f);
      Complexity cc = comp(f);
      Formula in_root = negate(instantiate2(n.f.body(), n.Y));
      Formula out_root = negate(instantiate2(f.body(), y));
      fresh = Replacement{{in_root}, {}, nullptr, {out_root}, {}, nullptr,
                          TheoryId::base_m(ctx->N, ctx->L, cc.depth, cc.level), {out_root}};
    }
  } else {
    out = m.rule(r);
  }
  return {out, [ctx, s, r, ren, fresh](const PremiseIndex& j) {
            PremiseIndex in = same_label(j, r);
            SubstState next = advance(s, r, in, true);
            next.ren = ren;
            if (fresh) next.store.push_back(*fresh);
            return subst_at(ctx, std::move(next));
          }};
}

}  // namespace

LocalFunction substitution_fn(const Formula& phi, const SetVar& x, const SetAbstract& psi,
                              std::uint32_t N, std::uint32_t L) {
  if (!x.level) throw std::invalid_argument("substitution needs a leveled variable");
  Complexity c = comp_abstracting(phi, x);
  if (c.depth > N || c.level > L)
    throw std::invalid_argument("substitution: complexity " + c.str() + " exceeds bounds");
  for (const auto& v : free_vars(psi.body).second)
    if (v.name == x.name) throw std::invalid_argument("substitution: " + x.str() + " occurs in psi");
  auto ctx = std::make_shared<SubstCtx>(SubstCtx{{phi}, x, psi, N, L, TheoryId::base_m(N, L, c.depth, c.level)});
  SubstState s;
  s.theta.add(phi);
  ExtSequent decl;
  decl.add(subst_set(phi, x, psi));
  decl.add(Tag{{phi}, {}, {phi}, {}});
  TheoryId cod = TheoryId::full(N, L, c.depth, c.level);
  return LocalFunction{{{phi}}, {ctx->reads}, cod, ProofTree(cod, decl, subst_at(ctx, std::move(s)))};
}

// ---------------------------------------------------------------- embedding

namespace {

struct Env {
  NumMap nums;
  std::map<std::string, SetVar> sets;  // unleveled name -> leveled variable

  Formula apply(const Formula& f) const {
    Formula g = f;
    for (const auto& [name, v] : sets) g = rename_set(g, SetVar{name, std::nullopt}, v);
    for (const auto& [name, n] : nums) g = subst_num(g, name, Term::numeral(n));
    // Variables free inside the deduction but not in its conclusion are
    // instantiated by 0 and level 0.
    FreeVars fv = free_vars(g);
    for (const auto& x : fv.first) g = subst_num(g, x, Term::numeral(0));
    for (const auto& v : fv.second)
      if (!v.level) g = rename_set(g, v, SetVar{v.name, 0});
    return g;
  }
  SetAbstract apply(const SetAbstract& a) const { return SetAbstract{apply(a.body)}; }
  Term apply(const Term& t) const {
    Term u = subst_term(t, nums);
    return u.base == Term::Base::Free ? Term::numeral(u.succ) : u;
  }
};

// Owns the deduction: lazily built subtrees point into it.
struct EmbedCtx {
  Deduction d;
  EmbedParams p;
  std::map<const Deduction*, std::size_t> ids;
};

std::string fresh_name(const EmbedCtx& c, const Deduction* d) { return "_E" + std::to_string(c.ids.at(d)); }

Formula step_formula(const Formula& body) {
  return Formula::ex1(Formula::conj(body, negate(instantiate1(body, Term::bound(0).successor()))));
}

void note_formula(const Formula& f, EmbedParams& p) {
  std::vector<Formula> subs;
  subformulas(f, subs);
  for (const auto& s : subs) {
    if (!s.is_quant2()) continue;
    Complexity c = comp(s);
    p.N = std::max(p.N, c.depth);
    p.L = std::max(p.L, c.level);
  }
}

void note_cut(const Formula& f, EmbedParams& p) {
  note_formula(f, p);
  p.r = std::max(p.r, rank(f) + 1);
}

// Mirrors the embedding's variable handling to find N, L, r.
void scan(const Deduction& d, const Env& env, EmbedCtx& c) {
  c.ids.emplace(&d, c.ids.size());
  const RuleNode& n = d.rule.node();
  Env next = env;
  if (n.f.valid()) note_formula(env.apply(n.f), c.p);
  switch (n.kind) {
    case RuleKind::Cut:
      note_cut(env.apply(n.f), c.p);
      break;
    case RuleKind::IForall2: {
      Formula f = env.apply(n.f);
      next.sets[n.Y.name] = SetVar{n.Y.name, comp(f).level};
      break;
    }
    case RuleKind::IExists2Fin: {
      Formula f = env.apply(n.f);
      SetAbstract psi = env.apply(n.psi);
      note_formula(psi.body, c.p);
      note_cut(instantiate2(f.body(), psi), c.p);
      break;
    }
    case RuleKind::Ind: {
      Formula b = env.apply(n.f);
      note_formula(step_formula(b), c.p);
      break;
    }
    default:
      break;
  }
  for (const auto& p : d.premises) scan(p, next, c);
}

NodePtr embed_rec(const Deduction& d, Env env, std::shared_ptr<const EmbedCtx> c) {
  const Rule& r = d.rule;
  const RuleNode& n = r.node();
  const EmbedParams& p = c->p;
  switch (n.kind) {
    case RuleKind::True:
      return leaf(Rule::true_lit(env.apply(n.f)));
    case RuleKind::Ax:
      return leaf(Rule::ax(env.apply(n.f)));
    case RuleKind::IAnd:
    case RuleKind::IOrL:
    case RuleKind::IOrR:
    case RuleKind::Cut: {
      Rule out = map_rule(
          r, [&](const Formula& f) { return env.apply(f); }, [](const SetVar& v) { return v; });
      std::vector<std::pair<PremiseIndex, NodePtr>> kids;
      PremiseSpec spec = rule_premises(out);
      for (std::size_t i = 0; i < spec.list.size(); ++i)
        kids.emplace_back(spec.list[i], embed_rec(d.premises[i], env, c));
      return finite_node(out, std::move(kids));
    }
    case RuleKind::IExists1: {
      Rule out = Rule::iexists1(env.apply(n.f), env.apply(n.t));
      return finite_node(out, {{out.idx(Label::Top), embed_rec(d.premises[0], env, c)}});
    }
    case RuleKind::IForall1: {
      const Deduction* prem = &d.premises[0];
      std::string y = n.y;
      return fixed_node(Rule::omega(env.apply(n.f)), [prem, y, env, c](const PremiseIndex& i) {
        Env next = env;
        next.nums[y] = i.n;
        return embed_rec(*prem, next, c);
      });
    }
    case RuleKind::IForall2: {
      Formula f = env.apply(n.f);
      SetVar y{n.Y.name, comp(f).level};
      Env next = env;
      next.sets[n.Y.name] = y;
      Rule out = Rule::iforall2(f, y);
      return finite_node(out, {{out.idx(Label::Top), embed_rec(d.premises[0], next, c)}});
    }
    case RuleKind::IExists2Fin: {
      Formula f = env.apply(n.f);
      SetAbstract psi = env.apply(n.psi);
      Formula cut_f = instantiate2(f.body(), psi);
      Complexity cc = comp(f);
      SetVar x{fresh_name(*c, &d), cc.level};
      Formula root = negate(instantiate2(f.body(), x));
      LocalFunction sub = substitution_fn(root, x, psi, p.N, p.L);
      Rule flat = Rule::omega_flat(x, f);
      NodePtr bot = finite_node(flat, {{flat.idx(Label::Bot), sub.body.root()}});
      Rule cut = Rule::cut(cut_f);
      return finite_node(cut, {{cut.idx(Label::Top), embed_rec(d.premises[0], env, c)},
                               {cut.idx(Label::Bot), bot}});
    }
    case RuleKind::Ind: {
      Formula body = env.apply(n.f);
      std::uint32_t target = env.apply(n.t).value();
      Formula step = step_formula(body);
      std::function<NodePtr(std::uint32_t)> stair = [&](std::uint32_t k) -> NodePtr {
        if (k == 0) return excluded_middle_node(instantiate1(body, Term::numeral(0)), p.N, p.L);
        Term prev = Term::numeral(k - 1);
        Rule ex = Rule::iexists1(step, prev);
        Rule conj = Rule::iand(instantiate1(step.body(), prev));
        NodePtr right = excluded_middle_node(instantiate1(body, Term::numeral(k)), p.N, p.L);
        NodePtr mid = finite_node(conj, {{conj.idx(Label::L), stair(k - 1)}, {conj.idx(Label::R), right}});
        return finite_node(ex, {{ex.idx(Label::Top), mid}});
      };
      return stair(target);
    }
    default:
      throw std::invalid_argument("cannot embed " + r.name());
  }
}

}  // namespace

Embedding embed(const Deduction& d, const NumMap& nums, const LevelMap& levels) {
  DeductionReport rep = check_deduction(d);
  if (!rep.verdict.pass) throw std::invalid_argument("invalid deduction: " + rep.verdict.str());
  Env env;
  env.nums = nums;
  for (const auto& [name, l] : levels) env.sets[name] = SetVar{name, l};
  for (const auto& f : rep.conclusion) {
    FreeVars fv = free_vars(f);
    for (const auto& x : fv.first)
      if (!nums.count(x)) throw std::invalid_argument("free variable " + x + " has no numeral");
    for (const auto& x : fv.second)
      if (!x.level && !levels.count(x.name))
        throw std::invalid_argument("free set variable " + x.name + " has no level");
  }
  auto ctx = std::make_shared<EmbedCtx>();
  ctx->d = d;
  scan(ctx->d, env, *ctx);
  ExtSequent decl;
  for (const auto& f : rep.conclusion) decl.add(env.apply(f));
  NodePtr root = embed_rec(ctx->d, env, ctx);
  const EmbedParams& p = ctx->p;
  return Embedding{ProofTree(TheoryId::infinitary(p.N, p.L, p.r), decl, root), p};
}

}  // namespace pmp
