#include "pmp/cutelim.hpp"

namespace pmp {

namespace {

using Branch = std::function<NodePtr(const Rule&)>;

Address extend(Address a, const PremiseIndex& i) {
  a.push_back(i);
  return a;
}

// A Read on `root` at `pos` whose child at branch R is on(R).
NodePtr read_at(const TheoryId& over, const Sequent& root, const Address& pos, Branch on) {
  Rule read = Rule::read(over, Tag{root, pos, root, {}});
  return fixed_node(read, [on = std::move(on)](const PremiseIndex& i) { return on(i.branch_rule()); });
}

// R itself, each premise i continuing with next(i).
NodePtr copy_rule(const Rule& r, ChildFn next) { return fixed_node(r, std::move(next)); }

NodePtr rep_then(NodePtr n) {
  return fixed_node(Rule::rep(), [n](const PremiseIndex&) { return n; });
}

Tag root_tag(const Sequent& root) { return Tag{root, {}, root, {}}; }

LocalFunction make_fn(std::vector<Sequent> roots, const TheoryId& over, ExtSequent decl, NodePtr body) {
  for (const auto& r : roots) decl.add(root_tag(r));
  std::vector<TheoryId> doms(roots.size(), over);
  return LocalFunction{std::move(roots), std::move(doms), over, ProofTree(over, decl, std::move(body))};
}

// A read loop on one root: special(R, pos) returns a node when R is handled,
// otherwise R is copied and reading continues at pos.i.
struct Loop : std::enable_shared_from_this<Loop> {
  TheoryId over;
  Sequent root;
  // Returns a node when R is handled at pos; `self` continues the loop.
  std::function<std::optional<NodePtr>(const Loop& self, const Rule&, const Address&)> special;

  NodePtr at(const Address& pos) const {
    auto self = shared_from_this();
    return read_at(over, root, pos, [self, pos](const Rule& r) -> NodePtr {
      if (auto n = self->special(*self, r, pos)) return *n;
      return copy_rule(r, [self, pos](const PremiseIndex& i) { return self->at(extend(pos, i)); });
    });
  }
};

NodePtr identity_copy(const TheoryId& over, const Sequent& root) {
  auto loop = std::make_shared<Loop>();
  loop->over = over;
  loop->root = root;
  loop->special = [](const Loop&, const Rule&, const Address&) { return std::nullopt; };
  return loop->at({});
}

}  // namespace

LocalFunction inverse_false_literal(const Formula& eta, const TheoryId& over) {
  if (!eta.is_literal() || eta.kind() != Kind::Prim)
    throw std::invalid_argument("Inverse: needs a primitive literal");
  for (const auto& a : eta.args())
    if (!a.closed()) throw std::invalid_argument("Inverse: literal must be closed");
  if (eval_literal(eta)) throw std::invalid_argument("Inverse: literal must be false: " + eta.str());
  auto loop = std::make_shared<Loop>();
  loop->over = over;
  loop->root = {eta};
  Rule ax = Rule::ax(eta);
  Formula dual = negate(eta);
  loop->special = [ax, dual](const Loop&, const Rule& r, const Address&) -> std::optional<NodePtr> {
    if (r == ax) return leaf(Rule::true_lit(dual));
    return std::nullopt;
  };
  return make_fn({{eta}}, over, {}, loop->at({}));
}

LocalFunction inverse_conj(const Formula& l, const Formula& r, bool right, const TheoryId& over) {
  Formula conj = Formula::conj(l, r);
  auto loop = std::make_shared<Loop>();
  loop->over = over;
  loop->root = {conj};
  Rule target = Rule::iand(conj);
  loop->special = [target, right](const Loop& self, const Rule& rule,
                                  const Address& pos) -> std::optional<NodePtr> {
    if (!(rule == target)) return std::nullopt;
    return rep_then(self.at(extend(pos, rule.idx(right ? Label::R : Label::L))));
  };
  ExtSequent decl;
  decl.add(right ? r : l);
  return make_fn({{conj}}, over, decl, loop->at({}));
}

LocalFunction inverse_forall(const Formula& all, std::uint32_t n, const TheoryId& over) {
  if (all.kind() != Kind::All1) throw std::invalid_argument("Inverse: needs a universal");
  auto loop = std::make_shared<Loop>();
  loop->over = over;
  loop->root = {all};
  Rule target = Rule::omega(all);
  loop->special = [target, n](const Loop& self, const Rule& rule,
                              const Address& pos) -> std::optional<NodePtr> {
    if (!(rule == target)) return std::nullopt;
    return rep_then(self.at(extend(pos, rule.nat(n))));
  };
  ExtSequent decl;
  decl.add(instantiate1(all.body(), Term::numeral(n)));
  return make_fn({{all}}, over, decl, loop->at({}));
}


LocalFunction elim_disj(const Formula& p0, const Formula& p1, const TheoryId& over) {
  Formula disj = Formula::disj(p0, p1);
  Formula dual = negate(disj);
  auto loop = std::make_shared<Loop>();
  loop->over = over;
  loop->root = {disj};
  Rule left = Rule::ior(disj, true), right = Rule::ior(disj, false);
  loop->special = [left, right, p0, p1, over](const Loop& self, const Rule& r,
                                               const Address& pos) -> std::optional<NodePtr> {
    if (!(r == left) && !(r == right)) return std::nullopt;
    bool b = r == right;
    Rule cut = Rule::cut(b ? p1 : p0);
    NodePtr top = self.at(extend(pos, r.idx(Label::Top)));
    NodePtr bot = inverse_conj(negate(p0), negate(p1), b, over).body.root();
    return finite_node(cut, {{cut.idx(Label::Top), top}, {cut.idx(Label::Bot), bot}});
  };
  return make_fn({{disj}, {dual}}, over, {}, loop->at({}));
}

LocalFunction elim_exists(const Formula& ex, const TheoryId& over) {
  if (ex.kind() != Kind::Ex1) throw std::invalid_argument("Elim: needs an existential");
  Formula dual = negate(ex);
  auto loop = std::make_shared<Loop>();
  loop->over = over;
  loop->root = {ex};
  loop->special = [ex, dual, over](const Loop& self, const Rule& r,
                                   const Address& pos) -> std::optional<NodePtr> {
    if (r.kind() != RuleKind::IExists1 || !(r.node().f == ex) || !r.node().t.closed()) return std::nullopt;
    const Term& t = r.node().t;
    Rule cut = Rule::cut(instantiate1(ex.body(), t));
    NodePtr top = self.at(extend(pos, r.idx(Label::Top)));
    NodePtr bot = inverse_forall(dual, t.value(), over).body.root();
    return finite_node(cut, {{cut.idx(Label::Top), top}, {cut.idx(Label::Bot), bot}});
  };
  return make_fn({{ex}, {dual}}, over, {}, loop->at({}));
}

LocalFunction elim_set_literal(const SetVar& x, const Term& t, const TheoryId& over) {
  Formula pos_lit = Formula::setlit(SetRef{false, 0, x}, true, t);
  Formula neg_lit = negate(pos_lit);
  auto loop = std::make_shared<Loop>();
  loop->over = over;
  loop->root = {pos_lit};
  Rule ax = Rule::ax(pos_lit);
  loop->special = [ax, neg_lit, over](const Loop&, const Rule& r, const Address&) -> std::optional<NodePtr> {
    if (!(r == ax)) return std::nullopt;
    return identity_copy(over, {neg_lit});
  };
  return make_fn({{pos_lit}, {neg_lit}}, over, {}, loop->at({}));
}

namespace {

// Reading the universal side at a, the existential side parked at e.
struct Q2Elim : std::enable_shared_from_this<Q2Elim> {
  TheoryId over;
  Formula all2, ex2;

  NodePtr forall_side(const Address& a, const Address& e) const {
    auto self = shared_from_this();
    return read_at(over, {all2}, a, [self, a, e](const Rule& r) -> NodePtr {
      if (r.kind() == RuleKind::IForall2 && r.node().f == self->all2)
        return self->exists_side(extend(a, r.idx(Label::Top)), e, r.node().Y);
      return copy_rule(r, [self, a, e](const PremiseIndex& i) { return self->forall_side(extend(a, i), e); });
    });
  }

  // a: the premise of the universal side's IForall2 with eigenvariable z.
  NodePtr exists_side(const Address& a, const Address& e, const SetVar& z) const {
    auto self = shared_from_this();
    return read_at(over, {ex2}, e, [self, a, e, z](const Rule& r) -> NodePtr {
      if (r.kind() == RuleKind::OmegaFlat && r.node().f == self->ex2) {
        Rule cut = Rule::cut_omega_flat(z, r.node().Y, self->ex2);
        NodePtr top = self->forall_side(a, e);
        NodePtr bot = self->exists_side(a, extend(e, r.idx(Label::Bot)), z);
        return finite_node(cut, {{cut.idx(Label::Top), top}, {cut.idx(Label::Bot), bot}});
      }
      return copy_rule(r, [self, a, e, z](const PremiseIndex& i) {
        return self->exists_side(a, extend(e, i), z);
      });
    });
  }
};

}  // namespace

LocalFunction elim_second_order(const Formula& all2, const TheoryId& over) {
  if (all2.kind() != Kind::All2) throw std::invalid_argument("Elim: needs a second-order universal");
  auto q = std::make_shared<Q2Elim>();
  q->over = over;
  q->all2 = all2;
  q->ex2 = negate(all2);
  return make_fn({{all2}, {q->ex2}}, over, {}, q->forall_side({}, {}));
}

CutDispatch dispatch_cut(const Formula& f, const TheoryId& over) {
  Formula nf = negate(f);
  LocalFunction op;
  switch (f.kind()) {
    case Kind::Prim:
      op = eval_literal(f) ? inverse_false_literal(nf, over) : inverse_false_literal(f, over);
      break;
    case Kind::SetLit: {
      Formula p = f.positive() ? f : nf;
      op = elim_set_literal(p.setref().var, p.setarg(), over);
      break;
    }
    case Kind::And: op = elim_disj(nf.lhs(), nf.rhs(), over); break;
    case Kind::Or: op = elim_disj(f.lhs(), f.rhs(), over); break;
    case Kind::All1: op = elim_exists(nf, over); break;
    case Kind::Ex1: op = elim_exists(f, over); break;
    case Kind::All2: op = elim_second_order(f, over); break;
    case Kind::Ex2: op = elim_second_order(nf, over); break;
  }
  CutDispatch out{op, {}};
  for (const auto& root : op.roots) {
    if (root == Sequent{f}) out.sides.push_back(Label::Top);
    else if (root == Sequent{nf}) out.sides.push_back(Label::Bot);
    else throw std::logic_error("cut dispatch: root matches neither premise");
  }
  return out;
}

namespace {

struct ReduceFn : std::enable_shared_from_this<ReduceFn> {
  std::uint32_t r, N, L;
  TheoryId over, ops;

  NodePtr at(const Address& pos) const {
    auto self = shared_from_this();
    return read_at(over, {}, pos, [self, pos](const Rule& rule) -> NodePtr {
      if (rule.kind() == RuleKind::Cut && rank(rule.node().f) == self->r)
        return rep_then(self->combine(pos, rule));
      return copy_rule(rule, [self, pos](const PremiseIndex& i) { return self->at(extend(pos, i)); });
    });
  }

  // The matching operator, lifted, evaluated on the two cursors.
  NodePtr combine(const Address& pos, const Rule& cut) const {
    CutDispatch d = dispatch_cut(cut.node().f, ops);
    std::vector<NodePtr> inputs;
    for (Label side : d.sides) inputs.push_back(at(extend(pos, cut.idx(side))));
    NodePtr lifted = lift_node(d.op.body.root(), d.op.roots, TheoryId::universal());
    return apply_node(lifted, d.op.roots, inputs);
  }
};

}  // namespace

namespace {

std::shared_ptr<ReduceFn> reduce_fn(std::uint32_t r, std::uint32_t N, std::uint32_t L) {
  auto fn = std::make_shared<ReduceFn>();
  fn->r = r;
  fn->N = N;
  fn->L = L;
  fn->over = TheoryId::no_read(N, L, r + 1);
  fn->ops = TheoryId::no_read(N, L, r);
  return fn;
}

}  // namespace

NodePtr reduce_read(std::uint32_t r, std::uint32_t N, std::uint32_t L, const Address& pos) {
  return reduce_fn(r, N, L)->at(pos);
}

LocalFunction reduce(std::uint32_t r, std::uint32_t N, std::uint32_t L) {
  auto fn = reduce_fn(r, N, L);
  TheoryId cod = TheoryId::no_read(N, L, r);
  LocalFunction out = make_fn({{}}, fn->over, {}, fn->at({}));
  out.codomain = cod;
  return out;
}

ProofTree eliminate_all_cuts(const ProofTree& d, std::optional<std::uint32_t> r) {
  const TheoryId& t = d.theory();
  std::uint32_t rr = r ? *r : t.r;
  ProofTree cur = d;
  for (std::uint32_t i = rr; i-- > 0;) {
    LocalFunction f = lift(reduce(i, t.N, t.L), cur.theory());
    f.codomain = TheoryId::infinitary(t.N, t.L, i);
    cur = apply(f, {cur});
  }
  return cur;
}

}  // namespace pmp
