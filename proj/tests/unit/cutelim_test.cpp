#include <doctest.h>

#include "pmp/cutelim.hpp"
#include "support.hpp"

using namespace pmp;
using pmp::test::F;

namespace {

const TheoryId over = TheoryId::no_read(0, 0, 1);
const Formula eq00 = F("(lit \"=\" 0 0)");
const Formula eq22 = F("(lit \"=\" 2 2)");

ProofTree input(const LocalFunction& f, std::size_t i, NodePtr n) {
  ExtSequent e;
  e.formulas = conclusion_upto(n, 16).formulas;
  return ProofTree(f.domains[i], e, std::move(n));
}

Address at(std::initializer_list<PremiseIndex> is) { return Address(is); }

bool true_sequent(const Sequent& s) { return pmp::test::sequent_truth(s) == true; }

bool has_cut_of_rank(const ProofTree& d, std::uint32_t k, const std::function<bool(std::uint32_t)>& pred,
                     const Observe& obs = {}) {
  bool found = false;
  walk_prefix(d.root(), k, obs, [&](const Address&, const NodePtr& n) {
    if (n->rule().kind() == RuleKind::Cut && pred(rank(n->rule().node().f))) found = true;
    return !found;
  });
  return found;
}

}  // namespace

TEST_CASE("inverse of a false literal") {
  Formula eta = F("(lit \"=\" 0 1)");
  LocalFunction inv = inverse_false_literal(eta, over);
  Rule root = inv.body.expand({});
  REQUIRE(root.is_read());
  Rule rep = Rule::rep();
  CHECK(inv.body.expand(at({root.branch(rep)})) == rep);
  CHECK(inv.body.expand(at({root.branch(rep), rep.idx(Label::Top)})).is_read());
  CHECK(inv.body.expand(at({root.branch(Rule::ax(eta))})) == Rule::true_lit(negate(eta)));
  CHECK_THROWS_AS(inverse_false_literal(eq00, over), std::invalid_argument);
  CHECK_THROWS_AS(inverse_false_literal(F("(lit \"=\" x 1)"), over), std::invalid_argument);
  CHECK(check_conclusion_upto(inv.body, 8).pass);
}

TEST_CASE("inverse of a conjunction") {
  Formula l = eq00, r = F("(lit \"=\" 1 1)");
  Formula conj = Formula::conj(l, r);
  LocalFunction inv = inverse_conj(l, r, true, over);
  Rule root = inv.body.expand({});
  Rule ia = Rule::iand(conj);
  Address a{root.branch(ia)};
  CHECK(inv.body.expand(a) == Rule::rep());
  a.push_back(Rule::rep().idx(Label::Top));
  Rule next = inv.body.expand(a);
  REQUIRE(next.is_read());
  CHECK(next.tag().pos == Address{ia.idx(Label::R)});
  // Pass-through on an omega rule.
  Rule w = Rule::omega(F("(all x (lit \"=\" x x))"));
  CHECK(inv.body.expand(at({root.branch(w)})) == w);
  CHECK(inv.body.expand(at({root.branch(w), w.nat(4)})).tag().pos == Address{w.nat(4)});
  // End to end on a three-node proof.
  NodePtr d = finite_node(ia, {{ia.idx(Label::L), leaf(Rule::true_lit(l))}, {ia.idx(Label::R), leaf(Rule::true_lit(r))}});
  ProofTree out = apply(inv, {input(inv, 0, d)});
  CHECK(conclusion_upto(out, {}, 8).formulas == Sequent{r});
  CHECK(out.expand({}) == Rule::rep());
  CHECK(out.expand({Rule::rep().idx(Label::Top)}) == Rule::true_lit(r));
}

TEST_CASE("inverse of a universal") {
  Formula all = F("(all x (or (lit \"=\" x x) (not (lit \"=\" x x))))");
  LocalFunction inv = inverse_forall(all, 3, over);
  Rule root = inv.body.expand({});
  Rule w = Rule::omega(all);
  Rule next = inv.body.expand(at({root.branch(w), Rule::rep().idx(Label::Top)}));
  REQUIRE(next.is_read());
  CHECK(next.tag().pos == Address{w.nat(3)});
  Rule cut = Rule::cut(eq00);
  CHECK(inv.body.expand(at({root.branch(cut)})) == cut);
  // End to end on an embedded universal proof.
  Embedding e = pmp::test::embed_file(pmp::test::corpus("05_forall_em"));
  ProofTree out = apply(inv, {ProofTree(inv.domains[0], e.tree.declared(), e.tree.root())});
  Formula inst = instantiate1(all.body(), Term::numeral(3));
  CHECK(conclusion_upto(out, {}, 12).formulas == Sequent{inst});
  CHECK(check_valid_upto(out, 12).pass);
}

TEST_CASE("eliminating a disjunction") {
  Formula p0 = eq00, p1 = F("(lit \"=\" 0 1)");
  Formula disj = Formula::disj(p0, p1);
  LocalFunction el = elim_disj(p0, p1, over);
  REQUIRE(el.roots.size() == 2);
  CHECK(el.roots[1] == Sequent{negate(disj)});
  Rule root = el.body.expand({});
  Rule il = Rule::ior(disj, true);
  Rule c = el.body.expand(at({root.branch(il)}));
  CHECK(c == Rule::cut(p0));
  Rule top = el.body.expand(at({root.branch(il), c.idx(Label::Top)}));
  REQUIRE(top.is_read());
  CHECK(top.tag().root == Sequent{disj});
  CHECK(top.tag().pos == Address{il.idx(Label::Top)});
  Rule bot = el.body.expand(at({root.branch(il), c.idx(Label::Bot)}));
  REQUIRE(bot.is_read());
  CHECK(bot.tag().root == Sequent{negate(disj)});
  CHECK(el.body.expand(at({root.branch(Rule::rep())})) == Rule::rep());

  // Truth oracle: both inputs closed and cut free.
  NodePtr d0 = finite_node(il, {{il.idx(Label::Top), leaf(Rule::true_lit(p0))}});
  Rule ia = Rule::iand(negate(disj));
  NodePtr d1 = finite_node(ia, {{ia.idx(Label::L), leaf(Rule::true_lit(eq22))}, {ia.idx(Label::R), leaf(Rule::true_lit(eq22))}});
  ProofTree out = apply(el, {input(el, 0, d0), input(el, 1, d1)});
  Sequent g = conclusion_upto(out, {}, 12).formulas;
  CHECK(g == Sequent{eq22});
  CHECK(true_sequent(g));
  CHECK(check_valid_upto(out, 12).pass);
}

TEST_CASE("eliminating an existential") {
  Formula ex = F("(ex x (lit \"=\" x 1))");
  LocalFunction el = elim_exists(ex, over);
  Rule root = el.body.expand({});
  Rule ie = Rule::iexists1(ex, Term::numeral(1));
  Rule c = el.body.expand(at({root.branch(ie)}));
  CHECK(c == Rule::cut(F("(lit \"=\" 1 1)")));
  Rule bot = el.body.expand(at({root.branch(ie), c.idx(Label::Bot)}));
  REQUIRE(bot.is_read());
  CHECK(bot.tag().root == Sequent{negate(ex)});
  CHECK(el.body.expand(at({root.branch(Rule::rep())})) == Rule::rep());

  NodePtr d0 = finite_node(ie, {{ie.idx(Label::Top), leaf(Rule::true_lit(F("(lit \"=\" 1 1)")))}});
  NodePtr d1 = fixed_node(Rule::omega(negate(ex)), [](const PremiseIndex&) { return leaf(Rule::true_lit(eq22)); });
  ProofTree out = apply(el, {input(el, 0, d0), input(el, 1, d1)});
  Sequent g = conclusion_upto(out, {}, 12).formulas;
  CHECK(g == Sequent{eq22});
  CHECK(true_sequent(g));
}

TEST_CASE("eliminating a set literal") {
  SetVar X{"X", 0};
  LocalFunction el = elim_set_literal(X, Term::numeral(0), over);
  Formula x0 = F("(setlit X^0 0)");
  Rule root = el.body.expand({});
  REQUIRE(root.is_read());
  CHECK(root.tag().root == Sequent{x0});
  Rule sw = el.body.expand(at({root.branch(Rule::ax(x0))}));
  REQUIRE(sw.is_read());
  CHECK(sw.tag().root == Sequent{negate(x0)});
  CHECK(sw.tag().pos.empty());
  Rule rep = Rule::rep();
  CHECK(el.body.expand(at({root.branch(rep)})) == rep);
  Rule again = el.body.expand(at({root.branch(rep), rep.idx(Label::Top)}));
  CHECK(again.tag().root == Sequent{x0});
  // Both sides Rep: a Rep chain on the X side.
  NodePtr reps = fixed_node(rep, [](const PremiseIndex&) { return leaf(Rule::true_lit(eq22)); });
  ProofTree out = apply(el, {input(el, 0, reps), input(el, 1, reps)});
  CHECK(out.expand({}) == rep);
  CHECK(out.expand({rep.idx(Label::Top)}) == Rule::true_lit(eq22));
}

TEST_CASE("eliminating a second-order quantifier") {
  Formula all2 = F("(all2 X (setlit X 0))");
  Formula ex2 = negate(all2);
  LocalFunction el = elim_second_order(all2, TheoryId::no_read(0, 0, 2));
  Rule root = el.body.expand({});
  REQUIRE(root.tag().root == Sequent{all2});
  SetVar Y{"Y", 0};
  Rule i2 = Rule::iforall2(all2, Y);
  Address a{root.branch(i2)};
  Rule flip = el.body.expand(a);
  REQUIRE(flip.is_read());
  CHECK(flip.tag().root == Sequent{ex2});
  CHECK(flip.tag().pos.empty());
  Rule flat = Rule::omega_flat(SetVar{"Z", 0}, ex2);
  a.push_back(flip.branch(flat));
  Rule c = el.body.expand(a);
  REQUIRE(c.kind() == RuleKind::CutOmegaFlat);
  Address top = a;
  top.push_back(c.idx(Label::Top));
  Rule t = el.body.expand(top);
  REQUIRE(t.is_read());
  CHECK(t.tag().root == Sequent{all2});
  CHECK(t.tag().pos == Address{i2.idx(Label::Top)});
  Address bot = a;
  bot.push_back(c.idx(Label::Bot));
  CHECK(el.body.expand(bot).tag().pos == Address{flat.idx(Label::Bot)});
  Rule w = Rule::omega(F("(all x (lit \"=\" x x))"));
  CHECK(el.body.expand(at({root.branch(w)})) == w);
}

TEST_CASE("cut dispatch") {
  CutDispatch lit = dispatch_cut(eq00, over);
  CHECK(lit.op.roots == std::vector<Sequent>{{negate(eq00)}});
  CHECK(lit.sides == std::vector<Label>{Label::Bot});
  Formula disj = F("(or (lit \"=\" 0 0) (lit \"=\" 0 1))");
  CutDispatch d = dispatch_cut(disj, over);
  CHECK(d.sides == (std::vector<Label>{Label::Top, Label::Bot}));
  CutDispatch c = dispatch_cut(negate(disj), over);
  CHECK(c.sides == (std::vector<Label>{Label::Bot, Label::Top}));
}

TEST_CASE("reduce") {
  SUBCASE("no cuts of the rank: the input is copied") {
    for (const char* stem : {"03_and", "05_forall_em", "10_ind3"}) {
      CAPTURE(stem);
      Embedding e = pmp::test::embed_file(pmp::test::corpus(stem));
      LocalFunction f = lift(reduce(0, 0, 0), e.tree.theory());
      ProofTree out = apply(f, {e.tree});
      CHECK(render(out, 8) == render(e.tree, 8));
    }
  }
  SUBCASE("a cut on a true literal takes the inversion") {
    Embedding e = pmp::test::embed_file(pmp::test::corpus("07_cut_literal"));
    LocalFunction f = lift(reduce(0, 0, 0), e.tree.theory());
    ProofTree out = apply(f, {e.tree});
    CHECK(out.expand({}) == Rule::rep());
    CHECK(out.expand({Rule::rep().idx(Label::Top)}) == Rule::true_lit(eq00));
  }
  SUBCASE("a cut on a disjunction dispatches to the elimination") {
    LocalFunction red = reduce(1, 0, 0);
    Formula disj = F("(or (lit \"=\" 0 0) (lit \"=\" 0 1))");
    Rule root = red.body.expand({});
    Rule cut = Rule::cut(disj);
    Address a{root.branch(cut)};
    CHECK(red.body.expand(a) == Rule::rep());
    a.push_back(Rule::rep().idx(Label::Top));
    Rule next = red.body.expand(a);
    // The elimination reads the top premise first.
    REQUIRE(next.is_read());
    CHECK(next.tag().root.empty());
    CHECK(next.tag().pos == Address{cut.idx(Label::Top)});
    Rule il = Rule::ior(disj, true);
    a.push_back(next.branch(il));
    CHECK(red.body.expand(a) == Rule::cut(eq00));
  }
  SUBCASE("output has no cut of the removed rank") {
    Embedding e = pmp::test::embed_file(pmp::test::corpus("14_nested_cuts"));
    std::uint32_t r = e.params.r - 1;
    LocalFunction f = lift(reduce(r, 0, 0), e.tree.theory());
    f.codomain = TheoryId::infinitary(0, 0, r);
    ProofTree out = apply(f, {e.tree});
    CHECK_FALSE(has_cut_of_rank(out, 10, [&](std::uint32_t k) { return k >= r; }));
    CHECK(check_conclusion_upto(out, 10).pass);
    CHECK(check_valid_upto(out, 10).pass);
  }
}

TEST_CASE("eliminate all cuts") {
  Embedding e = pmp::test::embed_file(pmp::test::corpus("07_cut_literal"));
  ProofTree same = eliminate_all_cuts(e.tree, 0);
  CHECK(same.root() == e.tree.root());
  for (const auto& p : pmp::test::corpus_files()) {
    CAPTURE(p);
    Embedding ep = pmp::test::embed_file(p);
    ProofTree c = eliminate_all_cuts(ep.tree);
    CHECK(c.theory() == TheoryId::infinitary(ep.params.N, ep.params.L, 0));
    CHECK_FALSE(has_cut_of_rank(c, 8, [](std::uint32_t) { return true; }));
    CHECK(c.declared().formulas == ep.tree.declared().formulas);
    CHECK(check_conclusion_upto(c, 8).pass);
    if (auto ok = pmp::test::sequent_truth(c.declared().formulas)) CHECK(*ok);
  }
}
