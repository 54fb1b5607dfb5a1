#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace pmp;
using pmp::test::D;
using pmp::test::F;

namespace {

const Formula eq00 = F("(lit \"=\" 0 0)");
const Formula ne00 = F("(not (lit \"=\" 0 0))");

ProofTree one_node(const Rule& r, ExtSequent decl) {
  return ProofTree(TheoryId::universal(), std::move(decl), leaf(r));
}

ExtSequent ext(const Sequent& s) {
  ExtSequent e;
  e.formulas = s;
  return e;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("expand") {
  ProofTree t = deduction_tree(D("(true (lit \"=\" 0 0))"));
  CHECK(t.expand({}) == Rule::true_lit(eq00));
  Rule cut = Rule::cut(eq00);
  CHECK_THROWS_AS(t.expand({cut.idx(Label::Top)}), AddressError);

  ProofTree em = excluded_middle(F("(or (lit \"=\" 0 0) (not (lit \"=\" 0 0)))"), 0, 0);
  Rule root = em.expand({});
  REQUIRE(root.kind() == RuleKind::IAnd);
  CHECK(em.expand({root.idx(Label::L)}).kind() == RuleKind::IOrL);
  CHECK(em.expand({root.idx(Label::R)}).kind() == RuleKind::IOrR);
  Rule l = em.expand({root.idx(Label::L)});
  CHECK(em.expand({root.idx(Label::L), l.idx(Label::Top)}) == Rule::ax(eq00));
}

TEST_CASE("conclusion_upto") {
  ProofTree ax = one_node(Rule::ax(eq00), {});
  for (std::uint32_t k : {0u, 1u, 5u}) CHECK(conclusion_upto(ax, {}, k).formulas == Sequent{eq00, ne00});

  Formula p = F("(lit \"=\" 1 1)");
  Rule cut = Rule::cut(eq00);
  NodePtr n = finite_node(cut, {{cut.idx(Label::Top), leaf(Rule::true_lit(eq00))},
                                {cut.idx(Label::Bot), leaf(Rule::ax(p))}});
  ProofTree t(TheoryId::universal(), {}, n);
  CHECK(conclusion_upto(t, {}, 5).formulas == (Sequent{p, negate(p)}));
  CHECK(conclusion_upto(t, {}, 0).empty());

  // A premise that does not remove the cut formula keeps it.
  NodePtr m = finite_node(cut, {{cut.idx(Label::Top), leaf(Rule::true_lit(p))},
                                {cut.idx(Label::Bot), leaf(Rule::ax(eq00))}});
  CHECK(conclusion_upto(ProofTree(TheoryId::universal(), {}, m), {}, 3).formulas == (Sequent{p, eq00}));
}

TEST_CASE("check_conclusion_upto reports the missing formula") {
  CHECK(check_conclusion_upto(one_node(Rule::ax(eq00), ext({eq00, ne00})), 4).pass);
  Verdict v = check_conclusion_upto(one_node(Rule::ax(eq00), ext({eq00})), 4);
  CHECK_FALSE(v.pass);
  REQUIRE(v.failures.size() == 1);
  CHECK(v.failures[0].what.find(ne00.str()) != std::string::npos);
  CHECK(v.failures[0].at.empty());
}

TEST_CASE("validity and eigenvariables") {
  SUBCASE("fresh set variable") {
    Deduction d = D("(iforall2 (all2 X (lit \"=\" 0 0)) Y (true (lit \"=\" 0 0)))");
    CHECK(check_deduction(d).verdict.pass);
    CHECK(check_valid_upto(deduction_tree(d), 4).pass);
  }
  SUBCASE("set variable retained in a side formula") {
    Rule r = Rule::iforall2(F("(all2 X (setlit X 0))"), SetVar{"Y", 0});
    NodePtr n = finite_node(r, {{rule_premises(r).list.at(0), leaf(Rule::ax(F("(setlit Y^0 0)")))}});
    Verdict v = check_valid_upto(ProofTree(TheoryId::pa2(), {}, n), 4);
    CHECK_FALSE(v.pass);
    REQUIRE_FALSE(v.failures.empty());
    CHECK(v.failures[0].what.find("eigenvariable Y^0") != std::string::npos);
  }
  SUBCASE("cut-omega eigenvariable free in the top premise") {
    Formula ex2 = F("(ex2 X (setlit X 0))");
    SetVar Z{"Z", 0}, Y{"Y", 0};
    Rule c = Rule::cut_omega_flat(Z, Y, ex2);
    Formula zlit = F("(setlit Z^0 5)");
    auto child = [&](const PremiseIndex&) { return leaf(Rule::ax(zlit)); };
    Verdict v = check_valid_upto(ProofTree(TheoryId::universal(), {}, fixed_node(c, child)), 3);
    CHECK_FALSE(v.pass);
  }
  SUBCASE("premise count and membership") {
    Deduction bad = D("(cut (lit \"=\" 0 0) (true (lit \"=\" 0 0)) (ax (lit \"=\" 0 0)))");
    CHECK(check_deduction(bad, TheoryId::pa2()).verdict.pass);
    CHECK_FALSE(check_deduction(bad, TheoryId::pa2_cut_free()).verdict.pass);
  }
}

TEST_CASE("consecutive reads") {
  CHECK(check_no_consecutive_reads_upto(identity_fn(eq00, 0, 0).body, 6).pass);

  Tag t{{eq00}, {}, {eq00}, {}};
  Rule outer = Rule::read(TheoryId::base(0, 0), t);
  Tag t2 = t;
  t2.pos = {outer.branch(Rule::rep())};
  Rule same = Rule::read(TheoryId::base(0, 0), t2);
  NodePtr bad = fixed_node(outer, [same](const PremiseIndex&) { return fixed_node(same, [](const PremiseIndex&) { return leaf(Rule::rep()); }); });
  Verdict v = check_no_consecutive_reads_upto(ProofTree(TheoryId::universal(), {}, bad), 3);
  CHECK_FALSE(v.pass);
  REQUIRE_FALSE(v.failures.empty());
  CHECK(v.failures[0].at.size() == 1);

  Tag other{{ne00}, {}, {ne00}, {}};
  Rule different = Rule::read(TheoryId::base(0, 0), other);
  NodePtr ok = fixed_node(outer, [different](const PremiseIndex&) { return fixed_node(different, [](const PremiseIndex&) { return leaf(Rule::true_lit(eq00)); }); });
  CHECK(check_no_consecutive_reads_upto(ProofTree(TheoryId::universal(), {}, ok), 3).pass);
}

TEST_CASE("subtree") {
  Embedding e = pmp::test::embed_file(pmp::test::corpus("14_nested_cuts"));
  const ProofTree& d = e.tree;
  CHECK(render(subtree(d, {}), 6) == render(d, 6));
  Rule root = d.expand({});
  REQUIRE(root.kind() == RuleKind::Cut);
  Address top{root.idx(Label::Top)};
  ProofTree s = subtree(d, top);
  CHECK(s.expand({}) == d.expand(top));
  // Composition: subtree(subtree(d, a), b) == subtree(d, a b).
  std::vector<Address> inner;
  walk_prefix(s.root(), 3, {}, [&](const Address& a, const NodePtr&) {
    inner.push_back(a);
    return true;
  });
  REQUIRE(inner.size() > 2);
  for (const auto& b : inner) {
    Address ab = top;
    ab.insert(ab.end(), b.begin(), b.end());
    CHECK(render(subtree(s, b), 3) == render(subtree(d, ab), 3));
  }
}

TEST_CASE("render") {
  ProofTree t = deduction_tree(D("(true (lit \"=\" 0 0))"));
  CHECK(lines(render(t, 5)) == 1);
  ProofTree em = excluded_middle(F("(or (lit \"=\" 0 0) (not (lit \"=\" 0 0)))"), 0, 0);
  std::string a = render(em, 2), b = render(em, 2);
  CHECK(a == b);
  CHECK(lines(a) == 5);
  CHECK(a.rfind(". | IAnd", 0) == 0);
  std::string id = render(identity_fn(eq00, 0, 0).body, 1);
  CHECK(id.find("[branches elided]") != std::string::npos);
}

TEST_CASE("conclusions grow with fuel") {
  for (const auto& p : pmp::test::corpus_files()) {
    CAPTURE(p);
    Embedding e = pmp::test::embed_file(p);
    ExtSequent prev = conclusion_upto(e.tree, {}, 0);
    for (std::uint32_t k = 1; k <= 8; ++k) {
      ExtSequent cur = conclusion_upto(e.tree, {}, k);
      CHECK(pmp::test::within(prev, cur));
      prev = cur;
    }
  }
}

TEST_CASE("node memoization") {
  int made = 0;
  NodePtr n = lazy_node([&] {
    ++made;
    return Step{Rule::true_lit(eq00), {}};
  });
  n->rule();
  n->rule();
  CHECK(made == 1);
  CHECK_THROWS_AS(n->child(Rule::rep().idx(Label::Top)), AddressError);
}
