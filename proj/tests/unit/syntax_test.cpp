#include <doctest.h>

#include "support.hpp"

using namespace pmp;
using pmp::test::F;

namespace {

// All formulas of size <= max over four literals and every connective.
std::vector<std::vector<Formula>> enumerate(std::uint32_t max) {
  SetRef x{false, 0, SetVar{"X", 0}};
  std::vector<std::vector<Formula>> by(max + 1);
  by[1] = {F("(lit \"=\" 0 0)"), F("(not (lit \"=\" 0 0))"), Formula::setlit(x, true, Term::numeral(0)),
           Formula::setlit(x, false, Term::numeral(0))};
  for (std::uint32_t n = 2; n <= max; ++n) {
    for (const auto& b : by[n - 1]) {
      by[n].push_back(Formula::all1(b));
      by[n].push_back(Formula::ex1(b));
      by[n].push_back(Formula::all2(b));
      by[n].push_back(Formula::ex2(b));
    }
    for (std::uint32_t i = 1; i + 1 < n; ++i)
      for (const auto& a : by[i])
        for (const auto& b : by[n - 1 - i]) {
          by[n].push_back(Formula::conj(a, b));
          by[n].push_back(Formula::disj(a, b));
        }
  }
  return by;
}

}  // namespace

TEST_CASE("negate pushes through connectives") {
  CHECK(negate(F("(and (lit \"=\" 0 0) (lit \"<\" 0 1))")) ==
        F("(or (not (lit \"=\" 0 0)) (not (lit \"<\" 0 1)))"));
  CHECK(negate(F("(setlit X^0 3)")) == F("(not (setlit X^0 3))"));
  CHECK(negate(F("(all x (ex y (lit \"<\" x y)))")) == F("(ex x (all y (not (lit \"<\" x y))))"));
  CHECK(negate(F("(all2 X (setlit X 0))")) == F("(ex2 X (not (setlit X 0)))"));
}

TEST_CASE("negate is an involution on every formula up to size 7") {
  auto by = enumerate(7);
  std::size_t count = 0;
  for (std::uint32_t n = 1; n < by.size(); ++n)
    for (const auto& f : by[n]) {
      REQUIRE(f.size() == n);
      Formula g = negate(f);
      REQUIRE(g.size() == n);
      REQUIRE(negate(g) == f);
      REQUIRE(g != f);
      ++count;
    }
  CHECK(count > 300000);
}

TEST_CASE("subst_num") {
  CHECK(subst_num(F("(lit \"=\" x 0)"), "x", Term::numeral(1)) == F("(lit \"=\" (s 0) 0)"));
  Formula g = F("(lit \"=\" y 0)");
  CHECK(subst_num(g, "x", Term::numeral(5)) == g);
  CHECK(subst_num(F("(all y (lit \"<\" x y))"), "x", Term::numeral(0)) == F("(all y (lit \"<\" 0 y))"));
  // A free variable named like the binder is not captured.
  CHECK(subst_num(F("(all y (lit \"<\" x y))"), "x", Term::var("y")) ==
        Formula::all1(Formula::prim("<", true, {Term::var("y"), Term::bound(0)})));
}

TEST_CASE("subst_set") {
  SetVar X{"X", 0};
  SetAbstract psi = SetAbstract::from("z", F("(lit \"<\" z 2)"));
  CHECK(subst_set(F("(and (setlit X^0 0) (not (setlit X^0 (s 0))))"), X, psi) ==
        F("(and (lit \"<\" 0 2) (not (lit \"<\" (s 0) 2)))"));
  Formula g = F("(setlit Y^0 0)");
  CHECK(subst_set(g, X, psi) == g);
  CHECK(subst_set(F("(ex2 Y (or (setlit X^0 0) (setlit Y 0)))"), X, psi) ==
        F("(ex2 Y (or (lit \"<\" 0 2) (setlit Y 0)))"));
  // A compound abstract negates through its connectives.
  SetAbstract conj = SetAbstract::from("z", F("(and (lit \"=\" z z) (lit \"<\" z 1))"));
  CHECK(subst_set(F("(not (setlit X^0 3))"), X, conj) == negate(conj.at(Term::numeral(3))));
}

TEST_CASE("depth, level and complexity") {
  Formula a = F("(ex2 X (or (setlit X 0) (all2 Y (or (setlit X 0) (setlit Y 0)))))");
  // The nesting count includes the outer quantifier; comp follows the recursion on the body.
  CHECK(nesting_depth(a) == 2);
  CHECK(comp(a) == Complexity{1, 0});
  Formula b = F("(ex2 X (or (setlit X 0) (all2 Y (setlit Y 0))))");
  CHECK(nesting_depth(b) == 1);
  CHECK(comp(b) == Complexity{0, 1});
  CHECK(dp(F("(all2 Y (or (setlit X^0 0) (setlit Y 0)))"), {SetVar{"X", 0}}) == 1);
  CHECK(dp(F("(all2 Y (setlit Y 0))"), {SetVar{"X", 0}}) == 0);
  CHECK(lvl(F("(setlit X^2 4)"), {}) == 3);
  CHECK(lvl(F("(setlit X^0 4)"), {}) == 1);
}

TEST_CASE("complexity order is strict and total") {
  std::vector<Complexity> cs;
  for (std::uint32_t d = 0; d < 4; ++d)
    for (std::uint32_t l = 0; l < 4; ++l) cs.push_back({d, l});
  for (const auto& a : cs)
    for (const auto& b : cs) {
      CHECK(!(a < b && b < a));
      CHECK((a < b || b < a || a == b));
      CHECK(!(a < a));
      for (const auto& c : cs)
        if (a < b && b < c) CHECK(a < c);
    }
  CHECK(Complexity{3, 0} < Complexity{0, 1});
}

TEST_CASE("rank") {
  CHECK(rank(F("(lit \"=\" 0 0)")) == 0);
  CHECK(rank(F("(or (lit \"=\" 0 0) (lit \"=\" 0 0))")) == 1);
  CHECK(rank(F("(all x (ex y (lit \"<\" x y)))")) == 2);
  CHECK(rank(negate(F("(all x (ex y (lit \"<\" x y)))"))) == 2);
}

TEST_CASE("eval_literal") {
  CHECK(eval_literal(F("(lit \"=\" 0 0)")));
  CHECK_FALSE(eval_literal(F("(not (lit \"=\" 0 0))")));
  CHECK(eval_literal(F("(lit \"<\" (s 0) (s (s 0)))")));
  CHECK(eval_literal(F("(lit \"add\" 2 3 5)")));
  CHECK_FALSE(eval_literal(F("(lit \"mul\" 2 3 5)")));
  CHECK_THROWS_AS(eval_literal(F("(lit \"=\" x 0)")), SyntaxError);
  CHECK_THROWS_AS(eval_literal(F("(setlit X^0 0)")), SyntaxError);
}

TEST_CASE("free_vars") {
  FreeVars a = free_vars(F("(setlit X^0 3)"));
  CHECK(a.first.empty());
  CHECK(a.second == std::set<SetVar>{SetVar{"X", 0}});
  FreeVars b = free_vars(F("(all x (lit \"=\" x y))"));
  CHECK(b.first == std::set<std::string>{"y"});
  CHECK(b.second.empty());
  FreeVars c = free_vars(F("(ex2 Y (or (setlit Y 0) (setlit Z^1 0)))"));
  CHECK(c.first.empty());
  CHECK(c.second == std::set<SetVar>{SetVar{"Z", 1}});
}

TEST_CASE("bounded evaluation") {
  CHECK(eval_bounded(F("(all x (lit \"<=\" 0 x))"), 5) == true);
  CHECK(eval_bounded(F("(ex x (lit \"<\" 3 x))"), 2) == false);
  CHECK(eval_bounded(F("(ex x (lit \"<\" 3 x))"), 5) == true);
  CHECK(!eval_bounded(F("(setlit X^0 0)"), 3).has_value());
}

TEST_CASE("formula ordering is a total order consistent with equality") {
  auto by = enumerate(3);
  std::vector<Formula> all;
  for (const auto& v : by) all.insert(all.end(), v.begin(), v.end());
  for (const auto& a : all)
    for (const auto& b : all) {
      bool lt = (a <=> b) < 0, gt = (a <=> b) > 0;
      CHECK((lt || gt || a == b));
      CHECK((a == b) == (a.str() == b.str()));
    }
}
