// One PASS/FAIL line per acceptance criterion; nonzero exit when any fails.
#include <chrono>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "pmp/cli.hpp"
#include "pmp/collapse.hpp"
#include "pmp/cutelim.hpp"
#include "pmp/ordinals.hpp"
#include "poly_oracle.hpp"
#include "support.hpp"

using namespace pmp;
using pmp::test::F;

namespace {

using Clock = std::chrono::steady_clock;

struct Tally {
  std::size_t cases = 0;
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    ++cases;
    if (!ok) failures.push_back(what);
  }
};

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

ExtSequent ext(const Sequent& s) {
  ExtSequent e;
  e.formulas = s;
  return e;
}

Sequent minus(Sequent s, const Formula& f) {
  s.erase(f);
  return s;
}

Sequent join(Sequent a, const Sequent& b) {
  a.insert(b.begin(), b.end());
  return a;
}

ProofTree input(const LocalFunction& f, std::size_t i, const NodePtr& n) {
  return ProofTree(f.domains[i], conclusion_upto(n, 16), n);
}
ProofTree input(const LocalFunction& f, std::size_t i, const ProofTree& d) {
  return ProofTree(f.domains[i], d.declared(), d.root());
}

Observe corpus_obs() {
  Observe obs;
  obs.probes = pmp::test::corpus_probes();
  return obs;
}

const std::set<RuleKind>& collapsed_rules() {
  static const std::set<RuleKind> s{RuleKind::True, RuleKind::Ax,       RuleKind::IAnd,  RuleKind::IOrL,
                                    RuleKind::IOrR, RuleKind::IExists1, RuleKind::Omega, RuleKind::Rep};
  return s;
}

bool has_kind(const NodePtr& root, std::uint32_t k, const Observe& obs, const std::function<bool(const Rule&)>& bad,
              std::string* which = nullptr) {
  bool found = false;
  walk_prefix(root, k, obs, [&](const Address&, const NodePtr& n) {
    if (bad(n->rule())) {
      found = true;
      if (which) *which = n->rule().name();
    }
    return !found;
  });
  return found;
}

bool second_order(const Sequent& s) {
  for (const auto& f : s)
    if (f.str().find("all2") != std::string::npos || f.str().find("ex2") != std::string::npos) return true;
  return false;
}

// ---------------------------------------------------------------- 1

struct Pair {
  std::string name;
  ProofTree out;
  ExtSequent expected;
};

std::vector<Pair> containment_pairs() {
  std::vector<Pair> ps;
  const TheoryId over = TheoryId::no_read(0, 0, 1);

  // Id: Gamma(Id(d)) within Gamma(d).
  for (const auto& file : pmp::test::corpus_files()) {
    Embedding e = pmp::test::embed_file(file);
    Formula phi = *e.tree.declared().formulas.begin();
    LocalFunction id = identity_fn_over(phi, e.tree.theory());
    ps.push_back({"id " + stem(file), apply(id, {input(id, 0, e.tree)}), e.tree.declared()});
  }

  // Inverse of a false literal eta: Gamma(d) minus eta.
  const Formula eta = F("(lit \"=\" 0 1)");
  const Formula eq00 = F("(lit \"=\" 0 0)");
  {
    LocalFunction inv = inverse_false_literal(eta, over);
    NodePtr ax = leaf(Rule::ax(eta));
    ps.push_back({"inverse-bot ax", apply(inv, {input(inv, 0, ax)}), ext(minus({eta, negate(eta)}, eta))});
    Formula disj = Formula::disj(eta, eq00);
    Rule ir = Rule::ior(disj, false);
    NodePtr d = finite_node(ir, {{ir.idx(Label::Top), leaf(Rule::true_lit(eq00))}});
    ps.push_back({"inverse-bot ior", apply(inv, {input(inv, 0, d)}), ext({disj})});
  }

  // Inverse of a conjunction: Gamma(d) minus (l and r), plus the chosen side.
  {
    Embedding e = pmp::test::embed_file(pmp::test::corpus("03_and"));
    Formula conj = *e.tree.declared().formulas.begin();
    for (bool right : {false, true}) {
      LocalFunction inv = inverse_conj(conj.lhs(), conj.rhs(), right, over);
      Sequent expected = minus(e.tree.declared().formulas, conj);
      expected.insert(right ? conj.rhs() : conj.lhs());
      ps.push_back({std::string("inverse-and ") + (right ? "right" : "left"), apply(inv, {input(inv, 0, e.tree)}),
                    ext(expected)});
    }
  }

  // Inverse of a universal at n: Gamma(d) minus the universal, plus its instance.
  {
    Embedding e = pmp::test::embed_file(pmp::test::corpus("05_forall_em"));
    Formula all = *e.tree.declared().formulas.begin();
    for (std::uint32_t n : {0u, 1u, 2u, 3u}) {
      LocalFunction inv = inverse_forall(all, n, over);
      Sequent expected = minus(e.tree.declared().formulas, all);
      expected.insert(instantiate1(all.body(), Term::numeral(n)));
      ps.push_back({"inverse-forall " + std::to_string(n), apply(inv, {input(inv, 0, e.tree)}), ext(expected)});
    }
  }

  // Eliminations: (Gamma0 minus phi) union (Gamma1 minus not phi).
  const Formula eq22 = F("(lit \"=\" 2 2)");
  {
    Formula p0 = eq00, p1 = eta;
    Formula disj = Formula::disj(p0, p1);
    LocalFunction el = elim_disj(p0, p1, over);
    Rule ia = Rule::iand(negate(disj));
    NodePtr d1 = finite_node(ia, {{ia.idx(Label::L), leaf(Rule::true_lit(eq22))}, {ia.idx(Label::R), leaf(Rule::true_lit(eq22))}});
    for (bool left : {true, false}) {
      Rule il = Rule::ior(disj, left);
      NodePtr d0 = left ? finite_node(il, {{il.idx(Label::Top), leaf(Rule::true_lit(p0))}})
                        : finite_node(il, {{il.idx(Label::Top), leaf(Rule::ax(p1))}});
      ProofTree i0 = input(el, 0, d0), i1 = input(el, 1, d1);
      Sequent expected = join(minus(i0.declared().formulas, disj), minus(i1.declared().formulas, negate(disj)));
      ps.push_back({std::string("elim-or ") + (left ? "left" : "right"), apply(el, {i0, i1}), ext(expected)});
    }
  }
  {
    Formula ex = F("(ex x (lit \"=\" x 1))");
    LocalFunction el = elim_exists(ex, over);
    Rule ie = Rule::iexists1(ex, Term::numeral(1));
    NodePtr d0 = finite_node(ie, {{ie.idx(Label::Top), leaf(Rule::true_lit(F("(lit \"=\" 1 1)")))}});
    NodePtr d1 = fixed_node(Rule::omega(negate(ex)), [eq22](const PremiseIndex&) { return leaf(Rule::true_lit(eq22)); });
    ProofTree i0 = input(el, 0, d0), i1 = input(el, 1, d1);
    Sequent expected = join(minus(i0.declared().formulas, ex), minus(i1.declared().formulas, negate(ex)));
    ps.push_back({"elim-exists", apply(el, {i0, i1}), ext(expected)});
  }

  // Reduce: Gamma(Reduce(d)) within Gamma(d).
  for (const char* s : {"07_cut_literal", "08_cut_disj", "09_cut_forall", "13_cut_setlit", "14_nested_cuts",
                        "15_cut_forall2_nested"}) {
    Embedding e = pmp::test::embed_file(pmp::test::corpus(s));
    const TheoryId& t = e.tree.theory();
    LocalFunction f = lift(reduce(t.r - 1, t.N, t.L), t);
    f.codomain = TheoryId::infinitary(t.N, t.L, t.r - 1);
    ps.push_back({std::string("reduce ") + s, apply(f, {e.tree}), e.tree.declared()});
  }
  return ps;
}

Tally criterion1() {
  Tally t;
  auto t0 = Clock::now();
  std::vector<Pair> ps = containment_pairs();
  for (const auto& p : ps) {
    ExtSequent got = conclusion_upto(p.out, {}, 12);
    t.expect(pmp::test::within(got, p.expected), p.name + ": " + got.str() + " not within " + p.expected.str());
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  t.expect(ps.size() >= 20, "only " + std::to_string(ps.size()) + " pairs");
  t.expect(secs < 10.0, "took " + std::to_string(secs) + " s");
  return t;
}

// ---------------------------------------------------------------- 2

struct Op {
  std::string name;
  LocalFunction f;
  TheoryId plus;
};

// Each operator with the extension it is lifted to: the cut operators run
// under Reduce lifted to every rule, Reduce to the theory of its input, and
// the substitution inside an embedded Omega-flat premise is not lifted.
std::vector<Op> catalog_ops() {
  const TheoryId over = TheoryId::no_read(0, 0, 1);
  const TheoryId over2 = TheoryId::no_read(0, 0, 2);
  const TheoryId all = TheoryId::universal();
  Formula conj = F("(and (lit \"=\" 0 0) (lit \"<\" 0 1))");
  Formula phi = F("(and (setlit X^0 0) (lit \"=\" 5 5))");
  SetAbstract psi = SetAbstract::from("z", F("(lit \"=\" z z)"));
  LocalFunction sub = substitution_fn(phi, SetVar{"X", 0}, psi, 0, 0);
  return {
      {"id", identity_fn(F("(or (lit \"=\" 0 0) (lit \"=\" 0 1))"), 0, 0), TheoryId::infinitary(0, 0, 2)},
      {"inverse-bot", inverse_false_literal(F("(lit \"=\" 0 1)"), over), all},
      {"inverse-and", inverse_conj(conj.lhs(), conj.rhs(), true, over), all},
      {"inverse-forall", inverse_forall(F("(all x (lit \"=\" x x))"), 2, over), all},
      {"elim-or", elim_disj(F("(lit \"=\" 0 0)"), F("(lit \"=\" 0 1)"), over), all},
      {"elim-exists", elim_exists(F("(ex x (lit \"=\" x 1))"), over), all},
      {"elim-set-literal", elim_set_literal(SetVar{"X", 0}, Term::numeral(0), over), all},
      {"elim-second-order", elim_second_order(F("(all2 X (setlit X 0))"), over2), all},
      {"reduce 0", reduce(0, 0, 0), TheoryId::infinitary(0, 0, 1)},
      {"reduce 1", reduce(1, 0, 0), TheoryId::infinitary(0, 0, 2)},
      {"substitution", sub, sub.domains[0]},
  };
}

Tally criterion2() {
  Tally t;
  Observe obs = corpus_obs();
  for (const auto& op : catalog_ops()) {
    for (std::size_t i = 0; i < op.f.domains.size(); ++i) {
      Verdict v = check_conservative(op.plus, op.f.domains[i], op.f.roots[i], {op.f.root_tag(i)}, obs.probes);
      t.expect(v.pass, op.name + " conservativity: " + v.str());
    }
    LocalFunction up = lift(op.f, op.plus);
    ExtSequent got = conclusion_upto(up.body, {}, 12, obs);
    t.expect(pmp::test::within(got, op.f.body.declared()),
             op.name + ": lifted " + got.str() + " not within " + op.f.body.declared().str());
  }
  return t;
}

// ---------------------------------------------------------------- 3

Tally criterion3() {
  Tally t;
  std::set<std::string> seen;
  for (const auto& file : pmp::test::corpus_files()) {
    Embedding e = pmp::test::embed_file(file);
    std::string s = stem(file);
    for (auto [name, v] : {std::pair{"conclusion", check_conclusion_upto(e.tree, 12)},
                           std::pair{"valid", check_valid_upto(e.tree, 12)},
                           std::pair{"theory", check_theory_upto(e.tree, 12)}})
      t.expect(v.pass, s + " " + name + ": " + v.str());
    seen.insert(s);
  }
  t.expect(seen.size() >= 10, "fewer than 10 proofs");
  t.expect(seen.count("10_ind3") && seen.count("11_exists2"), "Ind or I-exists2 instance missing");
  // The Ind instance at 3 unfolds to one existential step per n < 3.
  Embedding ind = pmp::test::embed_file(pmp::test::corpus("10_ind3"));
  std::set<std::string> steps;
  walk_prefix(ind.tree.root(), 12, {}, [&](const Address&, const NodePtr& n) {
    if (n->rule().kind() == RuleKind::IExists1) steps.insert(n->rule().name());
    return true;
  });
  t.expect(steps.size() == 3, "10_ind3 unfolds " + std::to_string(steps.size()) + " steps");
  return t;
}

// ---------------------------------------------------------------- 4, 5

struct Stages {
  std::string file;
  Sequent deduction;
  Embedding e;
  ProofTree elim;
  std::optional<ProofTree> col;
};

std::vector<Stages> run_stages(Tally& t4) {
  std::vector<Stages> out;
  for (const auto& file : pmp::test::corpus_files()) {
    ProofFile pf = load_proof_file(file);
    Embedding e = pmp::test::embed_file(file);
    ProofTree elim = eliminate_all_cuts(e.tree);
    std::optional<ProofTree> col;
    Verdict pre = check_collapse_pre(elim.declared(), Complexity{0, 0});
    if (pre.pass) {
      col = collapse_all(elim);
    } else {
      // Only second-order declarations fall outside the collapsing domain.
      t4.expect(second_order(elim.declared().formulas) && !pre.failures.empty(),
                stem(file) + ": unexpected precondition failure " + pre.str());
    }
    out.push_back({file, deduction_conclusion(pf.proof), e, elim, col});
  }
  return out;
}

Tally criterion4(const std::vector<Stages>& st, Tally t) {
  Observe obs = corpus_obs();
  std::size_t collapsed = 0;
  for (const auto& s : st) {
    std::string n = stem(s.file), which;
    t.expect(!has_kind(s.elim.root(), 10, obs, [](const Rule& r) { return r.kind() == RuleKind::Cut; }, &which),
             n + ": cut after elimination: " + which);
    t.expect(s.elim.declared().formulas == s.e.tree.declared().formulas, n + ": elimination changed the conclusion");
    Verdict c = check_conclusion_upto(s.elim, 10, obs);
    t.expect(c.pass, n + " elimination conclusion: " + c.str());
    if (!s.col) continue;
    ++collapsed;
    t.expect(!has_kind(s.col->root(), 10, obs, [](const Rule& r) { return !collapsed_rules().count(r.kind()); }, &which),
             n + ": rule outside the collapsed fragment: " + which);
    t.expect(s.col->declared().formulas == s.e.tree.declared().formulas, n + ": collapse changed the conclusion");
    Verdict cc = check_conclusion_upto(*s.col, 10, obs);
    t.expect(cc.pass, n + " collapse conclusion: " + cc.str());
  }
  t.expect(collapsed + 1 >= st.size(), "collapsed only " + std::to_string(collapsed) + " proofs");
  return t;
}

Tally criterion5(const std::vector<Stages>& st) {
  Tally t;
  Observe obs = corpus_obs();
  std::size_t closed = 0;
  for (const auto& s : st) {
    if (!pmp::test::sequent_truth(s.deduction)) continue;
    ++closed;
    std::string n = stem(s.file);
    auto truth = [&](const std::string& stage, const Sequent& g) {
      t.expect(pmp::test::sequent_truth(g) == true, n + " " + stage + ": " + sequent_str(g) + " is not true");
    };
    truth("deduction", s.deduction);
    truth("embed", s.e.tree.declared().formulas);
    truth("eliminate", s.elim.declared().formulas);
    if (s.col) truth("collapse", s.col->declared().formulas);
    // Every formula the prefix concludes lies in the true declaration.
    for (const ProofTree* d : {&s.e.tree, &s.elim, s.col ? &*s.col : nullptr}) {
      if (!d) continue;
      Sequent g = conclusion_upto(*d, {}, 10, obs).formulas;
      t.expect(std::includes(d->declared().formulas.begin(), d->declared().formulas.end(), g.begin(), g.end()),
               n + ": prefix conclusion leaves the declaration");
    }
  }
  t.expect(closed >= 8, "only " + std::to_string(closed) + " closed quantifier-free conclusions");
  return t;
}

// ---------------------------------------------------------------- 6

// A view of n that logs every position at which a rule is read.
NodePtr logged(const NodePtr& n, Address at, std::shared_ptr<std::size_t> deepest) {
  *deepest = std::max(*deepest, at.size());
  return fixed_node(n->rule(), [n, at, deepest](const PremiseIndex& i) {
    Address next = at;
    next.push_back(i);
    return logged(n->child(i), next, deepest);
  });
}

NodePtr mutate_at(const NodePtr& n, std::size_t depth) {
  if (depth == 0) return leaf(Rule::true_lit(F("(lit \"=\" 7 7)")));
  return fixed_node(n->rule(), [n, depth](const PremiseIndex& i) { return mutate_at(n->child(i), depth - 1); });
}

Tally criterion6() {
  Tally t;
  struct Case {
    std::string name;
    LocalFunction f;
    std::string file;
  };
  std::vector<Case> cs;
  const TheoryId over = TheoryId::no_read(0, 0, 1);
  for (const char* s : {"03_and", "05_forall_em", "10_ind3"}) {
    Embedding e = pmp::test::embed_file(pmp::test::corpus(s));
    cs.push_back({std::string("id ") + s, identity_fn_over(*e.tree.declared().formulas.begin(), e.tree.theory()),
                  pmp::test::corpus(s)});
  }
  cs.push_back({"inverse-forall 05_forall_em", inverse_forall(F("(all x (or (lit \"=\" x x) (not (lit \"=\" x x))))"), 2, over),
                pmp::test::corpus("05_forall_em")});
  {
    Embedding e = pmp::test::embed_file(pmp::test::corpus("14_nested_cuts"));
    const TheoryId& th = e.tree.theory();
    LocalFunction f = lift(reduce(th.r - 1, th.N, th.L), th);
    f.codomain = TheoryId::infinitary(th.N, th.L, th.r - 1);
    cs.push_back({"reduce 14_nested_cuts", f, pmp::test::corpus("14_nested_cuts")});
  }
  for (const auto& c : cs) {
    Embedding e = pmp::test::embed_file(c.file);
    auto deepest = std::make_shared<std::size_t>(0);
    ProofTree in(c.f.domains[0], e.tree.declared(), logged(e.tree.root(), {}, deepest));
    std::string before = render(apply(c.f, {in}), 8);
    ProofTree mutated(c.f.domains[0], e.tree.declared(), mutate_at(e.tree.root(), *deepest + 1));
    std::string after = render(apply(c.f, {mutated}), 8);
    t.expect(before == after, c.name + ": a mutation above depth " + std::to_string(*deepest) + " changed the render");
    // The witness: mutating at the root is visible.
    ProofTree root_mut(c.f.domains[0], e.tree.declared(), mutate_at(e.tree.root(), 0));
    t.expect(render(apply(c.f, {root_mut}), 8) != before, c.name + ": the render ignores its input");
  }
  t.expect(cs.size() >= 5, "fewer than 5 pairs");
  return t;
}

// ---------------------------------------------------------------- 7

std::map<std::string, Sequent> roles_of(CatalogOp op, const std::vector<Sequent>& roots) {
  std::map<std::string, Sequent> m;
  auto names = catalog_roles(op);
  for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = roots.at(i);
  return m;
}

Tally criterion7() {
  Tally t;
  using pmp::test::Poly;
  std::mt19937_64 rng(11);
  std::size_t laws = 0;
  for (int i = 0; i < 300; ++i) {
    Poly a = pmp::test::random_poly(rng), b = pmp::test::random_poly(rng), c = pmp::test::random_poly(rng);
    CnfOrdinal x = a.cnf(), y = b.cnf(), z = c.cnf();
    std::string ctx = x.str() + ", " + y.str() + ", " + z.str();
    t.expect(x + y == (a + b).cnf(), "sum " + ctx);
    t.expect(x * y == (a * b).cnf(), "product " + ctx);
    t.expect(natsum(x, y) == natsum(a, b).cnf(), "natural sum " + ctx);
    t.expect((x < y) == (a < b), "order " + ctx);
    t.expect((x + y) + z == x + (y + z), "associativity " + ctx);
    t.expect(x * (y + z) == x * y + x * z, "left distributivity " + ctx);
    t.expect(natsum(x, y) == natsum(y, x), "commutativity " + ctx);
    laws += 7;
  }
  std::vector<CnfOrdinal> g = default_grid();
  for (const auto& a : g)
    for (const auto& b : g) {
      if (a < b) t.expect(CnfOrdinal::wpow(a) < CnfOrdinal::wpow(b), "w^ monotone at " + a.str());
      ++laws;
    }
  t.expect(laws >= 200, "fewer than 200 law cases");

  // Height-derived bounds over finite embedded trees.
  std::size_t finite = 0;
  for (const auto& file : pmp::test::corpus_files()) {
    Embedding e = pmp::test::embed_file(file);
    std::optional<BoundAssignment> hb;
    try {
      hb = height_bound(e.tree);
    } catch (const OrdinalError&) {
      continue;
    }
    ++finite;
    BoundReport r = check_bound_upto(e.tree, *hb);
    t.expect(r.verdict.pass, stem(file) + " height bound: " + r.verdict.str());
    Verdict d = check_decrease_direct(e.tree, *hb, 8);
    t.expect(d.pass, stem(file) + " height bound, direct: " + d.str());
  }
  t.expect(finite >= 8, "only " + std::to_string(finite) + " finite embeddings");

  // Catalog bounds at k = 8 on the default grid.
  BoundCheckParams p;
  p.fuel = 8;
  p.obs = corpus_obs();
  const TheoryId over = TheoryId::no_read(0, 0, 1);
  {
    LocalFunction f = identity_fn(F("(or (lit \"=\" 0 0) (lit \"=\" 0 1))"), 0, 0);
    BoundReport r = check_bound_upto(f.body, catalog_assignment(CatalogOp::Id, roles_of(CatalogOp::Id, f.roots)), p);
    t.expect(r.verdict.pass && r.comparisons > 0, "id: " + r.verdict.str());
  }
  {
    LocalFunction f = inverse_false_literal(F("(lit \"=\" 0 1)"), over);
    BoundReport r = check_bound_upto(
        f.body, catalog_assignment(CatalogOp::InverseBot, roles_of(CatalogOp::InverseBot, f.roots)), p);
    t.expect(r.verdict.pass && r.comparisons > 0, "inverse-bot: " + r.verdict.str());
  }
  {
    LocalFunction f = elim_disj(F("(lit \"=\" 0 0)"), F("(lit \"=\" 0 1)"), over);
    CatalogInstance ci = cut_catalog(F("(or (lit \"=\" 0 0) (lit \"=\" 0 1))"), f);
    BoundReport r = check_bound_upto(f.body, catalog_assignment(ci.op, ci.roles), p);
    t.expect(ci.op == CatalogOp::ElimOr && r.verdict.pass && r.comparisons > 0, "elim-or: " + r.verdict.str());
  }
  for (std::uint32_t r : {0u, 1u}) {
    LocalFunction f = reduce(r, 0, 0);
    BoundReport rep = check_bound_upto(f.body, reduce_assignment(r, 0, 0), p);
    t.expect(rep.verdict.pass && rep.comparisons > 0, "reduce " + std::to_string(r) + ": " + rep.verdict.str());
  }

  // Corrupted bounds are refuted with a concrete witness.
  {
    Embedding e = pmp::test::embed_file(pmp::test::corpus("14_nested_cuts"));
    BoundAssignment hb = height_bound(e.tree);
    Address spot{rule_premises(e.tree.expand({})).list.at(0)};
    BoundAssignment bad = hb;
    bad.at = [hb, spot](const Address& a) -> std::optional<OrdinalTerm> {
      if (a == spot) return OrdinalTerm::omega();
      return hb.at(a);
    };
    BoundReport r = check_bound_upto(e.tree, bad);
    t.expect(!r.verdict.pass && !r.verdict.failures.empty(), "corrupted height bound accepted");
    if (!r.verdict.failures.empty())
      t.expect(r.verdict.failures[0].at.empty() || r.verdict.failures[0].at == spot,
               "corrupted height bound refuted at " + address_str(r.verdict.failures[0].at));
  }
  {
    // Reads carry no bound; corrupt the first rule node, the copied Rep.
    LocalFunction f = reduce(0, 0, 0);
    BoundAssignment good = reduce_assignment(0, 0, 0);
    Address spot{f.body.expand({}).branch(Rule::rep())};
    BoundAssignment bad = good;
    bad.at = [good, spot](const Address& a) -> std::optional<OrdinalTerm> {
      if (a == spot) return OrdinalTerm::nat(0);
      return good.at(a);
    };
    BoundReport r = check_bound_upto(f.body, bad, p);
    bool named = !r.verdict.failures.empty() &&
                 r.verdict.failures[0].what.find("at " + address_str(spot) + " under") != std::string::npos;
    t.expect(!r.verdict.pass && named,
             "corrupted Reduce bound not refuted below " + address_str(spot) + ": " + r.verdict.str());
  }
  return t;
}

// ---------------------------------------------------------------- 8

Tally criterion8() {
  Tally t;
  RunFlags f;
  f.probes = pmp::test::corpus_dir();
  for (const auto& file : pmp::test::corpus_files()) {
    std::string a = cmd_pipeline(file, f).machine();
    std::string b = cmd_pipeline(file, f).machine();
    t.expect(a == b, stem(file) + ": machine reports differ");
  }
  return t;
}

bool report(int n, const std::string& title, const std::function<Tally()>& run) {
  auto t0 = Clock::now();
  Tally t;
  try {
    t = run();
  } catch (const std::exception& e) {
    t.failures.push_back(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  bool ok = t.failures.empty();
  std::ostringstream os;
  os.precision(3);
  os << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  " << title << " (" << t.cases << " checks, "
     << secs << " s)";
  std::cout << os.str() << "\n";
  for (std::size_t i = 0; i < t.failures.size() && i < 5; ++i) std::cout << "    " << t.failures[i] << "\n";
  return ok;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "containment of operator outputs in their expected sets", criterion1);
  ok &= report(2, "lifting: conservativity and lifted conclusions", criterion2);
  ok &= report(3, "embedding of finitary proofs", criterion3);
  std::vector<Stages> st;
  Tally pre;
  ok &= report(4, "cut elimination and collapsing end to end", [&] {
    st = run_stages(pre);
    return criterion4(st, pre);
  });
  ok &= report(5, "semantic oracle on every stage", [&] { return criterion5(st); });
  ok &= report(6, "continuity of applied functions", criterion6);
  ok &= report(7, "ordinal arithmetic and bounds", criterion7);
  ok &= report(8, "deterministic machine reports", criterion8);
  return ok ? 0 : 1;
}
