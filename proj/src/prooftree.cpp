#include "pmp/prooftree.hpp"

#include <algorithm>
#include <sstream>

namespace pmp {

// ---------------------------------------------------------------- nodes

const Step& Node::step() const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (step_) return *step_;
  }
  Step s = make();
  if (!s.rule.valid()) throw AddressError("generator produced no rule");
  std::lock_guard<std::mutex> lk(mu_);
  if (!step_) step_ = std::move(s);
  return *step_;
}

const Rule& Node::rule() const { return step().rule; }

NodePtr Node::child(const PremiseIndex& i) const {
  const Step& s = step();
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = children_.find(i);
    if (it != children_.end()) return it->second;
  }
  if (!is_premise(s.rule, i))
    throw AddressError("not a premise of " + s.rule.name() + ": " + i.str());
  NodePtr c = s.child(i);
  if (!c) throw AddressError("no subtree at premise " + i.str() + " of " + s.rule.name());
  std::lock_guard<std::mutex> lk(mu_);
  auto [it, fresh] = children_.emplace(i, c);
  return it->second;
}

namespace {

class LazyNode final : public Node {
 public:
  explicit LazyNode(std::function<Step()> f) : f_(std::move(f)) {}

 protected:
  Step make() const override { return f_(); }

 private:
  std::function<Step()> f_;
};

class FixedNode final : public Node {
 public:
  FixedNode(Rule r, ChildFn c) : r_(std::move(r)), c_(std::move(c)) {}

 protected:
  Step make() const override { return {r_, c_}; }

 private:
  Rule r_;
  ChildFn c_;
};

class GeneratorNode final : public Node {
 public:
  GeneratorNode(std::function<Rule(const Address&)> g, Address at)
      : g_(std::make_shared<std::function<Rule(const Address&)>>(std::move(g))),
        at_(std::move(at)) {}
  GeneratorNode(std::shared_ptr<std::function<Rule(const Address&)>> g, Address at)
      : g_(std::move(g)), at_(std::move(at)) {}

 protected:
  Step make() const override {
    Rule r = (*g_)(at_);
    auto g = g_;
    Address at = at_;
    return {r, [g, at](const PremiseIndex& i) -> NodePtr {
              Address next = at;
              next.push_back(i);
              return std::make_shared<GeneratorNode>(g, std::move(next));
            }};
  }

 private:
  std::shared_ptr<std::function<Rule(const Address&)>> g_;
  Address at_;
};

}  // namespace

NodePtr lazy_node(std::function<Step()> make) { return std::make_shared<LazyNode>(std::move(make)); }

NodePtr fixed_node(Rule r, ChildFn child) {
  return std::make_shared<FixedNode>(std::move(r), std::move(child));
}

NodePtr finite_node(Rule r, std::vector<std::pair<PremiseIndex, NodePtr>> children) {
  auto kids = std::make_shared<std::vector<std::pair<PremiseIndex, NodePtr>>>(std::move(children));
  return fixed_node(std::move(r), [kids](const PremiseIndex& i) -> NodePtr {
    for (const auto& [k, n] : *kids)
      if (k == i) return n;
    return nullptr;
  });
}

NodePtr leaf(Rule r) { return finite_node(std::move(r), {}); }

NodePtr generator_node(std::function<Rule(const Address&)> gen, Address at) {
  return std::make_shared<GeneratorNode>(std::move(gen), std::move(at));
}

NodePtr ProofTree::node_at(const Address& sigma) const {
  if (!root_) throw AddressError("empty tree");
  NodePtr n = root_;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    try {
      n = n->child(sigma[i]);
    } catch (const AddressError& e) {
      Address pre(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(i + 1));
      throw AddressError("address " + address_str(pre) + " not in domain: " + e.what());
    }
  }
  return n;
}

// ---------------------------------------------------------------- sampling

namespace {

void intro_rules(const Formula& f, std::vector<Rule>& out) {
  switch (f.kind()) {
    case Kind::Prim:
    case Kind::SetLit: {
      out.push_back(Rule::ax(f));
      if (f.kind() == Kind::Prim) {
        bool closed = std::all_of(f.args().begin(), f.args().end(),
                                  [](const Term& t) { return t.closed(); });
        if (closed && find_relation(f.rel()) && eval_literal(f)) out.push_back(Rule::true_lit(f));
      }
      break;
    }
    case Kind::And:
      out.push_back(Rule::iand(f));
      break;
    case Kind::Or:
      out.push_back(Rule::ior(f, true));
      out.push_back(Rule::ior(f, false));
      break;
    case Kind::All1:
      out.push_back(Rule::omega(f));
      break;
    case Kind::Ex1:
      out.push_back(Rule::iexists1(f, Term::numeral(0)));
      out.push_back(Rule::iexists1(f, Term::numeral(1)));
      break;
    case Kind::All2: {
      Complexity c = comp(f);
      out.push_back(Rule::iforall2(f, SetVar{"_Yp", c.level}));
      break;
    }
    case Kind::Ex2: {
      Complexity c = comp(f);
      out.push_back(Rule::omega_flat(SetVar{"_Yp", c.level}, f));
      break;
    }
  }
}

}  // namespace

namespace {

// Set variables Y of the root with comp_abstracting(root, Y) equal to the
// Read theory's complexity.
std::vector<SetVar> read_variables(const Rule& read) {
  std::vector<SetVar> out;
  auto c = read_complexity(read);
  if (!c) return out;
  for (const auto& rho : read.tag().root)
    for (const auto& v : free_vars(rho).second)
      if (v.level == Level(c->level) && comp_abstracting(rho, v) == *c) out.push_back(v);
  return out;
}

bool generic_in(const Rule& cand, const Sequent& scope, const std::vector<SetVar>& vars) {
  for (const auto& f : conclusion(cand).formulas) {
    if (scope.count(f)) continue;
    for (const auto& v : vars)
      if (occurs_free(f, v)) return false;
  }
  return true;
}

// Whether cand's eigenvariable, if any, is free in the scope.
bool eigen_clash(const Rule& cand, const Sequent& scope) {
  const RuleNode& n = cand.node();
  for (const auto& f : scope) {
    if (n.kind == RuleKind::IForall1 && occurs_free(f, n.y)) return true;
    if ((n.kind == RuleKind::IForall2 || n.kind == RuleKind::OmegaFlat) && occurs_free(f, n.Y)) return true;
  }
  return false;
}

}  // namespace

std::vector<PremiseIndex> sampled_premises(const Rule& r, const Observe& obs) {
  PremiseSpec s = rule_premises(r);
  std::vector<PremiseIndex> out;
  switch (s.kind) {
    case PremiseSpec::Kind::Finite:
      return s.list;
    case PremiseSpec::Kind::Naturals:
      for (auto n : obs.naturals) out.push_back(r.nat(n));
      return out;
    case PremiseSpec::Kind::Rules: {
      std::vector<Rule> cands;
      if (obs.structured) {
        cands.push_back(Rule::rep());
        const Tag& t = r.tag();
        ExtSequent d = delta_of_position(t.pos);
        for (const auto& f : t.root) intro_rules(f, cands);
        for (const auto& f : d.formulas) intro_rules(f, cands);
      }
      for (const auto& p : obs.probes) cands.push_back(p);
      std::vector<Rule> seen;
      std::vector<SetVar> vars;
      if (obs.generic_reads) vars = read_variables(r);
      for (const auto& c : cands) {
        if (out.size() >= obs.max_read_branches) break;
        if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
        seen.push_back(c);
        if (!vars.empty() && !generic_in(c, r.tag().scope, vars)) continue;
        if (obs.fresh_eigenvariables && eigen_clash(c, r.tag().scope)) continue;
        if (theory_contains(s.theory, c)) out.push_back(r.branch(c));
      }
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------- walks

std::string Verdict::str() const {
  std::string s = pass ? "pass" : "fail";
  if (truncated) s += " (truncated)";
  for (const auto& w : failures) s += "\n  " + w.what + " at " + address_str(w.at);
  return s;
}

namespace {

ExtSequent side_of(const ExtSequent& g, const ExtSequent& prem) {
  ExtSequent out;
  for (const auto& f : g.formulas)
    if (!prem.formulas.count(f)) out.formulas.insert(f);
  for (const auto& t : g.tags)
    if (!prem.removes(t)) out.tags.push_back(t);
  for (const auto& fam : g.families) {
    bool dropped = false;
    for (const auto& p : prem.families) dropped |= (p == fam);
    if (!dropped) out.families.push_back(fam);
  }
  return out;
}

struct GammaWalk {
  const Observe& obs;
  Verdict* validity = nullptr;
  std::size_t visits = 0;
  bool truncated = false;
  std::map<std::pair<const Node*, std::uint32_t>, ExtSequent> memo;
  std::vector<NodePtr> keep;
  Address path;

  explicit GammaWalk(const Observe& o) : obs(o) {}

  ExtSequent run(const NodePtr& n, std::uint32_t k) {
    auto key = std::make_pair(n.get(), k);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const Rule& r = n->rule();
    ExtSequent out = conclusion(r);
    if (++visits > obs.budget) {
      truncated = true;
      return out;
    }
    if (k > 0) {
      for (const auto& i : sampled_premises(r, obs)) {
        NodePtr c = n->child(i);
        path.push_back(i);
        ExtSequent g = run(c, k - 1);
        ExtSequent side = side_of(g, premise_sequent(r, i));
        if (validity) check_eigen(r, i, side);
        out.merge(side);
        path.pop_back();
      }
    }
    keep.push_back(n);
    memo.emplace(key, out);
    return out;
  }

  void check_eigen(const Rule& r, const PremiseIndex& i, const ExtSequent& side) {
    FreeVars e = eigenvariables(r, i);
    if (e.first.empty() && e.second.empty()) return;
    for (const auto& f : side.formulas) {
      for (const auto& y : e.first)
        if (occurs_free(f, y)) validity->fail("eigenvariable " + y + " free in " + f.str(), path);
      for (const auto& y : e.second)
        if (occurs_free(f, y))
          validity->fail("eigenvariable " + y.str() + " free in " + f.str(), path);
    }
  }

  // Address of a witness for element `has` surviving to the node's Gamma.
  std::optional<Address> find(const NodePtr& n, std::uint32_t k,
                              const std::function<bool(const ExtSequent&)>& has,
                              const std::function<bool(const ExtSequent&)>& removed) {
    const Rule& r = n->rule();
    if (has(conclusion(r))) return Address{};
    if (k == 0) return std::nullopt;
    for (const auto& i : sampled_premises(r, obs)) {
      NodePtr c = n->child(i);
      auto it = memo.find({c.get(), k - 1});
      if (it == memo.end() || !has(it->second)) continue;
      if (removed(premise_sequent(r, i))) continue;
      if (auto a = find(c, k - 1, has, removed)) {
        a->insert(a->begin(), i);
        return a;
      }
    }
    return std::nullopt;
  }
};

}  // namespace

ExtSequent conclusion_upto(const NodePtr& n, std::uint32_t k, const Observe& obs) {
  GammaWalk w(obs);
  return w.run(n, k);
}

ExtSequent conclusion_upto(const ProofTree& d, const Address& sigma, std::uint32_t k,
                           const Observe& obs) {
  return conclusion_upto(d.node_at(sigma), k, obs);
}

Verdict check_conclusion_within(const NodePtr& n, const ExtSequent& within, std::uint32_t k,
                                const Observe& obs) {
  Verdict v;
  GammaWalk w(obs);
  ExtSequent g;
  try {
    g = w.run(n, k);
  } catch (const AddressError& e) {
    v.fail(e.what(), w.path);
    return v;
  }
  v.truncated = w.truncated;
  for (const auto& f : g.formulas) {
    if (within.formulas.count(f)) continue;
    auto at = w.find(
        n, k, [&](const ExtSequent& s) { return s.formulas.count(f) > 0; },
        [&](const ExtSequent& p) { return p.formulas.count(f) > 0; });
    v.fail(f.str(), at.value_or(Address{}));
  }
  for (const auto& t : g.tags) {
    if (within.covers(t)) continue;
    auto at = w.find(
        n, k, [&](const ExtSequent& s) { return s.contains_tag(t); },
        [&](const ExtSequent& p) { return p.removes(t); });
    v.fail(t.str(), at.value_or(Address{}));
  }
  for (const auto& fam : g.families) {
    bool ok = false;
    for (const auto& h : within.families) ok |= (h == fam);
    if (!ok) v.fail(fam.str(), {});
  }
  return v;
}

Verdict check_conclusion_upto(const ProofTree& d, std::uint32_t k, const Observe& obs) {
  return check_conclusion_within(d.root(), d.declared(), k, obs);
}

Verdict check_valid_upto(const ProofTree& d, std::uint32_t k, const Observe& obs) {
  Verdict v;
  GammaWalk w(obs);
  w.validity = &v;
  try {
    w.run(d.root(), k);
  } catch (const AddressError& e) {
    v.fail(e.what(), w.path);
  }
  v.truncated = w.truncated;
  return v;
}

void walk_prefix(const NodePtr& root, std::uint32_t k, const Observe& obs,
                 const std::function<bool(const Address&, const NodePtr&)>& visit) {
  std::size_t visits = 0;
  Address path;
  std::function<void(const NodePtr&, std::uint32_t)> go = [&](const NodePtr& n, std::uint32_t left) {
    if (++visits > obs.budget) return;
    if (!visit(path, n) || left == 0) return;
    for (const auto& i : sampled_premises(n->rule(), obs)) {
      NodePtr c = n->child(i);
      path.push_back(i);
      go(c, left - 1);
      path.pop_back();
    }
  };
  go(root, k);
}

std::vector<Rule> harvest_rules(const NodePtr& root, std::uint32_t k, const Observe& obs,
                                std::size_t limit) {
  std::vector<Rule> out;
  walk_prefix(root, k, obs, [&](const Address&, const NodePtr& n) {
    const Rule& r = n->rule();
    if (std::find(out.begin(), out.end(), r) == out.end() && out.size() < limit) out.push_back(r);
    return out.size() < limit;
  });
  return out;
}

Verdict check_no_consecutive_reads_upto(const ProofTree& d, std::uint32_t k, const Observe& obs) {
  Verdict v;
  std::size_t visits = 0;
  Address path;
  std::function<void(const NodePtr&, std::uint32_t)> go = [&](const NodePtr& n, std::uint32_t left) {
    if (++visits > obs.budget) {
      v.truncated = true;
      return;
    }
    const Rule& r = n->rule();
    if (left == 0) return;
    for (const auto& i : sampled_premises(r, obs)) {
      NodePtr c = n->child(i);
      path.push_back(i);
      const Rule& cr = c->rule();
      if (r.is_read() && cr.is_read() && r.tag().root == cr.tag().root)
        v.fail("consecutive Reads on " + sequent_str(r.tag().root), path);
      go(c, left - 1);
      path.pop_back();
    }
  };
  try {
    go(d.root(), k);
  } catch (const AddressError& e) {
    v.fail(e.what(), path);
  }
  return v;
}

Verdict check_theory_upto(const ProofTree& d, std::uint32_t k, const Observe& obs) {
  Verdict v;
  try {
    walk_prefix(d.root(), k, obs, [&](const Address& a, const NodePtr& n) {
      if (!theory_contains(d.theory(), n->rule()))
        v.fail("rule outside " + d.theory().str() + ": " + n->rule().name(), a);
      return true;
    });
  } catch (const AddressError& e) {
    v.fail(e.what(), {});
  }
  return v;
}

ProofTree subtree(const ProofTree& d, const Address& sigma, std::optional<ExtSequent> declared,
                  std::uint32_t fuel, const Observe& obs) {
  NodePtr n = d.node_at(sigma);
  ExtSequent decl = declared ? std::move(*declared) : conclusion_upto(n, fuel, obs);
  return ProofTree(d.theory(), std::move(decl), n);
}

// ---------------------------------------------------------------- render

std::string render(const NodePtr& n, std::uint32_t k, const Observe& obs) {
  std::ostringstream os;
  walk_prefix(n, k, obs, [&](const Address& a, const NodePtr& node) {
    const Rule& r = node->rule();
    ExtSequent c = conclusion(r);
    os << std::string(2 * a.size(), ' ') << address_str(a) << " | " << r.name();
    if (r.is_read()) os << " [branches elided]";
    os << " | " << sequent_str(c.formulas) << " |";
    for (const auto& t : c.tags) os << " " << t.str();
    os << "\n";
    return true;
  });
  return os.str();
}

std::string render(const ProofTree& d, std::uint32_t k, const Observe& obs) {
  return render(d.root(), k, obs);
}

}  // namespace pmp
