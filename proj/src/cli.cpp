#include "pmp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pmp/collapse.hpp"
#include "pmp/cutelim.hpp"
#include "pmp/ordinals.hpp"
#include "pmp/sexpr.hpp"

namespace pmp {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool quantifier_free(const Formula& f) {
  if (f.is_literal()) return true;
  if (f.kind() == Kind::And || f.kind() == Kind::Or) return quantifier_free(f.lhs()) && quantifier_free(f.rhs());
  return false;
}

// Closed quantifier-free formulas evaluate exactly; nullopt when some formula is not such.
std::optional<bool> sequent_truth(const Sequent& s) {
  bool any = false;
  for (const auto& f : s) {
    if (!closed_first_order(f) || !quantifier_free(f)) return std::nullopt;
    auto v = eval_bounded(f, 0);
    if (!v) return std::nullopt;
    any = any || *v;
  }
  return any;
}

Verdict rules_within(const ProofTree& d, std::uint32_t k, const Observe& obs, const std::set<RuleKind>& allowed,
                     const std::string& what) {
  Verdict v;
  walk_prefix(d.root(), k, obs, [&](const Address& a, const NodePtr& n) {
    if (!allowed.count(n->rule().kind())) v.fail(what + ": " + n->rule().name(), a);
    return v.failures.size() < 8;
  });
  return v;
}

Verdict cut_free(const ProofTree& d, std::uint32_t k, const Observe& obs) {
  Verdict v;
  walk_prefix(d.root(), k, obs, [&](const Address& a, const NodePtr& n) {
    if (n->rule().kind() == RuleKind::Cut) v.fail("cut of rank " + std::to_string(rank(n->rule().node().f)), a);
    return v.failures.size() < 8;
  });
  return v;
}

std::vector<std::string> proof_files(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(path)) return {path};
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(path))
    if (e.path().extension() == ".pmp") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Rule> harvest_probes(const std::vector<std::string>& files) {
  std::vector<Rule> out;
  std::set<std::string> seen;
  for (const auto& p : files) {
    ProofFile pf = load_proof_file(p);
    Embedding e = embed(pf.proof, pf.nums, pf.levels);
    for (const auto& r : harvest_rules(e.tree.root(), 6))
      if (seen.insert(r.str()).second) out.push_back(r);
  }
  return out;
}

struct Session {
  RunReport report;
  Observe obs;
  ProofFile pf;

  Session(std::string command, const std::string& file, const RunFlags& flags) {
    report.command = std::move(command);
    report.inputs = {file};
    report.flags = flags;
    if (flags.fuel == 0) report.warnings.push_back("fuel 0: every prefix check is vacuous");
    pf = load_proof_file(file);
    obs.max_read_branches = flags.branches;
  }

  // Probe harvesting embeds, so it waits until the input is known to embed.
  void load_probes(const std::string& file) {
    obs.probes = harvest_probes(proof_files(report.flags.probes ? *report.flags.probes : file));
    report.probe_count = obs.probes.size();
  }

  StageReport& stage(std::string name) {
    report.stages.push_back(StageReport{});
    report.stages.back().name = std::move(name);
    return report.stages.back();
  }

  void add(StageReport& s, std::string name, Verdict v) {
    if (!v.pass) s.status = "fail";
    s.checks.push_back({std::move(name), std::move(v)});
  }

  void tree_checks(StageReport& s, const ProofTree& d, const Sequent& concl) {
    std::uint32_t k = report.flags.fuel;
    s.theory = d.theory().str();
    s.conclusion = d.declared().str();
    add(s, "conclusion", check_conclusion_upto(d, k, obs));
    add(s, "valid", check_valid_upto(d, k, obs));
    add(s, "theory", check_theory_upto(d, k, obs));
    Verdict same;
    if (d.declared().formulas != concl) same.fail("declared " + sequent_str(d.declared().formulas), {});
    add(s, "conclusion-preserved", same);
    if (auto t = sequent_truth(d.declared().formulas)) {
      Verdict sem;
      if (!*t) sem.fail("declared conclusion is false", {});
      add(s, "semantic", sem);
    }
  }

  void fail_stage(StageReport& s, const std::exception& e) {
    s.status = "error";
    s.error = e.what();
  }

  void skip(const std::string& name, const std::string& why) {
    StageReport& s = stage(name);
    s.status = "skipped";
    s.notes.push_back(why);
  }
};

template <class F>
bool run_stage(Session& ss, const std::string& name, F&& body) {
  StageReport& s = ss.stage(name);
  auto t0 = Clock::now();
  try {
    body(s);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    ss.fail_stage(s, e);
  }
  s.seconds = since(t0);
  return s.status == "pass";
}

const std::set<RuleKind>& collapse_rules() {
  static const std::set<RuleKind> s{RuleKind::True, RuleKind::Ax,    RuleKind::IAnd, RuleKind::IOrL,
                                    RuleKind::IOrR, RuleKind::IExists1, RuleKind::Omega, RuleKind::Rep};
  return s;
}

// The stages of the pipeline that `last` needs; false when one of them fails.
struct Pipeline {
  Session& ss;
  Sequent concl;
  std::optional<Embedding> e;
  std::optional<ProofTree> elim, col;

  bool deduction() {
    return run_stage(ss, "deduction", [&](StageReport& s) {
      DeductionReport r = check_deduction(ss.pf.proof);
      ss.add(s, "valid", r.verdict);
      concl = r.conclusion;
      s.theory = TheoryId::pa2().str();
      s.conclusion = sequent_str(r.conclusion);
      Verdict m;
      if (ss.pf.conclusion && *ss.pf.conclusion != r.conclusion)
        m.fail("file states " + sequent_str(*ss.pf.conclusion), {});
      ss.add(s, "stated-conclusion", m);
    });
  }

  bool embedding(const std::string& file) {
    return run_stage(ss, "embed", [&](StageReport& s) {
      e = embed(ss.pf.proof, ss.pf.nums, ss.pf.levels);
      ss.load_probes(file);
      std::ostringstream os;
      os << "N=" << e->params.N << " L=" << e->params.L << " r=" << e->params.r;
      s.notes.push_back(os.str());
      // Embedding instantiates numeric and level parameters; later stages keep its declaration.
      concl = e->tree.declared().formulas;
      ss.tree_checks(s, e->tree, concl);
    });
  }

  bool eliminate() {
    return run_stage(ss, "eliminate", [&](StageReport& s) {
      elim = eliminate_all_cuts(e->tree);
      ss.tree_checks(s, *elim, concl);
      ss.add(s, "cut-free", cut_free(*elim, ss.report.flags.fuel, ss.obs));
    });
  }

  bool collapse() {
    return run_stage(ss, "collapse", [&](StageReport& s) {
      Verdict pre = check_collapse_pre(elim->declared(), Complexity{0, 0});
      if (!pre.pass) {
        ss.add(s, "precondition", pre);
        return;
      }
      col = collapse_all(*elim);
      ss.tree_checks(s, *col, concl);
      ss.add(s, "allowed-rules", rules_within(*col, ss.report.flags.fuel, ss.obs, collapse_rules(), "rule"));
    });
  }

  bool upto(const std::string& last, const std::string& file) {
    if (!deduction()) return false;
    if (last == "deduction") return true;
    if (!embedding(file)) return false;
    if (last == "embed") return true;
    if (!eliminate()) return false;
    if (last == "eliminate") return true;
    return collapse();
  }
};

void skip_after(Session& ss, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    bool present = std::any_of(ss.report.stages.begin(), ss.report.stages.end(),
                               [&](const StageReport& s) { return s.name == n; });
    if (!present) ss.skip(n, "an earlier stage did not pass");
  }
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> v{"deduction", "embed", "eliminate", "collapse"};
  return v;
}

void require_stage(const std::string& s) {
  if (std::find(stage_names().begin(), stage_names().end(), s) == stage_names().end())
    throw UsageError("unknown stage '" + s + "' (deduction, embed, eliminate, collapse)");
}

nlohmann::json verdict_json(const Verdict& v) {
  nlohmann::json j;
  j["pass"] = v.pass;
  j["truncated"] = v.truncated;
  j["failures"] = nlohmann::json::array();
  for (const auto& w : v.failures) j["failures"].push_back({{"what", w.what}, {"at", address_str(w.at)}});
  return j;
}

std::optional<Formula> first_cut(const Deduction& d) {
  if (d.rule.kind() == RuleKind::Cut) return d.rule.node().f;
  for (const auto& p : d.premises)
    if (auto f = first_cut(p)) return f;
  return std::nullopt;
}

}  // namespace

bool RunReport::pass() const {
  return std::all_of(stages.begin(), stages.end(),
                     [](const StageReport& s) { return s.status == "pass" || s.status == "skipped"; });
}

int RunReport::exit_code() const { return pass() ? 0 : 1; }

std::string RunReport::text() const {
  std::ostringstream os;
  os << command;
  for (const auto& i : inputs) os << " " << i;
  os << "\nparameters: fuel=" << flags.fuel << " depth=" << flags.depth << " samples=" << flags.samples
     << " seed=" << flags.seed << " branches=" << flags.branches
     << " probes=" << (flags.probes ? *flags.probes : std::string("harvested from input")) << " (" << probe_count
     << " rules)\n";
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  for (const auto& s : stages) {
    os << "[" << s.status << "] " << s.name;
    if (!s.theory.empty()) os << " " << s.theory;
    os << " (" << s.seconds << " s)\n";
    if (!s.conclusion.empty()) os << "  declared " << s.conclusion << "\n";
    for (const auto& n : s.notes) os << "  " << n << "\n";
    if (s.error) os << "  error: " << *s.error << "\n";
    for (const auto& c : s.checks) os << "  " << c.name << ": " << c.verdict.str() << "\n";
  }
  os << output;
  os << (pass() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string RunReport::machine() const {
  nlohmann::json j;
  j["format"] = "pmp-report 1";
  j["command"] = command;
  j["inputs"] = inputs;
  j["parameters"] = {{"fuel", flags.fuel},
                     {"depth", flags.depth},
                     {"samples", flags.samples},
                     {"seed", flags.seed},
                     {"branches", flags.branches},
                     {"probes", flags.probes ? *flags.probes : std::string("input")},
                     {"probe_count", probe_count},
                     {"skip_collapse", flags.skip_collapse}};
  if (flags.bound) j["parameters"]["bound"] = *flags.bound;
  if (flags.catalog) j["parameters"]["catalog"] = *flags.catalog;
  if (flags.rank) j["parameters"]["rank"] = *flags.rank;
  j["warnings"] = warnings;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : stages) {
    nlohmann::json js{{"name", s.name}, {"status", s.status}, {"theory", s.theory}, {"declared", s.conclusion},
                      {"notes", s.notes}};
    if (s.error) js["error"] = *s.error;
    if (flags.timings) js["seconds"] = s.seconds;
    js["checks"] = nlohmann::json::array();
    for (const auto& c : s.checks) js["checks"].push_back({{"name", c.name}, {"verdict", verdict_json(c.verdict)}});
    j["stages"].push_back(std::move(js));
  }
  if (!output.empty()) j["output"] = output;
  j["pass"] = pass();
  j["exit_code"] = exit_code();
  return j.dump(2) + "\n";
}

RunReport cmd_check(const std::string& file, const RunFlags& flags) {
  Session ss("check", file, flags);
  Pipeline p{ss, {}, {}, {}, {}};
  p.deduction();
  return ss.report;
}

RunReport cmd_pipeline(const std::string& file, const RunFlags& flags) {
  Session ss("pipeline", file, flags);
  Pipeline p{ss, {}, {}, {}, {}};
  if (p.upto("eliminate", file)) {
    if (flags.skip_collapse) ss.skip("collapse", "--skip-collapse");
    else p.collapse();
  }
  skip_after(ss, stage_names());
  return ss.report;
}

RunReport cmd_show(const std::string& file, const RunFlags& flags) {
  require_stage(flags.stage);
  Session ss("show", file, flags);
  Pipeline p{ss, {}, {}, {}, {}};
  if (!p.upto(flags.stage, file)) return ss.report;
  if (flags.stage == "deduction") {
    ss.report.output = render(deduction_tree(ss.pf.proof), flags.depth, ss.obs);
    return ss.report;
  }
  const ProofTree& d = flags.stage == "embed" ? p.e->tree : flags.stage == "eliminate" ? *p.elim : *p.col;
  if (flags.stage == "collapse" && !p.col) return ss.report;
  ss.report.output = render(d, flags.depth, ss.obs);
  return ss.report;
}

RunReport cmd_bounds(const std::string& file, const RunFlags& flags) {
  if (flags.bound && flags.catalog) throw UsageError("--bound and --catalog are exclusive");
  std::optional<OrdinalTerm> term;
  if (flags.bound) {
    try {
      term = parse_ordinal_term(*flags.bound);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--bound: ") + e.what());
    }
  }
  if (flags.catalog && *flags.catalog != "id" && *flags.catalog != "cut" && *flags.catalog != "reduce")
    throw UsageError("unknown catalog instance '" + *flags.catalog + "' (id, cut, reduce)");
  Session ss("bounds", file, flags);
  Pipeline p{ss, {}, {}, {}, {}};
  if (!p.upto("embed", file)) return ss.report;
  BoundCheckParams bp;
  bp.fuel = flags.fuel;
  bp.samples = flags.samples;
  bp.seed = flags.seed;
  bp.obs = ss.obs;
  auto report_bound = [&](StageReport& s, const ProofTree& d, const BoundAssignment& o, bool direct) {
    BoundReport r = check_bound_upto(d, o, bp);
    s.theory = d.theory().str();
    s.notes.push_back("nodes=" + std::to_string(r.nodes) + " pairs=" + std::to_string(r.pairs) +
                      " comparisons=" + std::to_string(r.comparisons));
    if (auto root = o.at({})) s.notes.push_back("bound at root " + root->str());
    ss.add(s, "bound", r.verdict);
    if (direct) ss.add(s, "bound-direct", check_decrease_direct(d, o, flags.fuel, ss.obs));
  };
  if (!flags.catalog) {
    run_stage(ss, "bounds", [&](StageReport& s) {
      const ProofTree& d = p.e->tree;
      if (term) {
        s.notes.push_back("uniform bound " + term->str());
        report_bound(s, d, uniform_bound(*term), true);
        return;
      }
      report_bound(s, d, height_bound(d, flags.fuel, ss.obs), true);
    });
    return ss.report;
  }
  run_stage(ss, "bounds-" + *flags.catalog, [&](StageReport& s) {
    const EmbedParams& ep = p.e->params;
    if (*flags.catalog == "id") {
      if (p.concl.empty()) throw UsageError("--catalog id: empty conclusion");
      Formula phi = *p.concl.begin();
      LocalFunction f = identity_fn(phi, ep.N, ep.L);
      s.notes.push_back("id on " + phi.str());
      report_bound(s, f.body, catalog_assignment(CatalogOp::Id, {{"b", f.roots[0]}}), false);
      return;
    }
    if (*flags.catalog == "reduce") {
      std::uint32_t r = flags.rank ? *flags.rank : (ep.r > 0 ? ep.r - 1 : 0);
      LocalFunction f = reduce(r, ep.N, ep.L);
      s.notes.push_back("reduce at rank " + std::to_string(r));
      report_bound(s, f.body, reduce_assignment(r, ep.N, ep.L), false);
      return;
    }
    auto cut = first_cut(ss.pf.proof);
    if (!cut) throw UsageError("--catalog cut: the proof has no cut");
    CutDispatch dc = dispatch_cut(*cut, TheoryId::no_read(ep.N, ep.L, rank(*cut)));
    CatalogInstance ci = cut_catalog(*cut, dc.op);
    s.notes.push_back(catalog_name(ci.op) + " for the cut on " + cut->str());
    report_bound(s, dc.op.body, catalog_assignment(ci.op, ci.roles), false);
  });
  return ss.report;
}

RunReport cmd_operator(const std::string& op, const std::string& file, const RunFlags& flags) {
  if (op != "embed" && op != "eliminate" && op != "reduce" && op != "collapse")
    throw UsageError("unknown operator '" + op + "'");
  Session ss(op, file, flags);
  Pipeline p{ss, {}, {}, {}, {}};
  if (op == "embed" || op == "eliminate" || op == "collapse") {
    p.upto(op, file);
    return ss.report;
  }
  if (!p.upto("embed", file)) return ss.report;
  run_stage(ss, "reduce", [&](StageReport& s) {
    const TheoryId& t = p.e->tree.theory();
    std::uint32_t r = flags.rank ? *flags.rank : (t.r > 0 ? t.r - 1 : 0);
    if (r + 1 > t.r) throw UsageError("reduce: rank " + std::to_string(r) + " needs cuts below rank " +
                                      std::to_string(r + 1) + ", input has " + std::to_string(t.r));
    LocalFunction f = lift(reduce(r, t.N, t.L), t);
    f.codomain = TheoryId::infinitary(t.N, t.L, r);
    ProofTree out = apply(f, {p.e->tree});
    s.notes.push_back("rank " + std::to_string(r));
    ss.tree_checks(s, out, p.concl);
    Verdict v;
    walk_prefix(out.root(), flags.fuel, ss.obs, [&](const Address& a, const NodePtr& n) {
      const Rule& rr = n->rule();
      if (rr.kind() == RuleKind::Cut && rank(rr.node().f) >= r) v.fail("cut of rank " + std::to_string(rank(rr.node().f)), a);
      return v.failures.size() < 8;
    });
    ss.add(s, "rank-below", v);
  });
  return ss.report;
}

}  // namespace pmp
