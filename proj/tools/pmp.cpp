#include <iostream>

#include <CLI11.hpp>

#include "pmp/cli.hpp"
#include "pmp/ordinals.hpp"
#include "pmp/sexpr.hpp"

namespace {

struct Options {
  pmp::RunFlags flags;
  std::string file;
  std::string format = "text";
  std::string op;
};

void common(CLI::App* sub, Options& o) {
  sub->add_option("file", o.file, "proof file (pmp-proof 1)")->required();
  sub->add_option("--fuel", o.flags.fuel, "prefix depth of every check");
  sub->add_option("--probes", o.flags.probes, "proof file or directory to harvest probe rules from");
  sub->add_option("--depth", o.flags.depth, "render depth");
  sub->add_option("--samples", o.flags.samples, "assignment samples per bound comparison");
  sub->add_option("--seed", o.flags.seed, "sampling seed");
  sub->add_option("--branches", o.flags.branches, "sampled branches per Read");
  sub->add_flag("--skip-collapse", o.flags.skip_collapse, "stop the pipeline before collapsing");
  sub->add_flag("--timings", o.flags.timings, "include timings in machine reports");
  sub->add_option("--format", o.format, "text or machine")->check(CLI::IsMember({"text", "machine"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinitary proof trees for second-order arithmetic: checks, cut elimination, collapsing, bounds"};
  app.require_subcommand(1);
  Options o;
  auto* check = app.add_subcommand("check", "validate a finitary proof");
  auto* pipeline = app.add_subcommand("pipeline", "embed, eliminate cuts, collapse, and check prefixes");
  auto* show = app.add_subcommand("show", "render a stage prefix");
  auto* bounds = app.add_subcommand("bounds", "check ordinal bounds");
  auto* embed = app.add_subcommand("embed", "embed and check");
  auto* eliminate = app.add_subcommand("eliminate", "eliminate all cuts and check");
  auto* reduce = app.add_subcommand("reduce", "apply one Reduce and check");
  auto* collapse = app.add_subcommand("collapse", "eliminate cuts, collapse, and check");
  for (auto* sub : {check, pipeline, show, bounds, embed, eliminate, reduce, collapse}) common(sub, o);
  show->add_option("--stage", o.flags.stage, "deduction, embed, eliminate or collapse");
  bounds->add_option("--bound", o.flags.bound, "closed uniform bound term, e.g. \"(plus w 1)\"");
  bounds->add_option("--catalog", o.flags.catalog, "catalog instance: id, cut or reduce");
  bounds->add_option("--rank", o.flags.rank, "Reduce rank");
  reduce->add_option("--rank", o.flags.rank, "rank of the cuts removed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    pmp::RunReport r;
    if (check->parsed()) r = pmp::cmd_check(o.file, o.flags);
    else if (pipeline->parsed()) r = pmp::cmd_pipeline(o.file, o.flags);
    else if (show->parsed()) r = pmp::cmd_show(o.file, o.flags);
    else if (bounds->parsed()) r = pmp::cmd_bounds(o.file, o.flags);
    else r = pmp::cmd_operator(app.get_subcommands().front()->get_name(), o.file, o.flags);
    std::cout << (o.format == "machine" ? r.machine() : r.text());
    return r.exit_code();
  } catch (const pmp::ParseError& e) {
    std::cerr << o.file << ":" << e.what() << "\n";
  } catch (const pmp::UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
  } catch (const pmp::OrdinalError& e) {
    std::cerr << "bound term: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
