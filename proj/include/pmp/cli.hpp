#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmp/prooftree.hpp"

namespace pmp {

// Bad flags or arguments; exit code 2.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunFlags {
  std::uint32_t fuel = 10;              // prefix depth of every check
  std::optional<std::string> probes;    // proof file or directory; default: the inputs
  std::uint32_t depth = 4;              // render depth
  std::size_t samples = 3;
  std::uint64_t seed = 1;
  std::size_t branches = 4;             // sampled branches per Read
  bool skip_collapse = false;
  bool timings = false;                 // wall-clock timings in machine reports
  std::string stage = "embed";          // show, bounds
  std::optional<std::string> bound;     // bounds: a closed uniform bound term
  std::optional<std::string> catalog;   // bounds: id, cut or reduce
  std::optional<std::uint32_t> rank;    // reduce: the rank removed
};

struct CheckResult {
  std::string name;
  Verdict verdict;
};

struct StageReport {
  std::string name;
  std::string status = "pass";  // pass, fail, error, skipped
  std::string theory, conclusion;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  std::optional<std::string> error;
  double seconds = 0;
};

struct RunReport {
  std::string command;
  std::vector<std::string> inputs;
  RunFlags flags;
  std::size_t probe_count = 0;
  std::vector<StageReport> stages;
  std::vector<std::string> warnings;
  std::string output;  // rendered prefix (show)

  bool pass() const;
  // 0 when every stage passes or is skipped, 1 otherwise.
  int exit_code() const;
  std::string text() const;
  // Deterministic JSON; timings only with flags.timings.
  std::string machine() const;
};

// Each throws UsageError on bad arguments and ParseError on unreadable files.
RunReport cmd_check(const std::string& file, const RunFlags& flags);
// embed, eliminate_all_cuts, collapse_all, each followed by prefix checks.
RunReport cmd_pipeline(const std::string& file, const RunFlags& flags);
// flags.stage: deduction, embed, eliminate or collapse.
RunReport cmd_show(const std::string& file, const RunFlags& flags);
RunReport cmd_bounds(const std::string& file, const RunFlags& flags);
// Single operators with their checks: embed, eliminate, reduce, collapse.
RunReport cmd_operator(const std::string& op, const std::string& file, const RunFlags& flags);

}  // namespace pmp
