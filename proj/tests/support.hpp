#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "pmp/sexpr.hpp"

namespace pmp::test {

inline Formula F(const std::string& s) { return parse_formula(read_sexps(s).at(0)); }
inline Deduction D(const std::string& s) { return parse_deduction(read_sexps(s).at(0)); }
inline Sequent S(std::initializer_list<const char*> fs) {
  Sequent s;
  for (const char* f : fs) s.insert(F(f));
  return s;
}

inline std::string corpus_dir() { return PMP_CORPUS_DIR; }

inline std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir()))
    if (e.path().extension() == ".pmp") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string corpus(const std::string& stem) { return corpus_dir() + "/" + stem + ".pmp"; }

inline Embedding embed_file(const std::string& path) {
  ProofFile pf = load_proof_file(path);
  return embed(pf.proof, pf.nums, pf.levels);
}

// Distinct rules of the depth-6 prefixes of the embedded corpus.
inline std::vector<Rule> corpus_probes(const std::vector<std::string>& stems = {}) {
  std::vector<Rule> out;
  std::set<std::string> seen;
  for (const auto& p : corpus_files()) {
    if (!stems.empty()) {
      std::string stem = std::filesystem::path(p).stem().string();
      if (std::find(stems.begin(), stems.end(), stem) == stems.end()) continue;
    }
    for (const auto& r : harvest_rules(embed_file(p).tree.root(), 6))
      if (seen.insert(r.str()).second) out.push_back(r);
  }
  return out;
}

inline bool quantifier_free(const Formula& f) {
  if (f.is_literal()) return true;
  if (f.kind() == Kind::And || f.kind() == Kind::Or) return quantifier_free(f.lhs()) && quantifier_free(f.rhs());
  return false;
}

// Truth of a closed quantifier-free sequent; nullopt when a formula is not such.
inline std::optional<bool> sequent_truth(const Sequent& s) {
  bool any = false;
  for (const auto& f : s) {
    if (!quantifier_free(f) || !closed_first_order(f)) return std::nullopt;
    auto v = eval_bounded(f, 0);
    if (!v) return std::nullopt;
    any = any || *v;
  }
  return any;
}

// A scratch file removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& text) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("pmp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".pmp"))
                .string();
    std::ofstream(path_) << text;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Whether every formula and tag of `a` occurs in `b`.
inline bool within(const ExtSequent& a, const ExtSequent& b) {
  for (const auto& f : a.formulas)
    if (!b.formulas.count(f)) return false;
  for (const auto& t : a.tags)
    if (!b.covers(t)) return false;
  return true;
}

}  // namespace pmp::test
