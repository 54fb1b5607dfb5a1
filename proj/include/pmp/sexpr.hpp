#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmp/library.hpp"

namespace pmp {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& what, int line, int col)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + what),
        line(line),
        col(col) {}
};

struct Sexp {
  enum class Kind : std::uint8_t { Atom, String, List };
  Kind kind = Kind::List;
  std::string text;
  std::vector<Sexp> items;
  int line = 1, col = 1;

  bool is_atom(std::string_view s) const { return kind == Kind::Atom && text == s; }
  bool is_list() const { return kind == Kind::List; }
  // Head atom of a list, or empty.
  std::string head() const;
  [[noreturn]] void error(const std::string& what) const { throw ParseError(what, line, col); }
};

// Comments run from ';' to end of line.
std::vector<Sexp> read_sexps(std::string_view text);

Term parse_term(const Sexp& s);
Formula parse_formula(const Sexp& s);
SetVar parse_setvar(const Sexp& s);
SetAbstract parse_abstract(const Sexp& s);  // (abs x F)
Deduction parse_deduction(const Sexp& s);

std::string abstract_str(const SetAbstract& a);
std::string deduction_str(const Deduction& d);

struct ProofFile {
  int version = 1;
  std::string name;
  NumMap nums;
  LevelMap levels;
  std::optional<Sequent> conclusion;  // when given, must equal the deduction's
  Deduction proof;
};

ProofFile parse_proof_file(std::string_view text);
ProofFile load_proof_file(const std::string& path);
std::string proof_file_str(const ProofFile& f);

}  // namespace pmp
