#include "pmp/sexpr.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pmp {

std::string Sexp::head() const {
  if (kind != Kind::List || items.empty() || items[0].kind != Kind::Atom) return {};
  return items[0].text;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view t) : t_(t) {}

  std::vector<Sexp> all() {
    std::vector<Sexp> out;
    skip();
    while (i_ < t_.size()) {
      out.push_back(one());
      skip();
    }
    return out;
  }

 private:
  void bump() {
    if (t_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }
  void skip() {
    while (i_ < t_.size()) {
      char c = t_[i_];
      if (c == ';') {
        while (i_ < t_.size() && t_[i_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }
  Sexp one() {
    Sexp s;
    s.line = line_;
    s.col = col_;
    char c = t_[i_];
    if (c == '(') {
      bump();
      s.kind = Sexp::Kind::List;
      for (;;) {
        skip();
        if (i_ >= t_.size()) throw ParseError("unterminated list", s.line, s.col);
        if (t_[i_] == ')') {
          bump();
          return s;
        }
        s.items.push_back(one());
      }
    }
    if (c == ')') throw ParseError("unexpected ')'", line_, col_);
    if (c == '"') {
      bump();
      s.kind = Sexp::Kind::String;
      while (i_ < t_.size() && t_[i_] != '"') {
        s.text += t_[i_];
        bump();
      }
      if (i_ >= t_.size()) throw ParseError("unterminated string", s.line, s.col);
      bump();
      return s;
    }
    s.kind = Sexp::Kind::Atom;
    while (i_ < t_.size()) {
      char d = t_[i_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' || d == '"')
        break;
      s.text += d;
      bump();
    }
    return s;
  }

  std::string_view t_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;
};

std::uint32_t parse_nat(const Sexp& s) {
  if (s.kind != Sexp::Kind::Atom) s.error("expected a natural number");
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.text.data(), s.text.data() + s.text.size(), v);
  if (ec != std::errc() || p != s.text.data() + s.text.size()) s.error("expected a natural number, got " + s.text);
  return v;
}

bool is_ident(const std::string& s) {
  if (s.empty()) return false;
  if (std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '-')) return false;
  return true;
}

std::string ident(const Sexp& s, const char* what) {
  if (s.kind != Sexp::Kind::Atom || !is_ident(s.text)) s.error(std::string("expected ") + what);
  return s.text;
}

void arity(const Sexp& s, std::size_t n) {
  if (s.items.size() != n + 1)
    s.error("'" + s.head() + "' takes " + std::to_string(n) + " arguments, got " +
            std::to_string(s.items.size() - 1));
}

Formula literal(const Sexp& s, bool positive) {
  const std::string h = s.head();
  if (h == "lit") {
    if (s.items.size() < 2 || s.items[1].kind != Sexp::Kind::String) s.error("lit needs a relation string");
    const std::string& rel = s.items[1].text;
    const Relation* r = find_relation(rel);
    if (!r) s.items[1].error("unknown relation " + rel);
    std::vector<Term> args;
    for (std::size_t i = 2; i < s.items.size(); ++i) args.push_back(parse_term(s.items[i]));
    if (args.size() != r->arity)
      s.error("relation " + rel + " has arity " + std::to_string(r->arity));
    return Formula::prim(rel, positive, std::move(args));
  }
  if (h == "setlit") {
    arity(s, 2);
    SetVar v = parse_setvar(s.items[1]);
    return Formula::setlit(SetRef{false, 0, v}, positive, parse_term(s.items[2]));
  }
  s.error("expected a literal");
}

}  // namespace

std::vector<Sexp> read_sexps(std::string_view text) { return Reader(text).all(); }

Term parse_term(const Sexp& s) {
  if (s.kind == Sexp::Kind::Atom) {
    if (!s.text.empty() && std::isdigit(static_cast<unsigned char>(s.text[0])))
      return Term::numeral(parse_nat(s));
    return Term::var(ident(s, "a term"));
  }
  const std::string h = s.head();
  if (h == "num") {
    arity(s, 1);
    return Term::numeral(parse_nat(s.items[1]));
  }
  if (h == "s") {
    arity(s, 1);
    return parse_term(s.items[1]).successor();
  }
  s.error("expected a term");
}

SetVar parse_setvar(const Sexp& s) {
  if (s.kind != Sexp::Kind::Atom) s.error("expected a set variable");
  auto caret = s.text.find('^');
  if (caret == std::string::npos) return SetVar{ident(s, "a set variable"), std::nullopt};
  Sexp name = s;
  name.text = s.text.substr(0, caret);
  Sexp lvl = s;
  lvl.text = s.text.substr(caret + 1);
  return SetVar{ident(name, "a set variable"), parse_nat(lvl)};
}

Formula parse_formula(const Sexp& s) {
  if (!s.is_list() || s.items.empty()) s.error("expected a formula");
  const std::string h = s.head();
  if (h == "lit" || h == "setlit") return literal(s, true);
  if (h == "not") {
    arity(s, 1);
    return literal(s.items[1], false);
  }
  if (h == "and" || h == "or") {
    arity(s, 2);
    Formula a = parse_formula(s.items[1]), b = parse_formula(s.items[2]);
    return h == "and" ? Formula::conj(a, b) : Formula::disj(a, b);
  }
  if (h == "all" || h == "ex") {
    arity(s, 2);
    std::string x = ident(s.items[1], "a bound variable");
    Formula body = parse_formula(s.items[2]);
    return h == "all" ? Formula::all1(x, body) : Formula::ex1(x, body);
  }
  if (h == "all2" || h == "ex2") {
    arity(s, 2);
    SetVar x = parse_setvar(s.items[1]);
    if (x.level) s.items[1].error("quantified set variables are unleveled");
    Formula body = parse_formula(s.items[2]);
    return h == "all2" ? Formula::all2(x, body) : Formula::ex2(x, body);
  }
  s.error("unknown formula constructor '" + h + "'");
}

SetAbstract parse_abstract(const Sexp& s) {
  if (s.head() != "abs") s.error("expected (abs x formula)");
  arity(s, 2);
  return SetAbstract::from(ident(s.items[1], "a hole variable"), parse_formula(s.items[2]));
}

std::string abstract_str(const SetAbstract& a) {
  return "(abs _h " + instantiate1(a.body, Term::var("_h")).str() + ")";
}

Deduction parse_deduction(const Sexp& s) {
  if (!s.is_list() || s.items.empty()) s.error("expected a deduction");
  const std::string h = s.head();
  auto sub = [&](std::size_t i) { return parse_deduction(s.items[i]); };
  auto f = [&](std::size_t i) { return parse_formula(s.items[i]); };
  Deduction d;
  try {
    if (h == "true") {
      arity(s, 1);
      d.rule = Rule::true_lit(f(1));
    } else if (h == "ax") {
      arity(s, 1);
      Formula l = f(1);
      if (!l.is_literal()) s.items[1].error("ax needs a literal");
      d.rule = Rule::ax(l);
    } else if (h == "iand") {
      arity(s, 3);
      d.rule = Rule::iand(f(1));
      d.premises = {sub(2), sub(3)};
    } else if (h == "ior-l" || h == "ior-r") {
      arity(s, 2);
      d.rule = Rule::ior(f(1), h == "ior-l");
      d.premises = {sub(2)};
    } else if (h == "iforall") {
      arity(s, 3);
      d.rule = Rule::iforall1(f(1), ident(s.items[2], "an eigenvariable"));
      d.premises = {sub(3)};
    } else if (h == "iexists") {
      arity(s, 3);
      d.rule = Rule::iexists1(f(1), parse_term(s.items[2]));
      d.premises = {sub(3)};
    } else if (h == "iforall2") {
      arity(s, 3);
      d.rule = Rule::iforall2(f(1), parse_setvar(s.items[2]));
      d.premises = {sub(3)};
    } else if (h == "iexists2") {
      arity(s, 3);
      d.rule = Rule::iexists2(f(1), parse_abstract(s.items[2]));
      d.premises = {sub(3)};
    } else if (h == "ind") {
      arity(s, 2);
      d.rule = Rule::ind(parse_abstract(s.items[1]).body, parse_term(s.items[2]));
    } else if (h == "cut") {
      arity(s, 3);
      d.rule = Rule::cut(f(1));
      d.premises = {sub(2), sub(3)};
    } else {
      s.error("unknown rule '" + h + "'");
    }
  } catch (const SyntaxError& e) {
    s.error(e.what());
  }
  return d;
}

std::string deduction_str(const Deduction& d) {
  const RuleNode& n = d.rule.node();
  std::ostringstream os;
  auto kids = [&] {
    for (const auto& p : d.premises) os << ' ' << deduction_str(p);
  };
  switch (n.kind) {
    case RuleKind::True: os << "(true " << n.f.str(); break;
    case RuleKind::Ax: os << "(ax " << n.f.str(); break;
    case RuleKind::IAnd: os << "(iand " << n.f.str(); break;
    case RuleKind::IOrL: os << "(ior-l " << n.f.str(); break;
    case RuleKind::IOrR: os << "(ior-r " << n.f.str(); break;
    case RuleKind::IForall1: os << "(iforall " << n.f.str() << ' ' << n.y; break;
    case RuleKind::IExists1: os << "(iexists " << n.f.str() << ' ' << term_str(n.t, 0); break;
    case RuleKind::IForall2: os << "(iforall2 " << n.f.str() << ' ' << n.Y.str(); break;
    case RuleKind::IExists2Fin: os << "(iexists2 " << n.f.str() << ' ' << abstract_str(n.psi); break;
    case RuleKind::Ind: os << "(ind " << abstract_str(SetAbstract{n.f}) << ' ' << term_str(n.t, 0); break;
    case RuleKind::Cut: os << "(cut " << n.f.str(); break;
    default: throw std::invalid_argument("not a finitary rule: " + d.rule.name());
  }
  kids();
  os << ')';
  return os.str();
}

ProofFile parse_proof_file(std::string_view text) {
  std::vector<Sexp> forms = read_sexps(text);
  if (forms.empty() || forms[0].head() != "pmp-proof") throw ParseError("missing (pmp-proof 1) header", 1, 1);
  ProofFile pf;
  arity(forms[0], 1);
  pf.version = static_cast<int>(parse_nat(forms[0].items[1]));
  if (pf.version != 1) forms[0].items[1].error("unsupported format version");
  bool have_proof = false;
  for (std::size_t k = 1; k < forms.size(); ++k) {
    const Sexp& s = forms[k];
    const std::string h = s.head();
    if (h == "name") {
      arity(s, 1);
      pf.name = s.items[1].text;
    } else if (h == "nums") {
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        const Sexp& e = s.items[i];
        if (!e.is_list() || e.items.size() != 2) e.error("expected (var numeral)");
        pf.nums[ident(e.items[0], "a variable")] = parse_nat(e.items[1]);
      }
    } else if (h == "levels") {
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        const Sexp& e = s.items[i];
        if (!e.is_list() || e.items.size() != 2) e.error("expected (setvar level)");
        pf.levels[ident(e.items[0], "a set variable")] = parse_nat(e.items[1]);
      }
    } else if (h == "conclusion") {
      Sequent c;
      for (std::size_t i = 1; i < s.items.size(); ++i) c.insert(parse_formula(s.items[i]));
      pf.conclusion = c;
    } else if (h == "proof") {
      arity(s, 1);
      pf.proof = parse_deduction(s.items[1]);
      have_proof = true;
    } else {
      s.error("unknown section '" + h + "'");
    }
  }
  if (!have_proof) throw ParseError("missing (proof ...) section", 1, 1);
  return pf;
}

ProofFile load_proof_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_proof_file(ss.str());
}

std::string proof_file_str(const ProofFile& f) {
  std::ostringstream os;
  os << "(pmp-proof " << f.version << ")\n";
  if (!f.name.empty()) os << "(name \"" << f.name << "\")\n";
  if (!f.nums.empty()) {
    os << "(nums";
    for (const auto& [k, v] : f.nums) os << " (" << k << ' ' << v << ')';
    os << ")\n";
  }
  if (!f.levels.empty()) {
    os << "(levels";
    for (const auto& [k, v] : f.levels) os << " (" << k << ' ' << v << ')';
    os << ")\n";
  }
  if (f.conclusion) {
    os << "(conclusion";
    for (const auto& g : *f.conclusion) os << ' ' << g.str();
    os << ")\n";
  }
  os << "(proof " << deduction_str(f.proof) << ")\n";
  return os.str();
}

}  // namespace pmp
