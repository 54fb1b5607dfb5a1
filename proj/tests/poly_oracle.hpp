#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "pmp/ordinals.hpp"

namespace pmp::test {

// Ordinals below w^w as coefficient vectors: c[k] is the coefficient of w^k.
// Written against the textbook definitions, independent of CnfOrdinal.
struct Poly {
  std::vector<std::uint64_t> c;

  static Poly nat(std::uint64_t n) { return Poly{{n}}.trim(); }
  static Poly wpow(std::size_t k) {
    Poly p;
    p.c.assign(k + 1, 0);
    p.c[k] = 1;
    return p;
  }
  Poly trim() const {
    Poly p = *this;
    while (!p.c.empty() && p.c.back() == 0) p.c.pop_back();
    return p;
  }
  bool zero() const { return trim().c.empty(); }
  std::size_t degree() const { return trim().c.size() - 1; }  // nonzero only
  std::uint64_t at(std::size_t k) const { return k < c.size() ? c[k] : 0; }

  friend bool operator<(const Poly& a, const Poly& b) {
    std::size_t n = std::max(a.c.size(), b.c.size());
    for (std::size_t k = n; k-- > 0;)
      if (a.at(k) != b.at(k)) return a.at(k) < b.at(k);
    return false;
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.trim().c == b.trim().c; }

  // Terms of a below the leading exponent of b are absorbed.
  friend Poly operator+(const Poly& a, const Poly& b) {
    if (b.zero()) return a.trim();
    std::size_t e = b.degree();
    Poly out;
    out.c.assign(std::max(a.c.size(), b.c.size()), 0);
    for (std::size_t k = 0; k < out.c.size(); ++k) {
      if (k > e) out.c[k] = a.at(k);
      else if (k == e) out.c[k] = a.at(k) + b.at(k);
      else out.c[k] = b.at(k);
    }
    return out.trim();
  }

  // Left distributive over the terms of b: a * (w^k c) for k > 0 is w^(deg a + k) c;
  // a * n multiplies the leading coefficient.
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.zero() || b.zero()) return Poly{};
    std::size_t d = a.degree();
    Poly out;
    for (std::size_t k = b.trim().c.size(); k-- > 0;) {
      std::uint64_t n = b.at(k);
      if (n == 0) continue;
      Poly term;
      if (k > 0) {
        term = wpow(d + k);
        term.c[d + k] = n;
      } else {
        term = a.trim();
        term.c[d] *= n;
      }
      out = out + term;
    }
    return out.trim();
  }

  friend Poly natsum(const Poly& a, const Poly& b) {
    Poly out;
    out.c.assign(std::max(a.c.size(), b.c.size()), 0);
    for (std::size_t k = 0; k < out.c.size(); ++k) out.c[k] = a.at(k) + b.at(k);
    return out.trim();
  }

  CnfOrdinal cnf() const {
    std::vector<CnfTerm> ts;
    for (std::size_t k = c.size(); k-- > 0;)
      if (c[k]) ts.push_back(CnfTerm{CnfOrdinal::nat(k), c[k]});
    return CnfOrdinal::from_terms(ts);
  }
};

inline Poly random_poly(std::mt19937_64& rng, std::size_t max_degree = 3, std::uint64_t max_coeff = 3) {
  Poly p;
  std::uniform_int_distribution<std::size_t> deg(0, max_degree);
  std::uniform_int_distribution<std::uint64_t> co(0, max_coeff);
  p.c.resize(deg(rng) + 1);
  for (auto& x : p.c) x = co(rng);
  return p.trim();
}

}  // namespace pmp::test
