#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "window.hpp"

namespace phical {

inline const std::array<std::string, 6>& alphabet() {
  static const std::array<std::string, 6> a{"x", "z", "x1", "x2", "t", "u"};
  return a;
}

inline int var_index(const std::string& v) {
  const auto& a = alphabet();
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] == v) return static_cast<int>(i);
  return -1;
}

using Mono = std::array<int, 6>;

// Laurent polynomial in the alphabet variables with coefficients in Q(q).
class MPoly {
 public:
  std::map<Mono, Scalar> terms;

  MPoly() = default;
  static MPoly constant(const Scalar& c) {
    MPoly p;
    if (!c.is_zero()) p.terms[Mono{}] = c;
    return p;
  }
  static MPoly variable(int idx, int power = 1) {
    MPoly p;
    Mono m{};
    m[idx] = power;
    p.terms[m] = Scalar(1);
    return p;
  }

  bool is_zero() const { return terms.empty(); }
  bool is_monomial() const { return terms.size() == 1; }
  bool is_constant() const { return terms.empty() || (terms.size() == 1 && terms.begin()->first == Mono{}); }

  void add(const Mono& m, const Scalar& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms.emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }
  friend MPoly operator+(MPoly a, const MPoly& b) {
    for (const auto& [m, c] : b.terms) a.add(m, c);
    return a;
  }
  friend MPoly operator-(const MPoly& a) {
    MPoly r;
    for (const auto& [m, c] : a.terms) r.terms.emplace(m, -c);
    return r;
  }
  friend MPoly operator-(const MPoly& a, const MPoly& b) { return a + (-b); }
  friend MPoly operator*(const MPoly& a, const MPoly& b) {
    MPoly r;
    for (const auto& [ma, ca] : a.terms)
      for (const auto& [mb, cb] : b.terms) {
        Mono m;
        for (size_t i = 0; i < 6; ++i) m[i] = ma[i] + mb[i];
        r.add(m, ca * cb);
      }
    return r;
  }
  friend bool operator==(const MPoly& a, const MPoly& b) { return a.terms == b.terms; }

  MPoly scaled(const Scalar& s) const { return *this * constant(s); }

  // Variables that occur with a nonzero exponent.
  std::vector<int> used_vars() const {
    std::vector<int> out;
    for (int i = 0; i < 6; ++i)
      for (const auto& [m, c] : terms)
        if (m[i] != 0) {
          out.push_back(i);
          break;
        }
    return out;
  }

  // Leading monomial: largest in descending lexicographic order of exponents.
  const std::pair<const Mono, Scalar>& leading() const { return *terms.rbegin(); }

  std::string str() const {
    if (terms.empty()) return "0";
    std::string out;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
      const auto& [m, c] = *it;
      std::string mono;
      for (size_t i = 0; i < 6; ++i) {
        if (m[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += alphabet()[i];
        if (m[i] != 1) mono += "^" + std::to_string(m[i]);
      }
      std::string t;
      if (mono.empty()) {
        t = c.is_rational() ? c.str() : "(" + c.str() + ")";
      } else if (c.is_one()) {
        t = mono;
      } else if (c == Scalar(-1)) {
        t = "-" + mono;
      } else if (c.is_rational()) {
        t = c.str() + "*" + mono;
      } else {
        t = "(" + c.str() + ")*" + mono;
      }
      if (!out.empty() && t[0] != '-') out += "+";
      out += t;
    }
    return out;
  }
};

// Quotient of two alphabet polynomials; canonical up to the representation chosen by normalize().
class RationalExpr {
 public:
  MPoly num, den = MPoly::constant(1);

  RationalExpr() = default;
  RationalExpr(MPoly n, MPoly d) : num(std::move(n)), den(std::move(d)) { normalize(); }
  static RationalExpr constant(const Scalar& c) { return RationalExpr(MPoly::constant(c), MPoly::constant(1)); }
  static RationalExpr variable(const std::string& v) {
    int i = var_index(v);
    if (i < 0) throw ParseError("unknown variable '" + v + "'", 0);
    return RationalExpr(MPoly::variable(i), MPoly::constant(1));
  }

  bool is_zero() const { return num.is_zero(); }
  bool is_polynomial() const { return den.is_constant(); }

  friend RationalExpr operator+(const RationalExpr& a, const RationalExpr& b) {
    if (a.den == b.den) return RationalExpr(a.num + b.num, a.den);
    return RationalExpr(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend RationalExpr operator-(const RationalExpr& a) { return RationalExpr(-a.num, a.den); }
  friend RationalExpr operator-(const RationalExpr& a, const RationalExpr& b) { return a + (-b); }
  friend RationalExpr operator*(const RationalExpr& a, const RationalExpr& b) {
    return RationalExpr(a.num * b.num, a.den * b.den);
  }
  friend RationalExpr operator/(const RationalExpr& a, const RationalExpr& b) {
    if (b.is_zero()) throw DivisionByZero("division by zero expression");
    return RationalExpr(a.num * b.den, a.den * b.num);
  }
  RationalExpr pow(int n) const {
    if (n < 0) {
      if (is_zero()) throw DivisionByZero("negative power of zero");
      return RationalExpr(den, num).pow(-n);
    }
    RationalExpr r = constant(Scalar(1));
    for (int i = 0; i < n; ++i) r = r * *this;
    return r;
  }

  // Equality in the fraction field; the stored form is not gcd-reduced.
  friend bool operator==(const RationalExpr& a, const RationalExpr& b) {
    if (a.den == b.den) return a.num == b.num;
    return a.num * b.den == b.num * a.den;
  }

  std::string str() const {
    if (den.is_constant() && den.terms.begin()->second.is_one()) return num.str();
    return "(" + num.str() + ")/(" + den.str() + ")";
  }

 private:
  void normalize() {
    if (den.is_zero()) throw DivisionByZero("zero denominator");
    if (num.is_zero()) {
      den = MPoly::constant(1);
      return;
    }
    if (num == den) {
      num = den = MPoly::constant(1);
      return;
    }
    // monomial denominators fold into the numerator as Laurent monomials
    if (den.is_monomial()) {
      const auto& [m, c] = *den.terms.begin();
      MPoly inv;
      Mono mi;
      for (size_t i = 0; i < 6; ++i) mi[i] = -m[i];
      inv.terms[mi] = c.inv();
      num = num * inv;
      den = MPoly::constant(1);
      return;
    }
    // strip the common monomial factor of the denominator, then make it monic
    Mono g = den.terms.begin()->first;
    for (const auto& [m, c] : den.terms)
      for (size_t i = 0; i < 6; ++i) g[i] = std::min(g[i], m[i]);
    if (g != Mono{}) {
      MPoly inv;
      Mono mi;
      for (size_t i = 0; i < 6; ++i) mi[i] = -g[i];
      inv.terms[mi] = Scalar(1);
      num = num * inv;
      den = den * inv;
    }
    Scalar l = den.leading().second;
    if (!l.is_one()) {
      num = num.scaled(l.inv());
      den = den.scaled(l.inv());
    }
  }
};

// Laurent polynomial in the alphabet variable `v`, when the expression is one.
inline LaurentSeries to_laurent(const RationalExpr& e, const std::string& v) {
  int vi = var_index(v);
  if (!e.is_polynomial()) throw ExpansionDirectionError("expression is not a Laurent polynomial in " + v);
  Scalar dinv = e.den.terms.begin()->second.inv();
  LaurentSeries s(v);
  for (const auto& [m, c] : e.num.terms) {
    for (int i = 0; i < 6; ++i)
      if (i != vi && m[i] != 0) throw VariableMismatch("expression involves " + alphabet()[i]);
    s.add_to(m[vi], c * dinv);
  }
  s.lo = s.terms.empty() ? 0 : s.terms.begin()->first;
  return s;
}

// N/D as a series in one variable after removing common leading zeros; D must not vanish.
inline LaurentSeries series_quotient(LaurentSeries N, LaurentSeries D, long long hi) {
  if (N.var != D.var) throw VariableMismatch(N.var + " vs " + D.var);
  if (D.is_zero()) throw DivisionByZero("zero denominator series");
  if (N.is_zero()) return LaurentSeries(N.var, 0, hi);
  N.lo = *N.valuation();
  LaurentSeries inv = D.invert_unit(hi - N.lo);
  return (N * inv).truncated(hi);
}

// iota expansion of f(outer, inner) in nonnegative powers of `inner`.
// The result lives in F((outer))((inner)): `order` inner powers from the lowest.
inline WindowTable<Scalar> iota_expand(const RationalExpr& f, const std::string& outer, const std::string& inner, int order,
                                       std::optional<int> outer_hi = std::nullopt) {
  const int oi = var_index(outer), ii = var_index(inner);
  if (oi < 0 || ii < 0 || oi == ii) throw ExpansionDirectionError("need two distinct alphabet variables");
  auto split = [&](const MPoly& p) {
    std::map<int, LaurentSeries> rows;
    for (const auto& [m, c] : p.terms) {
      for (int i = 0; i < 6; ++i)
        if (i != oi && i != ii && m[i] != 0)
          throw ExpansionDirectionError("expression involves " + alphabet()[i]);
      auto it = rows.try_emplace(m[ii], LaurentSeries(outer)).first;
      it->second.add_to(m[oi], c);
    }
    for (auto& [k, r] : rows) r.lo = r.terms.begin()->first;
    return rows;
  };
  auto N = split(f.num), D = split(f.den);
  const int j0 = D.begin()->first;
  const LaurentSeries& D0 = D.begin()->second;
  const bool mono = D0.terms.size() == 1;
  if (!mono && !outer_hi)
    throw ExpansionDirectionError("leading inner coefficient " + D0.str() + " is not a monomial; an outer order is required");
  const LaurentSeries D0inv = mono ? D0.invert_unit() : D0.invert_unit(*outer_hi);
  const int nlow = N.empty() ? j0 : N.begin()->first;
  const int ilo = nlow - j0;

  std::vector<LaurentSeries> Q;
  for (int k = 0; k < order; ++k) {
    LaurentSeries acc(outer);
    auto it = N.find(nlow + k);
    if (it != N.end()) acc = it->second;
    for (int j = 1; j <= k; ++j) {
      auto dj = D.find(j0 + j);
      if (dj != D.end()) acc = acc - dj->second * Q[k - j];
    }
    LaurentSeries qk = acc * D0inv;
    if (outer_hi) qk = qk.truncated(*outer_hi);
    Q.push_back(qk);
  }
  int omin = 0, omax = 0;
  bool first = true;
  long long valid_hi = kExact;
  for (const auto& q : Q) {
    for (const auto& [e, c] : q.terms) {
      omin = first ? e : std::min(omin, e);
      omax = first ? e : std::max(omax, e);
      first = false;
    }
    valid_hi = std::min(valid_hi, q.hi);
  }
  WindowTable<Scalar> t({outer, inner}, Box{{omin, omax}, {ilo, ilo + order - 1}}, Shape::iter(0, 1));
  if (valid_hi < kExact) {
    t.window[0].second = std::max(omax, static_cast<int>(valid_hi) - 1);
    t.valid[0].second = static_cast<int>(valid_hi) - 1;
  }
  t.lower[1] = ilo;
  for (int k = 0; k < order; ++k) {
    for (const auto& [e, c] : Q[k].terms) t.set({e, ilo + k}, c);
    if (auto v = Q[k].valuation()) t.row_lower[ilo + k] = *v;
  }
  t.finite_support = mono && valid_hi >= kExact;
  return t;
}

inline PolyN to_polyn(const MPoly& p, const std::vector<std::string>& vars) {
  std::vector<int> idx;
  for (const auto& v : vars) idx.push_back(var_index(v));
  PolyN out;
  for (const auto& [m, c] : p.terms) {
    Exps e;
    for (int i : idx) e.push_back(m[i]);
    for (int i = 0; i < 6; ++i)
      if (m[i] != 0 && std::find(idx.begin(), idx.end(), i) == idx.end())
        throw VariableMismatch("polynomial involves " + alphabet()[i]);
    out[e] = c;
  }
  return out;
}

}  // namespace phical
