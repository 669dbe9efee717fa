#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "jsonio.hpp"
#include "ratexpr.hpp"
#include "report.hpp"

namespace phical {

// One-dimensional formal group; only the additive law is instantiated.
struct FormalGroup {
  enum class Tag { Additive };
  Tag tag = Tag::Additive;
  std::map<std::pair<int, int>, Scalar> law{{{1, 0}, Scalar(1)}, {{0, 1}, Scalar(1)}};

  static FormalGroup additive() { return {}; }

  MPoly apply(const MPoly& a, const MPoly& b) const {
    MPoly r;
    for (const auto& [ij, c] : law) {
      MPoly t = MPoly::constant(c);
      for (int i = 0; i < ij.first; ++i) t = t * a;
      for (int j = 0; j < ij.second; ++j) t = t * b;
      r = r + t;
    }
    return r;
  }

  // F(x,0) = x and F(x,F(t,u)) = F(F(x,t),u), as polynomial identities.
  CheckReport check_axioms() const {
    CheckReport rep("formal_group");
    const MPoly x = MPoly::variable(var_index("x")), t = MPoly::variable(var_index("t")),
                u = MPoly::variable(var_index("u"));
    rep.expect_equal(apply(x, MPoly()), x, Json{{"axiom", "unit"}});
    rep.expect_equal(apply(x, apply(t, u)), apply(apply(x, t), u), Json{{"axiom", "associativity"}});
    return rep;
  }
};

// phi(x,z) in F((x))[[z]] with rows z^0..z^order.
struct Associate {
  SeriesXZ phi;
  std::optional<LaurentSeries> generator_p;
  int order = 0;

  const LaurentSeries& row(int n) const { return phi.rows.at(n - phi.zlo); }
};

// Rows of exp(z p(x) d/dx) x: f_0 = x, f_n = p f_{n-1}' / n.
// If row_hi is given, every row must be known below x^row_hi.
inline Associate associate_from_p(const LaurentSeries& p, int order, std::optional<long long> row_hi = std::nullopt) {
  if (order < 1) throw PrecisionExhausted("associate order must be at least 1");
  if (p.var != "x") throw VariableMismatch("generator must be a series in x, got " + p.var);
  // precision calculus: windows [lo_n, hi_n) of D^n x, checked before any arithmetic
  if (!p.exact()) {
    if (p.hi <= p.lo) throw PrecisionExhausted("generator has no known coefficients");
    long long lo_n = p.lo, hi_n = p.hi;
    for (int n = 1; n <= order; ++n) {
      if (hi_n <= lo_n) throw PrecisionExhausted("row z^" + std::to_string(n) + " has no known coefficients");
      if (row_hi && hi_n < *row_hi)
        throw PrecisionExhausted("row z^" + std::to_string(n) + " is known only below x^" + std::to_string(hi_n));
      const long long nlo = p.lo + lo_n - 1;
      hi_n = std::min(p.lo + hi_n - 1, lo_n - 1 + p.hi);
      lo_n = nlo;
    }
  }
  Associate a;
  a.order = order;
  a.generator_p = p;
  a.phi = SeriesXZ(0, order + 1, "x");
  LaurentSeries g = LaurentSeries::monomial("x", 1);
  a.phi.row_mut(0) = g;
  for (int n = 1; n <= order; ++n) {
    g = p * g.derivative();
    a.phi.row_mut(n) = g.scaled(Scalar(1 / factorial(n)));
  }
  return a;
}

inline Associate associate_from_phi(SeriesXZ phi) {
  require_associate_base(phi);
  Associate a;
  a.order = phi.zhi - 1;
  a.phi = std::move(phi);
  return a;
}

// p(x) = phi_z(x, 0).
inline LaurentSeries p_from_associate(const SeriesXZ& phi) {
  require_associate_base(phi);
  if (phi.zhi < 2) throw PrecisionExhausted("associate has no z^1 row");
  return phi.row(1);
}

namespace detail {

inline void compare_rows(CheckReport& rep, const LaurentSeries& lhs, const LaurentSeries& rhs, Json where) {
  const long long h = std::min(lhs.hi, rhs.hi);
  std::map<int, bool> seen;
  for (const auto& [e, c] : lhs.terms)
    if (e < h) seen[e] = true;
  for (const auto& [e, c] : rhs.terms)
    if (e < h) seen[e] = true;
  ++rep.checked;
  for (const auto& [e, unused] : seen) {
    Scalar l = lhs.coeff(e), r = rhs.coeff(e);
    if (l != r) {
      Json w = where;
      w["x"] = e;
      rep.fail(w, l.str(), r.str());
    }
  }
}

}  // namespace detail

// phi(x,0) = x and phi(phi(x,x2),x0) = phi(x,x0+x2) for z-degrees a+b <= order, on every known x-coefficient.
inline CheckReport verify_associate(const Associate& A, int order) {
  CheckReport rep("associate");
  rep.meta["order"] = order;
  const SeriesXZ& phi = A.phi;
  try {
    require_associate_base(phi);
  } catch (const NotAnAssociateBase&) {
    rep.fail(Json{{"x0", 0}, {"x2", 0}}, phi.row(0).str(), "x", "phi(x,0) != x");
    return rep;
  }
  if (order >= phi.zhi) order = phi.zhi - 1;
  if (A.generator_p) detail::compare_rows(rep, phi.row(1), *A.generator_p, Json{{"generator", 1}});
  AssocPowers P(phi.truncated(order + 1));
  for (int a = 0; a <= order; ++a) {
    SeriesXZ fa = substitute_assoc(phi.row(a), P);
    for (int b = 0; a + b <= order; ++b) {
      LaurentSeries rhs = phi.row(a + b).scaled(Scalar(binom(a + b, a)));
      detail::compare_rows(rep, fa.row(b), rhs, Json{{"x0", a}, {"x2", b}});
    }
  }
  return rep;
}

// phi(phi(x,-z),z) = x to z-order `order`.
inline CheckReport inverse_flow_check(const Associate& A, int order) {
  CheckReport rep("inverse_flow");
  rep.meta["order"] = order;
  if (order >= A.phi.zhi) order = A.phi.zhi - 1;
  SeriesXZ psi = A.phi.truncated(order + 1);
  for (int n = 1; n <= order; n += 2) psi.row_mut(n) = -psi.row(n);
  AssocPowers P(psi);
  SeriesXZ out(0, order + 1, "x");
  for (int n = 0; n <= order; ++n) out = out + substitute_assoc(A.phi.row(n), P).zshifted(n).truncated(order + 1);
  for (int e = 0; e <= order; ++e) {
    LaurentSeries expect = e == 0 ? LaurentSeries::monomial("x", 1) : LaurentSeries("x");
    detail::compare_rows(rep, out.row(e), expect, Json{{"z", e}});
  }
  return rep;
}

namespace detail {

inline std::map<std::pair<int, int>, Scalar> bivariate_x1_x(const MPoly& p) {
  const int i1 = var_index("x1"), i0 = var_index("x");
  std::map<std::pair<int, int>, Scalar> out;
  for (const auto& [m, c] : p.terms) {
    for (int i = 0; i < 6; ++i)
      if (i != i1 && i != i0 && m[i] != 0) throw VariableMismatch("expression involves " + alphabet()[i]);
    out[{m[i1], m[i0]}] = c;
  }
  return out;
}

}  // namespace detail

// Searches f(phi(x,z),x) for a nonzero coefficient within z-order and x-order.
inline CheckReport injectivity_probe(const RationalExpr& f, const Associate& A, int zorder, int xorder) {
  CheckReport rep("injectivity");
  if (f.is_zero()) throw DivisionByZero("probe needs a nonzero f");
  zorder = std::min(zorder, A.phi.zhi - 1);
  AssocPowers P(A.phi.truncated(zorder + 1));
  SeriesXZ N = substitute_assoc(detail::bivariate_x1_x(f.num), P);
  SeriesXZ D = substitute_assoc(detail::bivariate_x1_x(f.den), P);
  SeriesXZ F = (N * D.invert(xorder)).truncated(zorder + 1);
  ++rep.checked;
  for (int e = F.zlo; e < F.zhi; ++e) {
    const LaurentSeries r = F.row(e);
    for (const auto& [x, c] : r.terms) {
      if (x >= xorder) break;
      rep.meta["witness"] = Json{{"z", e}, {"x", x}, {"coeff", c.str()}};
      return rep;
    }
  }
  rep.status = Status::Inconclusive;
  rep.meta["reason"] = "no nonzero coefficient within the window";
  return rep;
}

inline Json to_json(const Associate& a) {
  Json j;
  j["p"] = a.generator_p ? to_json(*a.generator_p) : Json(nullptr);
  j["order"] = a.order;
  j["rows"] = to_json(a.phi)["rows"];
  return j;
}

}  // namespace phical
