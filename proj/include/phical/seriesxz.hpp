#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "laurent.hpp"

namespace phical {

inline Rational factorial(int n) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
  return Rational(f);
}

// Generalized binomial coefficient binom(n, k) for integer n, k >= 0.
inline Rational binom(long n, int k) {
  if (k < 0) return 0;
  Rational r = 1;
  for (int i = 0; i < k; ++i) r = r * Rational(n - i) / Rational(i + 1);
  return r;
}

// Truncated element of F((x))((z)): rows[k] is the coefficient of z^(zlo+k), known for z-exponents below zhi.
class SeriesXZ {
 public:
  std::string xvar = "x";
  int zlo = 0;
  int zhi = 0;
  std::vector<LaurentSeries> rows;

  SeriesXZ() = default;
  SeriesXZ(int zlo_, int zhi_, std::string xv = "x") : xvar(std::move(xv)), zlo(zlo_), zhi(std::max(zlo_, zhi_)) {
    rows.assign(zhi - zlo, LaurentSeries(xvar));
  }

  static SeriesXZ constant_rows(const LaurentSeries& zseries, const std::string& xv = "x") {
    int h = zseries.exact() ? (zseries.terms.empty() ? 1 : zseries.terms.rbegin()->first + 1)
                            : static_cast<int>(zseries.hi);
    int l = std::min(0, zseries.lo);
    SeriesXZ s(l, h, xv);
    for (const auto& [e, c] : zseries.terms)
      if (e < h) s.row_mut(e) = LaurentSeries::constant(xv, c);
    return s;
  }

  LaurentSeries row(int e) const {
    if (e >= zhi) throw PrecisionExhausted("z^" + std::to_string(e) + " beyond order " + std::to_string(zhi));
    if (e < zlo) return LaurentSeries(xvar);
    return rows[e - zlo];
  }
  LaurentSeries& row_mut(int e) { return rows.at(e - zlo); }

  friend bool operator==(const SeriesXZ& a, const SeriesXZ& b) {
    if (a.zhi != b.zhi || a.xvar != b.xvar) return false;
    for (int e = std::min(a.zlo, b.zlo); e < a.zhi; ++e)
      if (!(a.row(e) == b.row(e))) return false;
    return true;
  }

  bool agrees_with(const SeriesXZ& b) const {
    int h = std::min(zhi, b.zhi);
    for (int e = std::min(zlo, b.zlo); e < h; ++e)
      if (!row(e).agrees_with(b.row(e))) return false;
    return true;
  }

  SeriesXZ truncated(int h) const {
    SeriesXZ r(zlo, std::min(zhi, h), xvar);
    for (int e = zlo; e < r.zhi; ++e) r.row_mut(e) = row(e);
    return r;
  }

  friend SeriesXZ operator+(const SeriesXZ& a, const SeriesXZ& b) {
    SeriesXZ r(std::min(a.zlo, b.zlo), std::min(a.zhi, b.zhi), a.xvar);
    for (int e = r.zlo; e < r.zhi; ++e) r.row_mut(e) = a.row(e) + b.row(e);
    return r;
  }
  SeriesXZ scaled(const LaurentSeries& s) const {
    SeriesXZ r(zlo, zhi, xvar);
    for (int e = zlo; e < zhi; ++e) r.row_mut(e) = row(e) * s;
    return r;
  }
  friend SeriesXZ operator-(const SeriesXZ& a, const SeriesXZ& b) {
    return a + b.scaled(LaurentSeries::constant(b.xvar, -1));
  }
  SeriesXZ zshifted(int k) const {
    SeriesXZ r(zlo + k, zhi + k, xvar);
    for (int e = zlo; e < zhi; ++e) r.row_mut(e + k) = row(e);
    return r;
  }

  friend SeriesXZ operator*(const SeriesXZ& a, const SeriesXZ& b) {
    int h = std::min(a.zlo + b.zhi, b.zlo + a.zhi);
    SeriesXZ r(a.zlo + b.zlo, h, a.xvar);
    for (int i = a.zlo; i < a.zhi; ++i) {
      const LaurentSeries& ra = a.rows[i - a.zlo];
      if (ra.is_zero() && ra.exact()) continue;
      for (int j = b.zlo; j < b.zhi && i + j < h; ++j) {
        const LaurentSeries& rb = b.rows[j - b.zlo];
        if (rb.is_zero() && rb.exact()) continue;
        r.row_mut(i + j) += ra * rb;
      }
    }
    return r;
  }

  int zvaluation() const {
    for (int e = zlo; e < zhi; ++e)
      if (!row(e).is_zero()) return e;
    throw DivisionByZero("series has no nonzero z-row within its window");
  }

  // Inverse in F((x))((z)); xhi bounds the x-order when the leading row is an exact non-monomial.
  SeriesXZ invert(std::optional<long long> xhi = std::nullopt) const {
    const int v = zvaluation();
    const LaurentSeries r0inv = row(v).invert_unit(xhi);
    const int n = zhi - v;
    SeriesXZ out(-v, -v + n, xvar);
    std::vector<LaurentSeries> y;
    for (int k = 0; k < n; ++k) {
      LaurentSeries s(xvar);
      if (k == 0) {
        s = r0inv;
      } else {
        for (int j = 1; j <= k; ++j) {
          LaurentSeries rv = row(v + j);
          if (rv.is_zero() && rv.exact()) continue;
          s += rv * y[k - j];
        }
        s = -(s * r0inv);
      }
      y.push_back(s);
      out.row_mut(-v + k) = s;
    }
    return out;
  }

  std::string str() const {
    std::string out;
    for (int e = zlo; e < zhi; ++e)
      out += "z^" + std::to_string(e) + ": " + row(e).str() + "\n";
    return out;
  }
};

// Univariate power-series utilities in z.

inline LaurentSeries log1p_series(int order, const std::string& zv = "z") {
  LaurentSeries s(zv, 1, order + 1);
  for (int k = 1; k <= order; ++k) s.set(k, Scalar(Rational((k % 2) ? 1 : -1, k)));
  return s;
}

inline void require_positive_valuation(const LaurentSeries& g, const char* what) {
  auto v = g.valuation();
  if (v && *v < 1) throw CompositionError(std::string(what) + ": inner series has a term of z-degree " + std::to_string(*v));
  if (g.exact() && !g.is_zero() && g.lo < 1 && v && *v < 1) throw CompositionError(what);
}

// f(g(z)) for a power series f and g with positive valuation; order follows g's truncation.
inline LaurentSeries compose(const LaurentSeries& f, const LaurentSeries& g, std::optional<long long> order = std::nullopt) {
  require_positive_valuation(g, "compose");
  if (f.lo < 0 && !f.terms.empty() && f.terms.begin()->first < 0) throw CompositionError("outer series has negative powers");
  long long h = std::min(g.hi, f.exact() ? kExact : f.hi);
  if (order) h = std::min(h, *order);
  if (h >= kExact) throw PrecisionExhausted("composition of exact series needs an order");
  LaurentSeries out(g.var, 0, h);
  LaurentSeries gp = LaurentSeries::constant(g.var, 1);
  for (long long n = 0; n < h; ++n) {
    if (n >= f.hi) break;
    Scalar c = f.coeff(static_cast<int>(n));
    if (!c.is_zero()) out += gp.scaled(c).truncated(h);
    gp = (gp * g).truncated(h);
  }
  return out.truncated(h);
}

inline LaurentSeries exp_series(const LaurentSeries& g, std::optional<long long> order = std::nullopt) {
  require_positive_valuation(g, "exp_series");
  long long h = order ? std::min(g.hi, *order) : g.hi;
  if (h >= kExact) throw PrecisionExhausted("exp of exact series needs an order");
  LaurentSeries e(g.var, 0, h);
  for (int n = 0; n < h; ++n) e.set(n, Scalar(1 / factorial(n)));
  return compose(e, g, h);
}

inline LaurentSeries log1p_of(const LaurentSeries& g, std::optional<long long> order = std::nullopt) {
  require_positive_valuation(g, "log1p_of");
  long long h = order ? std::min(g.hi, *order) : g.hi;
  if (h >= kExact) throw PrecisionExhausted("log of exact series needs an order");
  return compose(log1p_series(static_cast<int>(h) - 1, g.var), g, h);
}

// log(1+z) as a SeriesXZ with constant rows.
inline SeriesXZ log1p(int order, const std::string& xv = "x") {
  SeriesXZ s(0, order + 1, xv);
  LaurentSeries l = log1p_series(order);
  for (const auto& [e, c] : l.terms) s.row_mut(e) = LaurentSeries::constant(xv, c);
  return s;
}

// e^f for f in z F((x))[[z]].
inline SeriesXZ exp_series(const SeriesXZ& f) {
  for (int e = f.zlo; e <= 0 && e < f.zhi; ++e)
    if (!f.row(e).is_zero()) throw CompositionError("exp_series: nonzero z^" + std::to_string(e) + " row");
  SeriesXZ out(0, f.zhi, f.xvar);
  out.row_mut(0) = LaurentSeries::constant(f.xvar, 1);
  SeriesXZ fp = out;
  for (int n = 1; n < f.zhi; ++n) {
    fp = (fp * f).truncated(f.zhi);
    out = out + fp.scaled(LaurentSeries::constant(f.xvar, Scalar(1 / factorial(n))));
  }
  return out.truncated(f.zhi);
}

// log(1+f) for f in z F((x))[[z]].
inline SeriesXZ log1p_of(const SeriesXZ& f) {
  for (int e = f.zlo; e <= 0 && e < f.zhi; ++e)
    if (!f.row(e).is_zero()) throw CompositionError("log1p_of: nonzero z^" + std::to_string(e) + " row");
  SeriesXZ out(0, f.zhi, f.xvar);
  SeriesXZ fp(0, f.zhi, f.xvar);
  fp.row_mut(0) = LaurentSeries::constant(f.xvar, 1);
  for (int n = 1; n < f.zhi; ++n) {
    fp = (fp * f).truncated(f.zhi);
    out = out + fp.scaled(LaurentSeries::constant(f.xvar, Scalar(Rational((n % 2) ? 1 : -1, n))));
  }
  return out;
}

// Substitution x1 -> phi(x, z).

inline void require_associate_base(const SeriesXZ& phi) {
  bool ok = phi.zlo <= 0 && phi.zhi > 0;
  for (int e = phi.zlo; ok && e < 0; ++e) ok = phi.row(e).is_zero();
  if (ok) {
    const LaurentSeries r0 = phi.row(0);
    ok = r0.terms.size() == 1 && r0.terms.begin()->first == 1 && r0.terms.begin()->second.is_one() && r0.known(1);
  }
  if (!ok) throw NotAnAssociateBase("phi(x,0) is not x");
}

inline bool is_x_exp_z(const SeriesXZ& phi) {
  for (int e = 0; e < phi.zhi; ++e) {
    const LaurentSeries r = phi.row(e);
    if (!r.exact() || r.terms.size() != 1 || r.terms.begin()->first != 1 ||
        r.terms.begin()->second != Scalar(1 / factorial(e)))
      return false;
  }
  return true;
}

// x1^m at x1 = phi(x,z).
class AssocPowers {
 public:
  explicit AssocPowers(SeriesXZ phi) : phi_(std::move(phi)) {
    require_associate_base(phi_);
    fast_ = is_x_exp_z(phi_);
    if (!fast_) {
      w_ = SeriesXZ(0, phi_.zhi, phi_.xvar);
      for (int e = 1; e < phi_.zhi; ++e) w_.row_mut(e) = phi_.row(e).shifted(-1);
    }
  }

  const SeriesXZ& phi() const { return phi_; }
  int zhi() const { return phi_.zhi; }

  const SeriesXZ& power(int m) {
    auto it = cache_.find(m);
    if (it != cache_.end()) return it->second;
    SeriesXZ out(0, phi_.zhi, phi_.xvar);
    if (fast_) {
      for (int j = 0; j < phi_.zhi; ++j) {
        Rational c = 1 / factorial(j);
        for (int i = 0; i < j; ++i) c *= m;
        out.row_mut(j) = LaurentSeries::monomial(phi_.xvar, m, Scalar(c));
      }
    } else {
      SeriesXZ wp(0, phi_.zhi, phi_.xvar);
      wp.row_mut(0) = LaurentSeries::constant(phi_.xvar, 1);
      for (int j = 0; j < phi_.zhi; ++j) {
        if (j > 0) wp = (wp * w_).truncated(phi_.zhi);
        Rational b = binom(m, j);
        if (b != 0) out = out + wp.scaled(LaurentSeries::constant(phi_.xvar, Scalar(b)));
      }
      out = out.scaled(LaurentSeries::monomial(phi_.xvar, m));
    }
    return cache_.emplace(m, std::move(out)).first->second;
  }

  // Lowest x-exponent of z^r row of (phi/x)^m, uniformly in m.
  int tail_shift(int r) {
    if (fast_) return 0;
    if (tail_.empty()) {
      std::vector<int> lw(phi_.zhi, 0);
      for (int e = 1; e < phi_.zhi; ++e) lw[e] = w_.row(e).lo;
      const int inf = 1 << 28;
      std::vector<std::vector<int>> L(phi_.zhi, std::vector<int>(phi_.zhi, inf));
      L[0][0] = 0;
      for (int j = 1; j < phi_.zhi; ++j)
        for (int r2 = j; r2 < phi_.zhi; ++r2)
          for (int s = 1; s <= r2; ++s)
            if (L[j - 1][r2 - s] < inf) L[j][r2] = std::min(L[j][r2], lw[s] + L[j - 1][r2 - s]);
      tail_.assign(phi_.zhi, inf);
      for (int j = 0; j < phi_.zhi; ++j)
        for (int r2 = 0; r2 < phi_.zhi; ++r2) tail_[r2] = std::min(tail_[r2], L[j][r2]);
    }
    return tail_[r];
  }

 private:
  SeriesXZ phi_, w_;
  bool fast_ = false;
  std::map<int, SeriesXZ> cache_;
  std::vector<int> tail_;
};

// f(phi(x,z)) for f a Laurent series in one variable.
inline SeriesXZ substitute_assoc(const LaurentSeries& f, AssocPowers& P) {
  const std::string& xv = P.phi().xvar;
  SeriesXZ out(0, P.zhi(), xv);
  for (const auto& [m, c] : f.terms) out = out + P.power(m).scaled(LaurentSeries::constant(xv, c));
  if (!f.exact()) {
    for (int r = 0; r < out.zhi; ++r) {
      long long h = sat_add(f.hi, P.tail_shift(r));
      out.row_mut(r) = out.row(r).truncated(h);
    }
  }
  return out;
}

inline SeriesXZ substitute_assoc(const LaurentSeries& f, const SeriesXZ& phi) {
  AssocPowers P(phi);
  return substitute_assoc(f, P);
}

// f(phi(x,z), x) for an exact bivariate Laurent polynomial {(i,j) -> c} meaning c x1^i x^j.
inline SeriesXZ substitute_assoc(const std::map<std::pair<int, int>, Scalar>& f, AssocPowers& P) {
  const std::string& xv = P.phi().xvar;
  SeriesXZ out(0, P.zhi(), xv);
  for (const auto& [ij, c] : f)
    out = out + P.power(ij.first).scaled(LaurentSeries::monomial(xv, ij.second, c));
  return out;
}

}  // namespace phical
