#pragma once

// Reference computations written directly from definitions, independent of the engine paths they check.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "phical/phical.hpp"

namespace oracle {

using phical::Rational;
using phical::Scalar;
using Terms = std::map<int, Scalar>;

// binom(a, k) for a rational top.
inline Rational rbinom(const Rational& a, int k) {
  Rational r = 1;
  for (int i = 0; i < k; ++i) r = r * (a - i) / (i + 1);
  return r;
}

inline Rational fact(int n) {
  Rational r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline Terms nonzero(Terms t) {
  std::erase_if(t, [](const auto& kv) { return kv.second.is_zero(); });
  return t;
}

// z^r row of the associate for p in {0, 1, x, x^2}: x, x+z, x e^z, x/(1-zx).
inline Terms closed_associate_row(const std::string& p, int r) {
  if (r == 0) return {{1, Scalar(1)}};
  if (p == "0") return {};
  if (p == "1") return r == 1 ? Terms{{0, Scalar(1)}} : Terms{};
  if (p == "x") return {{1, Scalar(1 / fact(r))}};
  if (p == "x^2") return {{r + 1, Scalar(1)}};
  throw phical::PolicyError("no closed form for p = " + p);
}

// z^r row of x + log(1 + z/x).
inline Terms log_form_row(int r) {
  if (r == 0) return {{1, Scalar(1)}};
  return {{-r, Scalar(Rational(r % 2 ? 1 : -1, r))}};
}

// z^r row of sqrt(x^2 + 2z) = sum_r binom(1/2, r) 2^r z^r x^(1-2r).
inline Terms sqrt_form_row(int r) {
  Rational c = rbinom(Rational(1, 2), r);
  for (int i = 0; i < r; ++i) c *= 2;
  return nonzero({{1 - 2 * r, Scalar(c)}});
}

// Power series quotient num/den by schoolbook long division, n coefficients.
inline std::vector<Scalar> long_division(const std::vector<Scalar>& num, const std::vector<Scalar>& den, int n) {
  std::vector<Scalar> rem = num, out;
  rem.resize(n + den.size(), Scalar());
  const Scalar d0inv = Scalar(1) / den[0];
  for (int k = 0; k < n; ++k) {
    const Scalar c = rem[k] * d0inv;
    out.push_back(c);
    for (size_t j = 0; j < den.size(); ++j) rem[k + j] = rem[k + j] - c * den[j];
  }
  return out;
}

// Polynomials in E = e^u; d/du acts as E d/dE.
using EPoly = std::vector<Scalar>;

inline EPoly ep_mul(const EPoly& a, const EPoly& b) {
  EPoly r(a.size() + b.size() - 1, Scalar());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] = r[i + j] + a[i] * b[j];
  return r;
}
inline EPoly ep_theta(const EPoly& a) {
  EPoly r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] = r[i] * Scalar(Rational(static_cast<long>(i)));
  return r;
}
inline EPoly ep_axpy(const EPoly& a, const Scalar& s, const EPoly& b) {
  EPoly r(std::max(a.size(), b.size()), Scalar());
  for (size_t i = 0; i < a.size(); ++i) r[i] = r[i] + a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] = r[i] + s * b[i];
  return r;
}
inline Scalar ep_at_one(const EPoly& a) {
  Scalar s;
  for (const auto& c : a) s = s + c;
  return s;
}

// Taylor coefficients at u = 0 of (e^u - q)/(q e^u - 1) by repeated quotient rule:
// f^(k) = N_k / D^(k+1), N_(k+1) = theta(N_k) D - (k+1) N_k theta(D).
inline std::vector<Scalar> mu_by_differentiation(const Scalar& q, int n) {
  const EPoly D{Scalar(-1), q};
  EPoly N{-q, Scalar(1)};
  const Scalar d1 = ep_at_one(D);
  std::vector<Scalar> out;
  Scalar dpow = d1;
  for (int k = 0; k < n; ++k) {
    out.push_back(ep_at_one(N) / dpow / Scalar(fact(k)));
    N = ep_axpy(ep_mul(ep_theta(N), D), Scalar(Rational(-(k + 1))), ep_mul(N, ep_theta(D)));
    dpow = dpow * d1;
  }
  return out;
}

// Count of multisets of at most `depth` creation letters (2 colors, modes floor..-1), by degree -sum(modes).
inline std::vector<size_t> bosonic_dims(int depth, int floor, int max_degree) {
  std::vector<std::pair<int, int>> letters;
  for (int g = 0; g < 2; ++g)
    for (int n = floor; n <= -1; ++n) letters.emplace_back(g, n);
  std::vector<size_t> d(max_degree + 1, 0);
  // nondecreasing index sequences enumerate multisets
  auto rec = [&](auto&& self, size_t start, int left, int deg) -> void {
    if (deg <= max_degree) ++d[deg];
    if (left == 0) return;
    for (size_t i = start; i < letters.size(); ++i) self(self, i, left - 1, deg - letters[i].second);
  };
  rec(rec, 0, depth, 0);
  return d;
}

// z^r coefficient of phi(x,z)^m for p = 1, x, x^2: binom(m,r) x^(m-r), m^r/r! x^m, binom(-m,r)(-1)^r x^(m+r).
inline Terms phi_power_row(const std::string& p, int m, int r) {
  if (p == "1") return nonzero({{m - r, Scalar(rbinom(Rational(m), r))}});
  if (p == "x") {
    Rational c = 1 / fact(r);
    for (int i = 0; i < r; ++i) c *= m;
    return nonzero({{m, Scalar(c)}});
  }
  if (p == "x^2") return nonzero({{m + r, Scalar(rbinom(Rational(-m), r) * (r % 2 ? -1 : 1))}});
  throw phical::PolicyError("no closed form for p = " + p);
}

inline Terms terms_mul(const Terms& a, const Terms& b) {
  Terms r;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) r[ea + eb] = r[ea + eb] + ca * cb;
  return nonzero(r);
}

// z^r row of entry (i,j) of a(phi(x,z)) b(x) for Laurent-polynomial matrices.
inline Terms closed_borcherds_entry(const phical::LMatrix& a, const phical::LMatrix& b, const std::string& p, int i, int j,
                                    int r) {
  Terms out;
  for (size_t k = 0; k < a.size(); ++k) {
    Terms ar;
    for (const auto& [m, c] : a[i][k].terms)
      for (const auto& [e, v] : phi_power_row(p, m, r)) ar[e] = ar[e] + c * v;
    for (const auto& [e, v] : terms_mul(nonzero(ar), b[k][j].terms)) out[e] = out[e] + v;
  }
  return nonzero(out);
}

// Anticommutator ({X_m, Y_n}) or commutator of two modes on a state, from the raw action.
inline phical::ModuleState bracket(const phical::BgModule& M, int X, int m, int Y, int n, const phical::Word& w, bool anti) {
  const phical::ModuleState s(w);
  phical::ModuleState r = M.act(X, m, M.act(Y, n, s));
  r.add(M.act(Y, n, M.act(X, m, s)), Scalar(anti ? 1 : -1));
  return r;
}

}  // namespace oracle
