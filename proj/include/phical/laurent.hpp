#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "errors.hpp"
#include "scalar.hpp"

namespace phical {

// Truncation order of an exact (finitely supported, fully known) series.
inline constexpr long long kExact = LLONG_MAX / 4;

inline long long sat_add(long long a, long long b) {
  if (a >= kExact || b >= kExact) return kExact;
  return a + b;
}

// Truncated element of F((var)): exponents in [lo, hi) are known; hi = kExact means exact.
class LaurentSeries {
 public:
  std::string var = "x";
  int lo = 0;
  long long hi = kExact;
  std::map<int, Scalar> terms;

  LaurentSeries() = default;
  explicit LaurentSeries(std::string v, int lo_ = 0, long long hi_ = kExact)
      : var(std::move(v)), lo(lo_), hi(hi_) {}
  LaurentSeries(std::string v, std::map<int, Scalar> t, long long hi_ = kExact)
      : var(std::move(v)), hi(hi_), terms(std::move(t)) {
    std::erase_if(terms, [&](const auto& kv) { return kv.second.is_zero() || kv.first >= hi; });
    lo = terms.empty() ? (hi < kExact ? static_cast<int>(hi) : 0) : terms.begin()->first;
  }

  static LaurentSeries monomial(const std::string& v, int e, const Scalar& c = 1) {
    return LaurentSeries(v, {{e, c}});
  }
  static LaurentSeries constant(const std::string& v, const Scalar& c) { return monomial(v, 0, c); }

  bool exact() const { return hi >= kExact; }
  bool is_zero() const { return terms.empty(); }
  std::optional<int> valuation() const {
    if (terms.empty()) return std::nullopt;
    return terms.begin()->first;
  }

  // Coefficient at e; asking beyond the truncation order is an error.
  Scalar coeff(int e) const {
    if (e >= hi) throw PrecisionExhausted(var + "^" + std::to_string(e) + " beyond order " + std::to_string(hi));
    auto it = terms.find(e);
    return it == terms.end() ? Scalar() : it->second;
  }
  bool known(int e) const { return e < hi; }

  void set(int e, const Scalar& c) {
    if (e >= hi) return;
    if (c.is_zero()) {
      terms.erase(e);
    } else {
      terms[e] = c;
      lo = std::min(lo, e);
    }
  }
  void add_to(int e, const Scalar& c) {
    if (e >= hi || c.is_zero()) return;
    auto it = terms.find(e);
    if (it == terms.end()) {
      terms.emplace(e, c);
      lo = std::min(lo, e);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  LaurentSeries truncated(long long h) const {
    LaurentSeries r(var, lo, std::min(hi, h));
    for (const auto& [e, c] : terms)
      if (e < r.hi) r.terms.emplace(e, c);
    return r;
  }

  LaurentSeries shifted(int k) const {
    LaurentSeries r(var, lo + k, sat_add(hi, k));
    for (const auto& [e, c] : terms) r.terms.emplace(e + k, c);
    return r;
  }

  LaurentSeries scaled(const Scalar& s) const {
    LaurentSeries r(var, lo, hi);
    if (s.is_zero()) return r;
    for (const auto& [e, c] : terms) r.terms.emplace(e, c * s);
    return r;
  }

  LaurentSeries derivative() const {
    LaurentSeries r(var, lo - 1, exact() ? kExact : hi - 1);
    for (const auto& [e, c] : terms)
      if (e != 0) r.terms.emplace(e - 1, c * Scalar(e));
    return r;
  }

  friend bool operator==(const LaurentSeries& a, const LaurentSeries& b) {
    return a.var == b.var && a.hi == b.hi && a.terms == b.terms;
  }

  // Agreement on every exponent known to both.
  bool agrees_with(const LaurentSeries& b) const {
    long long h = std::min(hi, b.hi);
    for (const auto& [e, c] : terms)
      if (e < h && b.coeff(e) != c) return false;
    for (const auto& [e, c] : b.terms)
      if (e < h && !terms.count(e)) return false;
    return true;
  }

  friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
    check_var(a, b);
    LaurentSeries r(a.var, std::min(a.lo, b.lo), std::min(a.hi, b.hi));
    for (const auto& [e, c] : a.terms)
      if (e < r.hi) r.terms.emplace(e, c);
    for (const auto& [e, c] : b.terms) r.add_to(e, c);
    return r;
  }
  friend LaurentSeries operator-(const LaurentSeries& a) { return a.scaled(Scalar(-1)); }
  friend LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b) { return a + (-b); }

  friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
    check_var(a, b);
    long long h = std::min(sat_add(a.lo, b.hi), sat_add(b.lo, a.hi));
    LaurentSeries r(a.var, a.lo + b.lo, h);
    for (const auto& [ea, ca] : a.terms) {
      if (ea + b.lo >= h) break;
      for (const auto& [eb, cb] : b.terms) {
        if (ea + eb >= h) break;
        r.add_to(ea + eb, ca * cb);
      }
    }
    return r;
  }

  LaurentSeries& operator+=(const LaurentSeries& b) { return *this = *this + b; }

  // Inverse of a nonzero series. An exact non-monomial needs an explicit output order.
  LaurentSeries invert_unit(std::optional<long long> out_hi = std::nullopt) const {
    if (terms.empty()) throw DivisionByZero("inverse of zero series in " + var);
    const int v = terms.begin()->first;
    const Scalar c0inv = terms.begin()->second.inv();
    long long h;
    if (exact()) {
      if (terms.size() == 1) return monomial(var, -v, c0inv);
      if (!out_hi) throw PrecisionExhausted("inverse of exact non-monomial series needs an order");
      h = *out_hi;
    } else {
      h = -v + (hi - v);
      if (out_hi) h = std::min(h, *out_hi);
    }
    LaurentSeries r(var, -v, h);
    std::vector<Scalar> rc;
    for (long long k = 0; -v + k < h; ++k) {
      Scalar s;
      if (k == 0) {
        s = c0inv;
      } else {
        for (const auto& [e, c] : terms) {
          long long j = e - v;
          if (j == 0) continue;
          if (j > k) break;
          s += c * rc[k - j];
        }
        s = -(s * c0inv);
      }
      rc.push_back(s);
      r.set(static_cast<int>(-v + k), s);
    }
    return r;
  }

  LaurentSeries pow(int n, std::optional<long long> out_hi = std::nullopt) const {
    if (n < 0) return invert_unit(out_hi).pow(-n, out_hi);
    LaurentSeries r = constant(var, 1);
    LaurentSeries base = *this;
    while (n > 0) {
      if (n & 1) r = r * base;
      n >>= 1;
      if (n) base = base * base;
    }
    if (out_hi) r = r.truncated(*out_hi);
    return r;
  }

  std::string str() const {
    std::string out;
    for (const auto& [e, c] : terms) {
      if (!out.empty()) out += " + ";
      out += "(" + c.str() + ")*" + var + "^" + std::to_string(e);
    }
    if (out.empty()) out = "0";
    if (!exact()) out += " + O(" + var + "^" + std::to_string(hi) + ")";
    return out;
  }

 private:
  static void check_var(const LaurentSeries& a, const LaurentSeries& b) {
    if (a.var != b.var) throw VariableMismatch(a.var + " vs " + b.var);
  }
};

}  // namespace phical
