#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace phical {

using Rational = mpq_class;

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline Rational parse_rational(const std::string& s) {
  Rational r;
  if (s.empty() || r.set_str(s, 10) != 0) throw ParseError("bad rational '" + s + "'", 0);
  if (r.get_den() == 0) throw DivisionByZero("zero denominator in '" + s + "'");
  r.canonicalize();
  return r;
}

// Dense polynomial in q over the rationals; c[i] is the coefficient of q^i.
class Poly {
 public:
  std::vector<Rational> c;

  Poly() = default;
  explicit Poly(std::vector<Rational> cs) : c(std::move(cs)) { trim(); }
  static Poly constant(const Rational& r) { return Poly(std::vector<Rational>{r}); }
  static Poly monomial(int k, const Rational& r = 1) {
    std::vector<Rational> v(k + 1);
    v[k] = r;
    return Poly(std::move(v));
  }

  void trim() {
    for (auto& r : c) r.canonicalize();
    while (!c.empty() && c.back() == 0) c.pop_back();
  }
  bool is_zero() const { return c.empty(); }
  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_one() const { return c.size() == 1 && c[0] == 1; }
  bool is_constant() const { return c.size() <= 1; }
  const Rational& lead() const { return c.back(); }
  Rational at(int i) const { return i < static_cast<int>(c.size()) ? c[i] : Rational(0); }

  friend bool operator==(const Poly& a, const Poly& b) { return a.c == b.c; }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<Rational> r(std::max(a.c.size(), b.c.size()));
    for (size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a) {
    Poly r = a;
    for (auto& x : r.c) x = -x;
    return r;
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> r(a.c.size() + b.c.size() - 1);
    for (size_t i = 0; i < a.c.size(); ++i) {
      if (a.c[i] == 0) continue;
      for (size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
    }
    return Poly(std::move(r));
  }
  Poly scaled(const Rational& s) const {
    if (s == 0) return {};
    Poly r = *this;
    for (auto& x : r.c) x *= s;
    return r;
  }

  // Euclidean division: a = q*b + r with deg r < deg b.
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw DivisionByZero("polynomial division by zero");
    if (a.degree() < b.degree()) return {Poly(), a};
    std::vector<Rational> rem = a.c;
    std::vector<Rational> quo(a.c.size() - b.c.size() + 1);
    const Rational inv = 1 / b.lead();
    for (int i = static_cast<int>(quo.size()) - 1; i >= 0; --i) {
      Rational f = rem[i + b.degree()] * inv;
      if (f == 0) continue;
      quo[i] = f;
      for (size_t j = 0; j < b.c.size(); ++j) rem[i + j] -= f * b.c[j];
    }
    return {Poly(std::move(quo)), Poly(std::move(rem))};
  }

  Poly monic() const { return is_zero() ? Poly() : scaled(1 / lead()); }

  static Poly gcd(Poly a, Poly b) {
    while (!b.is_zero()) {
      Poly r = divmod(a, b).second;
      a = std::move(b);
      b = std::move(r);
    }
    return a.monic();
  }

  Rational eval(const Rational& x) const {
    Rational r = 0;
    for (int i = degree(); i >= 0; --i) r = r * x + c[i];
    return r;
  }

  std::string str() const {
    if (is_zero()) return "0";
    std::string out;
    for (int k = degree(); k >= 0; --k) {
      const Rational& a = c[k];
      if (a == 0) continue;
      std::string t;
      if (k == 0) {
        t = a.get_str();
      } else {
        if (a == 1) {
        } else if (a == -1) {
          t = "-";
        } else {
          t = a.get_str() + "*";
        }
        t += k == 1 ? "q" : "q^" + std::to_string(k);
      }
      if (!out.empty() && t[0] != '-') out += "+";
      out += t;
    }
    return out;
  }
};

// Element of Q(q) in canonical form: gcd(num, den) = 1, den monic.
class Scalar {
 public:
  Scalar() : den_(Poly::constant(1)) {}
  Scalar(long v) : num_(Poly::constant(v)), den_(Poly::constant(1)) {}  // NOLINT
  Scalar(const Rational& r) : num_(Poly::constant(r)), den_(Poly::constant(1)) {}  // NOLINT
  Scalar(Poly n, Poly d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

  static Scalar q() { return Scalar(Poly::monomial(1), Poly::constant(1)); }
  static Scalar from_poly(Poly n) { return Scalar(std::move(n), Poly::constant(1)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const { return den_.is_one() && num_.is_one(); }
  bool is_rational() const { return num_.is_constant() && den_.is_constant(); }
  Rational to_rational() const { return num_.at(0) / den_.at(0); }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.den_.is_one() && b.den_.is_one()) return raw(a.num_ + b.num_, a.den_);
    if (a.den_ == b.den_) return Scalar(a.num_ + b.num_, a.den_);
    Poly g = Poly::gcd(a.den_, b.den_);
    Poly da = Poly::divmod(a.den_, g).first;
    Poly db = Poly::divmod(b.den_, g).first;
    return Scalar(a.num_ * db + b.num_ * da, a.den_ * db);
  }
  friend Scalar operator-(const Scalar& a) { return raw(-a.num_, a.den_); }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.is_zero() || b.is_zero()) return Scalar();
    if (a.den_.is_one() && b.den_.is_one()) return raw(a.num_ * b.num_, a.den_);
    // cross-cancel before multiplying
    Poly g1 = Poly::gcd(a.num_, b.den_);
    Poly g2 = Poly::gcd(b.num_, a.den_);
    Poly n = Poly::divmod(a.num_, g1).first * Poly::divmod(b.num_, g2).first;
    Poly d = Poly::divmod(a.den_, g2).first * Poly::divmod(b.den_, g1).first;
    Rational l = d.lead();
    return raw(n.scaled(1 / l), d.scaled(1 / l));
  }
  Scalar inv() const {
    if (is_zero()) throw DivisionByZero("inverse of zero scalar");
    Rational l = num_.lead();
    return raw(den_.scaled(1 / l), num_.scaled(1 / l));
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inv(); }
  Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
  Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
  Scalar& operator*=(const Scalar& b) { return *this = *this * b; }

  Rational eval(const Rational& q0) const {
    Rational d = den_.eval(q0);
    if (d == 0) throw PoleAtSpecialization("denominator " + den_.str() + " vanishes at q=" + q0.get_str());
    return num_.eval(q0) / d;
  }

  std::string str() const {
    if (den_.is_one()) return num_.str();
    return "(" + num_.str() + ")/(" + den_.str() + ")";
  }

  static Scalar parse(const std::string& s);

 private:
  Poly num_, den_;

  static Scalar raw(Poly n, Poly d) {
    Scalar s;
    s.num_ = std::move(n);
    s.den_ = s.num_.is_zero() ? Poly::constant(1) : std::move(d);
    return s;
  }

  void normalize() {
    if (den_.is_zero()) throw DivisionByZero("zero denominator");
    if (num_.is_zero()) {
      den_ = Poly::constant(1);
      return;
    }
    if (!den_.is_constant()) {
      Poly g = Poly::gcd(num_, den_);
      if (!g.is_one()) {
        num_ = Poly::divmod(num_, g).first;
        den_ = Poly::divmod(den_, g).first;
      }
    }
    Rational l = den_.lead();
    if (l != 1) {
      num_ = num_.scaled(1 / l);
      den_ = den_.scaled(1 / l);
    }
  }
};

inline std::string to_string(const Scalar& s) { return s.str(); }

namespace detail {

struct ScalarReader {
  const std::string& s;
  size_t i = 0;

  [[noreturn]] void fail(const std::string& m) const { throw ParseError(m + " in scalar '" + s + "'", i); }
  bool peek(char ch) const { return i < s.size() && s[i] == ch; }
  void expect(char ch) {
    if (!peek(ch)) fail(std::string("expected '") + ch + "'");
    ++i;
  }
  std::string digits() {
    size_t st = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (st == i) fail("expected digits");
    return s.substr(st, i - st);
  }
  int exponent() {
    if (!peek('^')) return 1;
    ++i;
    return std::stoi(digits());
  }
  Poly term() {
    Rational c = 1;
    if (peek('q')) {
      ++i;
      return Poly::monomial(exponent(), c);
    }
    std::string num = digits();
    if (peek('/')) {
      ++i;
      num += "/" + digits();
    }
    c = parse_rational(num);
    if (peek('*')) {
      ++i;
      expect('q');
      return Poly::monomial(exponent(), c);
    }
    return Poly::constant(c);
  }
  Poly poly() {
    Poly p;
    bool neg = false;
    if (peek('-')) {
      neg = true;
      ++i;
    }
    for (;;) {
      Poly t = term();
      p = neg ? p - t : p + t;
      if (peek('+')) {
        neg = false;
      } else if (peek('-')) {
        neg = true;
      } else {
        break;
      }
      ++i;
    }
    return p;
  }
};

}  // namespace detail

inline Scalar Scalar::parse(const std::string& s) {
  detail::ScalarReader r{s};
  Scalar out;
  if (r.peek('(')) {
    ++r.i;
    Poly n = r.poly();
    r.expect(')');
    r.expect('/');
    r.expect('(');
    Poly d = r.poly();
    r.expect(')');
    if (d.is_zero()) r.fail("zero denominator");
    out = Scalar(std::move(n), std::move(d));
  } else {
    out = Scalar::from_poly(r.poly());
  }
  if (r.i != s.size()) r.fail("trailing characters");
  return out;
}

// Parameter value: symbolic q, or a rational specialization.
struct QValue {
  bool symbolic = true;
  Rational value = 0;

  static QValue sym() { return {}; }
  static QValue at(const Rational& r) { return {false, r}; }
  Scalar scalar() const { return symbolic ? Scalar::q() : Scalar(value); }
  std::string str() const { return symbolic ? "symbolic" : value.get_str(); }
  static QValue parse(const std::string& s) {
    if (s == "symbolic" || s == "q") return sym();
    return at(parse_rational(s));
  }
};

}  // namespace phical
