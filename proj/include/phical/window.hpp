#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seriesxz.hpp"
#include "vec.hpp"

namespace phical {

enum class ShapeKind { IterLower, JointLower, Distribution };

inline std::string shape_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::IterLower: return "IterLower";
    case ShapeKind::JointLower: return "JointLower";
    default: return "Distribution";
  }
}

// IterLower(first, second) is F((first))((second)): the second variable is bounded below
// uniformly, the first only for each fixed exponent of the second.
struct Shape {
  ShapeKind kind = ShapeKind::Distribution;
  int first = 0;
  int second = 1;

  static Shape iter(int first, int second) { return {ShapeKind::IterLower, first, second}; }
  static Shape joint() { return {ShapeKind::JointLower, 0, 1}; }
  static Shape distribution() { return {ShapeKind::Distribution, 0, 1}; }
  friend bool operator==(const Shape& a, const Shape& b) {
    if (a.kind != b.kind) return false;
    return a.kind != ShapeKind::IterLower || (a.first == b.first && a.second == b.second);
  }
};

using Exps = std::vector<int>;
using Box = std::vector<std::pair<int, int>>;  // inclusive ranges per variable

inline bool in_box(const Exps& e, const Box& b) {
  for (size_t i = 0; i < e.size(); ++i)
    if (e[i] < b[i].first || e[i] > b[i].second) return false;
  return true;
}

inline Box symmetric_box(size_t nvars, int D) { return Box(nvars, {-D, D}); }

template <class F>
void for_each_in_box(const Box& b, F&& f) {
  for (const auto& [lo, hi] : b)
    if (lo > hi) return;
  Exps e(b.size());
  for (size_t i = 0; i < b.size(); ++i) e[i] = b[i].first;
  for (;;) {
    f(e);
    size_t i = b.size();
    while (i > 0) {
      --i;
      if (e[i] < b[i].second) {
        ++e[i];
        for (size_t j = i + 1; j < b.size(); ++j) e[j] = b[j].first;
        goto next;
      }
    }
    return;
  next:;
  }
}

// Finite multivariate Laurent polynomial with Scalar coefficients.
using PolyN = std::map<Exps, Scalar>;

// Coefficient table over a box of exponents, with a shape tag and the sub-box on which values are exact.
template <class V>
class WindowTable {
 public:
  std::vector<std::string> vars;
  Box window;
  Box valid;
  Shape shape;
  // Claimed lower bounds (JointLower: every variable; IterLower: the second variable).
  std::vector<std::optional<int>> lower;
  // IterLower: lower bound of the first variable for each exponent of the second.
  std::map<int, int> row_lower;
  bool finite_support = false;
  std::map<Exps, V> coeffs;

  WindowTable() = default;
  WindowTable(std::vector<std::string> vs, Box w, Shape s)
      : vars(std::move(vs)), window(w), valid(std::move(w)), shape(s), lower(vars.size()) {}

  size_t nvars() const { return vars.size(); }

  V get(const Exps& e) const {
    auto it = coeffs.find(e);
    return it == coeffs.end() ? V() : it->second;
  }
  void set(const Exps& e, const V& v) {
    if (value_is_zero(v)) {
      coeffs.erase(e);
    } else {
      coeffs[e] = v;
    }
  }
  void add(const Exps& e, const V& v) {
    if (value_is_zero(v)) return;
    auto it = coeffs.find(e);
    if (it == coeffs.end()) {
      coeffs.emplace(e, v);
    } else {
      it->second = it->second + v;
      if (value_is_zero(it->second)) coeffs.erase(it);
    }
  }

  // Coefficients claimed to be zero by the shape, even outside the window.
  bool known_zero(const Exps& e) const {
    if (shape.kind == ShapeKind::JointLower) {
      for (size_t i = 0; i < e.size(); ++i)
        if (lower[i] && e[i] < *lower[i]) return true;
    } else if (shape.kind == ShapeKind::IterLower) {
      int s = shape.second;
      if (lower[s] && e[s] < *lower[s]) return true;
      auto it = row_lower.find(e[s]);
      if (it != row_lower.end() && e[shape.first] < it->second) return true;
    }
    return false;
  }

  // Every stored coefficient respects the claimed support constraints.
  bool shape_sound() const {
    for (const auto& [e, v] : coeffs) {
      if (!in_box(e, window)) return false;
      if (known_zero(e)) return false;
    }
    return true;
  }

  WindowTable restricted(const Box& b) const {
    WindowTable r = *this;
    for (size_t i = 0; i < nvars(); ++i) {
      r.valid[i].first = std::max(valid[i].first, b[i].first);
      r.valid[i].second = std::min(valid[i].second, b[i].second);
    }
    return r;
  }

  friend WindowTable operator-(const WindowTable& a, const WindowTable& b) {
    if (a.vars != b.vars) throw VariableMismatch("table variables differ");
    WindowTable r = a;
    r.shape = a.shape == b.shape ? a.shape : Shape::distribution();
    for (size_t i = 0; i < a.nvars(); ++i) {
      r.window[i] = {std::max(a.window[i].first, b.window[i].first), std::min(a.window[i].second, b.window[i].second)};
      r.valid[i] = {std::max(a.valid[i].first, b.valid[i].first), std::min(a.valid[i].second, b.valid[i].second)};
    }
    r.coeffs.clear();
    for (const auto& [e, v] : a.coeffs)
      if (in_box(e, r.window)) r.add(e, v);
    for (const auto& [e, v] : b.coeffs)
      if (in_box(e, r.window)) r.add(e, value_scale(v, Scalar(-1)));
    return r;
  }

  // Nonzero coefficients inside the valid box.
  std::vector<std::pair<Exps, V>> nonzero_in_valid() const {
    std::vector<std::pair<Exps, V>> out;
    for (const auto& [e, v] : coeffs)
      if (in_box(e, valid)) out.emplace_back(e, v);
    return out;
  }
  bool zero_on_valid() const { return nonzero_in_valid().empty(); }
};

// Multiply a table by a finite polynomial; the valid box shrinks unless a lower bound covers it.
template <class V>
WindowTable<V> multiply_poly(const WindowTable<V>& T, const PolyN& p) {
  if (p.empty()) throw ShapeError("multiplier is zero");
  const size_t n = T.nvars();
  Exps dmin(n, 1 << 28), dmax(n, -(1 << 28));
  for (const auto& [d, c] : p)
    for (size_t i = 0; i < n; ++i) {
      dmin[i] = std::min(dmin[i], d[i]);
      dmax[i] = std::max(dmax[i], d[i]);
    }
  WindowTable<V> r(T.vars, T.window, T.shape);
  r.lower = T.lower;
  r.finite_support = T.finite_support;
  for (size_t i = 0; i < n; ++i) {
    r.window[i] = {T.window[i].first + dmin[i], T.window[i].second + dmax[i]};
    bool covered = T.shape.kind == ShapeKind::JointLower && T.lower[i] && T.valid[i].first <= *T.lower[i];
    if (T.shape.kind == ShapeKind::IterLower && static_cast<int>(i) == T.shape.second && T.lower[i] &&
        T.valid[i].first <= *T.lower[i])
      covered = true;
    r.valid[i] = {covered ? T.valid[i].first + dmin[i] : T.valid[i].first + dmax[i], T.valid[i].second + dmin[i]};
    if (T.lower[i]) r.lower[i] = *T.lower[i] + dmin[i];
  }
  r.row_lower.clear();
  if (T.shape.kind == ShapeKind::Distribution) {
    for (size_t i = 0; i < n; ++i)
      if (r.valid[i].first > r.valid[i].second)
        throw ShapeError("multiplier support does not fit the distribution window");
  }
  for (const auto& [e, v] : T.coeffs)
    for (const auto& [d, c] : p) {
      Exps f = e;
      for (size_t i = 0; i < n; ++i) f[i] += d[i];
      r.add(f, value_scale(v, c));
    }
  return r;
}

// Product of two tables of Scalars, following the legality rules of the shapes.
inline WindowTable<Scalar> product(const WindowTable<Scalar>& A, const WindowTable<Scalar>& B) {
  if (A.vars != B.vars) throw VariableMismatch("table variables differ");
  const size_t n = A.nvars();
  auto lower_bounded = [&](const WindowTable<Scalar>& T) {
    if (T.shape.kind == ShapeKind::JointLower) {
      for (size_t i = 0; i < n; ++i)
        if (!T.lower[i]) return false;
      return true;
    }
    return false;
  };
  const bool dA = A.shape.kind == ShapeKind::Distribution;
  const bool dB = B.shape.kind == ShapeKind::Distribution;
  if (dA || dB) {
    const WindowTable<Scalar>& D = dA ? A : B;
    const WindowTable<Scalar>& F = dA ? B : A;
    if (!F.finite_support) throw ShapeError("distribution times a series without finite support");
    PolyN p(F.coeffs.begin(), F.coeffs.end());
    for (const auto& [e, c] : p)
      for (size_t i = 0; i < n; ++i)
        if (e[i] < F.valid[i].first || e[i] > F.valid[i].second) throw ShapeError("multiplier support leaves its window");
    return multiply_poly(D, p);
  }
  if (A.shape.kind == ShapeKind::IterLower && B.shape.kind == ShapeKind::IterLower && !(A.shape == B.shape))
    throw ShapeError("iterated expansions in opposite orders");
  if (A.shape.kind == ShapeKind::IterLower || B.shape.kind == ShapeKind::IterLower) {
    if (!(A.shape.kind == B.shape.kind || lower_bounded(A) || lower_bounded(B)))
      throw ShapeError("iterated expansion times an unbounded table");
  }
  Shape s = A.shape.kind == ShapeKind::IterLower ? A.shape : B.shape;
  WindowTable<Scalar> r(A.vars, A.window, s);
  for (size_t i = 0; i < n; ++i) {
    auto lb = [&](const WindowTable<Scalar>& T) -> int {
      if (T.lower[i]) return *T.lower[i];
      int m = T.valid[i].first;
      for (const auto& [e, v] : T.coeffs) m = std::min(m, e[i]);
      return m;
    };
    const int la = lb(A), lbb = lb(B);
    r.window[i] = {A.window[i].first + B.window[i].first, A.window[i].second + B.window[i].second};
    r.valid[i] = {la + lbb, std::min(A.valid[i].second + lbb, B.valid[i].second + la)};
    if (A.lower[i] && B.lower[i]) r.lower[i] = *A.lower[i] + *B.lower[i];
  }
  r.finite_support = A.finite_support && B.finite_support;
  for (const auto& [ea, va] : A.coeffs)
    for (const auto& [eb, vb] : B.coeffs) {
      Exps f = ea;
      for (size_t i = 0; i < n; ++i) f[i] += eb[i];
      r.add(f, va * vb);
    }
  return r;
}

// Solve p*A = C for A with A[e] = 0 below `lowerA`, on the box where the recursion stays exact.
template <class V>
WindowTable<V> divide_exact(const WindowTable<V>& C, const PolyN& p, const Exps& lowerA) {
  if (p.empty()) throw DivisionByZero("zero multiplier");
  const size_t n = C.nvars();
  const Exps d0 = p.begin()->first;  // lexicographically least monomial
  const Scalar c0inv = p.begin()->second.inv();
  Exps dmax(n, -(1 << 28));
  for (const auto& [d, c] : p)
    for (size_t i = 0; i < n; ++i) dmax[i] = std::max(dmax[i], d[i]);
  WindowTable<V> A(C.vars, C.window, Shape::joint());
  for (size_t i = 0; i < n; ++i) {
    A.lower[i] = lowerA[i];
    A.window[i] = {lowerA[i], C.valid[i].second - d0[i]};
    A.valid[i] = A.window[i];
  }
  // lexicographic sweep: every A-value on the right-hand side is lex-smaller
  for_each_in_box(A.window, [&](const Exps& e) {
    Exps t = e;
    for (size_t i = 0; i < n; ++i) t[i] += d0[i];
    V acc = C.get(t);
    for (const auto& [d, c] : p) {
      if (d == d0) continue;
      Exps f = t;
      bool inside = true;
      for (size_t i = 0; i < n; ++i) {
        f[i] -= d[i];
        if (f[i] < lowerA[i]) inside = false;
      }
      if (!inside) continue;
      acc = acc + value_scale(A.get(f), -c);
    }
    A.set(e, value_scale(acc, c0inv));
  });
  return A;
}

// delta(n/d) = sum_m n^m d^-m on a symmetric window.
inline WindowTable<Scalar> delta_series(const std::string& numer_var, const std::string& denom_var, int D) {
  WindowTable<Scalar> t({numer_var, denom_var}, symmetric_box(2, D), Shape::distribution());
  for (int m = -D; m <= D; ++m) t.set({m, -m}, Scalar(1));
  return t;
}

struct DeltaTriple {
  WindowTable<Scalar> first, second, third;  // identity: first - second = third
};

// x0^-1 d((x1-x2)/x0), x0^-1 d((x2-x1)/(-x0)), x1^-1 d((x2+x0)/x1) over variables (x0, x1, x2).
inline DeltaTriple standard_delta(int D) {
  std::vector<std::string> v{"x0", "x1", "x2"};
  DeltaTriple r{WindowTable<Scalar>(v, symmetric_box(3, D), Shape::distribution()),
                WindowTable<Scalar>(v, symmetric_box(3, D), Shape::distribution()),
                WindowTable<Scalar>(v, symmetric_box(3, D), Shape::distribution())};
  for_each_in_box(symmetric_box(3, D), [&](const Exps& e) {
    const int a = e[0], b = e[1], c = e[2];
    const long n0 = -a - 1;
    if (c >= 0 && b == n0 - c) r.first.set(e, Scalar(binom(n0, c) * ((c % 2) ? -1 : 1)));
    if (b >= 0 && c == n0 - b) r.second.set(e, Scalar(binom(n0, b) * (((a + b + 1) % 2) ? -1 : 1)));
    const long n1 = -b - 1;
    if (a >= 0 && c == n1 - a) r.third.set(e, Scalar(binom(n1, a)));
  });
  return r;
}

// The same identity after x0 = x2 z, over variables (x1, x2, z).
inline DeltaTriple substituted_delta(int D) {
  std::vector<std::string> v{"x1", "x2", "z"};
  DeltaTriple r{WindowTable<Scalar>(v, symmetric_box(3, D), Shape::distribution()),
                WindowTable<Scalar>(v, symmetric_box(3, D), Shape::distribution()),
                WindowTable<Scalar>(v, symmetric_box(3, D), Shape::distribution())};
  for_each_in_box(symmetric_box(3, D), [&](const Exps& e) {
    const int b = e[0], c = e[1], a = e[2];
    const long n = -a - 1;
    // (x1-x2)^n (x2 z)^(-n-1), nonnegative powers of x2
    const int j = c - a;
    if (j >= 0 && b == -c - 1) r.first.set(e, Scalar(binom(n, j) * ((j % 2) ? -1 : 1)));
    // (x2-x1)^n (-x2 z)^(-n-1), nonnegative powers of x1
    if (b >= 0 && c == -b - 1) r.second.set(e, Scalar(binom(n, b) * (((a + b + 1) % 2) ? -1 : 1)));
    // x2^n (1+z)^n x1^(-n-1)
    const long m = -b - 1;
    if (a >= 0 && c == m) r.third.set(e, Scalar(binom(m, a)));
  });
  return r;
}

}  // namespace phical
