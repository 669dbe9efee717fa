#pragma once

#include <climits>
#include <functional>
#include <type_traits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "associates.hpp"
#include "fockrep.hpp"

namespace phical {

// Lower bound reported for a field that vanishes on a vector.
inline constexpr int kNoLower = INT_MAX / 4;

// Homogeneous multiplier p(x1,x2) = sum_i c_i x1^i x2^(d-i) = x2^d p~(x1/x2).
struct Multiplier {
  std::vector<Scalar> c{Scalar(1)};
  int d = 0;

  static Multiplier one() { return {}; }
  // (x1 - x2)^k
  static Multiplier power(int k) {
    Multiplier m;
    m.c.clear();
    for (int i = 0; i <= k; ++i) m.c.push_back(Scalar(binom(k, i) * (((k - i) % 2) ? -1 : 1)));
    m.d = k;
    return m;
  }
  // x2^deg p~(x1/x2) for a polynomial p~ given by its coefficients.
  static Multiplier ratio(std::vector<Scalar> cs) {
    while (!cs.empty() && cs.back().is_zero()) cs.pop_back();
    if (cs.empty()) throw DivisionByZero("zero multiplier");
    Multiplier m;
    m.c = std::move(cs);
    m.d = static_cast<int>(m.c.size()) - 1;
    return m;
  }
  // A polynomial in t.
  static Multiplier from_expr(const RationalExpr& e) {
    LaurentSeries s = to_laurent(e, "t");
    if (s.terms.empty() || s.terms.begin()->first < 0) throw ParseError("multiplier must be a nonzero polynomial in t", 0);
    std::vector<Scalar> cs(s.terms.rbegin()->first + 1);
    for (const auto& [i, v] : s.terms) cs[i] = v;
    return ratio(cs);
  }

  friend Multiplier operator*(const Multiplier& a, const Multiplier& b) {
    Multiplier m;
    m.c.assign(a.c.size() + b.c.size() - 1, Scalar());
    for (size_t i = 0; i < a.c.size(); ++i)
      for (size_t j = 0; j < b.c.size(); ++j) m.c[i + j] += a.c[i] * b.c[j];
    m.d = a.d + b.d;
    return m;
  }
  friend bool operator==(const Multiplier& a, const Multiplier& b) { return a.c == b.c && a.d == b.d; }

  int imax() const { return static_cast<int>(c.size()) - 1; }
  int degree() const { return imax(); }

  // Multiplicity of the zero of p~ at t = 1.
  int zero_order_at_one() const {
    std::vector<Scalar> p = c;
    int k = 0;
    for (;;) {
      Scalar v;
      for (const auto& x : p) v += x;
      if (!v.is_zero() || p.size() <= 1) return k;
      // synthetic division by (t - 1)
      std::vector<Scalar> out(p.size() - 1);
      Scalar carry;
      for (size_t i = p.size() - 1; i >= 1; --i) {
        carry += p[i];
        out[i - 1] = carry;
      }
      p = std::move(out);
      ++k;
    }
  }
  // p~^(k)(1) / k!
  Scalar taylor_at_one(int k) const {
    Scalar s;
    for (size_t i = 0; i < c.size(); ++i) s += c[i] * Scalar(binom(static_cast<long>(i), k));
    return s;
  }
  // z^r coefficient of p~(e^z)
  Scalar g(int r) const {
    Scalar s;
    for (size_t i = 0; i < c.size(); ++i) {
      Rational v = 1;
      for (int j = 0; j < r; ++j) v *= static_cast<long>(i);
      s += c[i] * Scalar(v);
    }
    return s * Scalar(1 / factorial(r));
  }
  std::map<std::pair<int, int>, Scalar> bivariate() const {
    std::map<std::pair<int, int>, Scalar> out;
    for (size_t i = 0; i < c.size(); ++i)
      if (!c[i].is_zero()) out[{static_cast<int>(i), d - static_cast<int>(i)}] = c[i];
    return out;
  }
  std::string str() const {
    std::string s;
    for (size_t i = c.size(); i-- > 0;) {
      if (c[i].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += "(" + c[i].str() + ")*x1^" + std::to_string(i) + "*x2^" + std::to_string(d - static_cast<int>(i));
    }
    return s;
  }
};

// A field a(x) = sum_t a_[t] x^t in E(W); coefficients are memoized per basis vector.
template <class K>
class Field {
 public:
  using State = Vec<K>;
  std::string label;

  explicit Field(std::string l) : label(std::move(l)) {}
  virtual ~Field() = default;
  Field(const Field&) = delete;
  Field& operator=(const Field&) = delete;

  // coeff(t, w) = 0 for t < lower(w)
  int lower(const K& w) const {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = lower_memo_.find(w);
      if (it != lower_memo_.end()) return it->second;
    }
    int l = compute_lower(w);
    std::lock_guard<std::mutex> lk(mu_);
    return lower_memo_.emplace(w, l).first->second;
  }
  int lower(const State& v) const {
    int l = kNoLower;
    for (const auto& [k, c] : v.terms) l = std::min(l, lower(k));
    return l;
  }

  State coeff(int t, const K& w) const {
    if (t < lower(w)) return {};
    const auto key = std::make_pair(t, w);
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    State s = compute(t, w);
    std::lock_guard<std::mutex> lk(mu_);
    return memo_.emplace(key, std::move(s)).first->second;
  }
  State coeff(int t, const State& v) const {
    State out;
    for (const auto& [k, c] : v.terms) out.add(coeff(t, k), c);
    return out;
  }

 protected:
  virtual int compute_lower(const K& w) const = 0;
  virtual State compute(int t, const K& w) const = 0;

 private:
  mutable std::mutex mu_;
  mutable std::map<K, int> lower_memo_;
  mutable std::map<std::pair<int, K>, State> memo_;
};

template <class K>
using FieldPtr = std::shared_ptr<const Field<K>>;

// 1_W: only the x^0 coefficient, equal to the identity.
template <class K>
class IdentityField : public Field<K> {
 public:
  IdentityField() : Field<K>("1_W") {}

 protected:
  int compute_lower(const K&) const override { return 0; }
  Vec<K> compute(int t, const K& w) const override { return t == 0 ? Vec<K>(w) : Vec<K>(); }
};

// Generating field sum_n g_n x^(-n-1) of a beta-gamma module.
class GenField : public Field<Word> {
 public:
  GenField(BgModule M, Gen g, std::string l) : Field<Word>(std::move(l)), M_(std::move(M)), g_(g) {}
  const BgModule& module() const { return M_; }
  Gen gen() const { return g_; }

 protected:
  int compute_lower(const Word& w) const override { return -M_.annihilation_bound(w); }
  ModuleState compute(int t, const Word& w) const override { return M_.act(static_cast<int>(g_), -t - 1, w); }

 private:
  BgModule M_;
  Gen g_;
};

// Square matrix of Laurent polynomials acting on Q^dim with basis 0..dim-1.
using LMatrix = std::vector<std::vector<LaurentSeries>>;

inline LMatrix zero_matrix(int dim) { return LMatrix(dim, std::vector<LaurentSeries>(dim, LaurentSeries("x"))); }

class MatrixField : public Field<int> {
 public:
  MatrixField(LMatrix m, std::string l) : Field<int>(std::move(l)), M_(std::move(m)) {
    for (const auto& row : M_)
      for (const auto& e : row)
        if (!e.exact()) throw PrecisionExhausted("matrix field entries must be exact Laurent polynomials");
  }
  const LMatrix& matrix() const { return M_; }
  int dim() const { return static_cast<int>(M_.size()); }

 protected:
  int compute_lower(const int& j) const override {
    int l = kNoLower;
    for (const auto& row : M_)
      if (auto v = row.at(j).valuation()) l = std::min(l, *v);
    return l;
  }
  Vec<int> compute(int t, const int& j) const override {
    Vec<int> out;
    for (int i = 0; i < dim(); ++i) out.add(i, M_[i][j].coeff(t));
    return out;
  }

 private:
  LMatrix M_;
};

// sum_i s_i f_i
template <class K>
class LinearField : public Field<K> {
 public:
  LinearField(std::vector<std::pair<Scalar, FieldPtr<K>>> terms, std::string l)
      : Field<K>(std::move(l)), terms_(std::move(terms)) {}

 protected:
  int compute_lower(const K& w) const override {
    int l = kNoLower;
    for (const auto& [s, f] : terms_) l = std::min(l, f->lower(w));
    return l;
  }
  Vec<K> compute(int t, const K& w) const override {
    Vec<K> out;
    for (const auto& [s, f] : terms_) out.add(f->coeff(t, w), s);
    return out;
  }

 private:
  std::vector<std::pair<Scalar, FieldPtr<K>>> terms_;
};

// Y_E^e(a(x),z)b(x) for phi(x,z) = x e^z:
//   p(xe^z,x)^{-1} (p(x1,x) a(x1) b(x))|_{x1 = xe^z}
// with P(x1,x) = p(x1,x) a(x1) b(x) w required to be jointly lower truncated.
// Joint truncation is certified per vector by true row lower bounds; later rows are re-checked on demand.
template <class K>
class YPhiProduct {
 public:
  using State = Vec<K>;

  YPhiProduct(FieldPtr<K> a, FieldPtr<K> b, Multiplier p, int window = 4)
      : a_(std::move(a)), b_(std::move(b)), p_(std::move(p)), window_(window), ord_(p_.zero_order_at_one()) {}

  const Multiplier& multiplier() const { return p_; }
  const FieldPtr<K>& left() const { return a_; }
  const FieldPtr<K>& right() const { return b_; }
  // Modes n >= ord() vanish.
  int ord() const { return ord_; }

  struct Cert {
    bool zero = false;
    int L1 = 0, L2 = 0;
    int rows_to = 0;
  };

  // Joint lower bounds (L1 in x1, L2 in x) of P on w; throws UncertifiedMultiplier.
  Cert cert(const K& w) const {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = certs_.find(w);
      if (it != certs_.end()) return it->second;
    }
    Cert c = certify(w);
    std::lock_guard<std::mutex> lk(mu_);
    return certs_.emplace(w, c).first->second;
  }

  State P(int m, int np, const K& w) const {
    const auto key = std::make_tuple(m, np, w);
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = P_.find(key);
      if (it != P_.end()) return it->second;
    }
    State out;
    for (int i = 0; i <= p_.imax(); ++i) {
      if (p_.c[i].is_zero()) continue;
      State v = b_->coeff(np - p_.d + i, w);
      if (v.is_zero()) continue;
      out.add(a_->coeff(m - i, v), p_.c[i]);
    }
    std::lock_guard<std::mutex> lk(mu_);
    return P_.emplace(key, std::move(out)).first->second;
  }

  // x^s z^r coefficient of P(x e^z, x).
  State S(int s, int r, const K& w) const {
    const Cert c = cert(w);
    if (c.zero || s < c.L1 + c.L2) return {};
    const auto key = std::make_tuple(s, r, w);
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = S_.find(key);
      if (it != S_.end()) return it->second;
    }
    extend(w, s - c.L1);
    State out;
    const Rational rf = 1 / factorial(r);
    for (int m = c.L1; m <= s - c.L2; ++m) {
      State v = P(m, s - m, w);
      if (v.is_zero()) continue;
      Rational f = rf;
      for (int j = 0; j < r; ++j) f *= m;
      out.add(v, Scalar(f));
    }
    std::lock_guard<std::mutex> lk(mu_);
    return S_.emplace(key, std::move(out)).first->second;
  }

  // z^j coefficient of z^ord / p~(e^z).
  Scalar B(int j) const {
    std::lock_guard<std::mutex> lk(bmu_);
    while (static_cast<int>(B_.size()) <= j) {
      const int k = static_cast<int>(B_.size());
      const Scalar g0inv = p_.g(ord_).inv();
      if (k == 0) {
        B_.push_back(g0inv);
        continue;
      }
      Scalar s;
      for (int i = 1; i <= k; ++i) s += p_.g(ord_ + i) * B_[k - i];
      B_.push_back(-(s * g0inv));
    }
    return B_[j];
  }

  int mode_lower(int n, const K& w) const {
    if (n >= ord_) return kNoLower;
    const Cert c = cert(w);
    if (c.zero) return kNoLower;
    return c.L1 + c.L2 - p_.d;
  }

  State mode_coeff(int n, int t, const K& w) const {
    if (n >= ord_) return {};
    const int R = ord_ - n - 1;
    State out;
    for (int r = 0; r <= R; ++r) {
      State s = S(t + p_.d, r, w);
      if (!s.is_zero()) out.add(s, B(R - r));
    }
    return out;
  }

 private:
  FieldPtr<K> a_, b_;
  Multiplier p_;
  int window_;
  int ord_;
  mutable std::mutex mu_, bmu_;
  mutable std::map<K, Cert> certs_;
  mutable std::map<std::tuple<int, int, K>, State> P_, S_;
  mutable std::vector<Scalar> B_;

  int scan_cap() const { return 8 * window_ + 16; }

  // Lowest x1-exponent with a nonzero coefficient in row x^np of P (a valid lower bound in any case).
  int row_bound(int np, const K& w) const {
    int cand = kNoLower;
    for (int i = 0; i <= p_.imax(); ++i) {
      if (p_.c[i].is_zero()) continue;
      State v = b_->coeff(np - p_.d + i, w);
      if (v.is_zero()) continue;
      const int l = a_->lower(v);
      if (l < kNoLower) cand = std::min(cand, i + l);
    }
    if (cand == kNoLower) return kNoLower;
    for (int m = cand; m < cand + scan_cap(); ++m)
      if (!P(m, np, w).is_zero()) return m;
    return cand + scan_cap();
  }

  Cert certify(const K& w) const {
    Cert c;
    const int lb = b_->lower(w);
    if (lb == kNoLower) {
      c.zero = true;
      return c;
    }
    c.L2 = lb + p_.d - p_.imax();
    std::vector<int> rows;
    bool all_zero = true;
    for (int D = window_; D <= 4 * window_; D *= 2) {
      while (static_cast<int>(rows.size()) <= 2 * D) rows.push_back(row_bound(c.L2 + static_cast<int>(rows.size()), w));
      const int first = *std::min_element(rows.begin(), rows.begin() + D + 1);
      const int second = *std::min_element(rows.begin() + D + 1, rows.begin() + 2 * D + 1);
      if (first == kNoLower && second == kNoLower) continue;
      all_zero = false;
      if (second >= first) {
        c.L1 = first;
        c.rows_to = c.L2 + 2 * D;
        return c;
      }
    }
    // P vanishes on every scanned row: treated as zero, as the field b(x) w vanishes there as well
    if (all_zero) {
      c.zero = true;
      return c;
    }
    throw UncertifiedMultiplier(p_.str() + " does not make " + a_->label + "(x1)" + b_->label +
                                "(x2) lower truncated on the certification window");
  }

  void extend(const K& w, int upto) const {
    int from;
    Cert c;
    {
      std::lock_guard<std::mutex> lk(mu_);
      c = certs_.at(w);
      from = c.rows_to + 1;
    }
    if (upto < from) return;
    for (int np = from; np <= upto; ++np)
      if (row_bound(np, w) < c.L1)
        throw UncertifiedMultiplier("row x^" + std::to_string(np) + " of " + a_->label + "(x1)" + b_->label +
                                    "(x2) dips below the certified bound");
    std::lock_guard<std::mutex> lk(mu_);
    auto& cc = certs_.at(w);
    cc.rows_to = std::max(cc.rows_to, upto);
  }
};

// The field a(x)_n^e b(x).
template <class K>
class ModeField : public Field<K> {
 public:
  ModeField(std::shared_ptr<const YPhiProduct<K>> prod, int n)
      : Field<K>("(" + prod->left()->label + ")_" + std::to_string(n) + "(" + prod->right()->label + ")"),
        prod_(std::move(prod)),
        n_(n) {}
  int mode() const { return n_; }

 protected:
  int compute_lower(const K& w) const override { return prod_->mode_lower(n_, w); }
  Vec<K> compute(int t, const K& w) const override { return prod_->mode_coeff(n_, t, w); }

 private:
  std::shared_ptr<const YPhiProduct<K>> prod_;
  int n_;
};

// Candidate list: extra ratio polynomials times (x1 - x2)^k, ordered by degree.
inline std::vector<Multiplier> default_candidates(int kmax, const std::vector<Multiplier>& extra = {}) {
  std::vector<Multiplier> base{Multiplier::one()};
  base.insert(base.end(), extra.begin(), extra.end());
  std::vector<Multiplier> out;
  for (const auto& b : base)
    for (int k = 0; k <= kmax; ++k) {
      Multiplier m = b * Multiplier::power(k);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
  std::stable_sort(out.begin(), out.end(), [](const Multiplier& a, const Multiplier& b) { return a.d < b.d; });
  return out;
}

struct MultiplierSearch {
  std::optional<Multiplier> found;
  CheckReport report{"find_multiplier"};
};

// Least candidate making p(x1,x2) a(x1) b(x2) w jointly lower truncated for every sampled w.
template <class K>
MultiplierSearch find_multiplier(const FieldPtr<K>& a, const FieldPtr<K>& b, const std::vector<K>& sample,
                                 const std::vector<Multiplier>& candidates, int window = 4) {
  MultiplierSearch out;
  out.report.meta["pair"] = a->label + " , " + b->label;
  Json tried = Json::array();
  for (const auto& p : candidates) {
    YPhiProduct<K> prod(a, b, p, window);
    bool ok = true;
    int L1 = kNoLower;
    try {
      for (const auto& w : sample) {
        auto c = prod.cert(w);
        if (!c.zero) L1 = std::min(L1, c.L1);
      }
    } catch (const UncertifiedMultiplier&) {
      ok = false;
    }
    tried.push_back(Json{{"multiplier", p.str()}, {"certified", ok}});
    if (ok) {
      out.found = p;
      out.report.meta["multiplier"] = p.str();
      out.report.meta["k"] = p.zero_order_at_one();
      out.report.meta["degree"] = p.d;
      out.report.meta["shape"] = "JointLower";
      break;
    }
  }
  out.report.meta["tried"] = tried;
  out.report.checked = tried.size();
  if (!out.found) {
    out.report.status = Status::Inconclusive;
    out.report.meta["reason"] = "no candidate certifies within the window";
  }
  return out;
}

// Registry of fields and their Y_E^e products for phi = x e^z.
template <class K>
class FieldSpace {
 public:
  FieldSpace(std::vector<K> sample, std::vector<Multiplier> candidates, int window = 4)
      : sample_(std::move(sample)), candidates_(std::move(candidates)), window_(window),
        one_(std::make_shared<IdentityField<K>>()) {}

  const std::vector<K>& sample() const { return sample_; }
  FieldPtr<K> identity() const { return one_; }
  int window() const { return window_; }

  void declare(const FieldPtr<K>& a, const FieldPtr<K>& b, const Multiplier& p) {
    std::lock_guard<std::mutex> lk(mu_);
    products_[{a.get(), b.get()}] = std::make_shared<YPhiProduct<K>>(a, b, p, window_);
    keep_.push_back(a);
    keep_.push_back(b);
  }

  std::shared_ptr<const YPhiProduct<K>> product(const FieldPtr<K>& a, const FieldPtr<K>& b) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = products_.find({a.get(), b.get()});
      if (it != products_.end()) return it->second;
    }
    MultiplierSearch s = find_multiplier(a, b, sample_, candidates_, window_);
    if (!s.found) throw NoMultiplierFound(a->label + " , " + b->label);
    auto prod = std::make_shared<YPhiProduct<K>>(a, b, *s.found, window_);
    std::lock_guard<std::mutex> lk(mu_);
    keep_.push_back(a);
    keep_.push_back(b);
    return products_.emplace(std::make_pair(a.get(), b.get()), prod).first->second;
  }

  // Modes below mode_floor and products nested deeper than closure_depth are outside the computed slice.
  int mode_floor = INT_MIN;
  int closure_depth = 2;

  int depth(const FieldPtr<K>& f) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = depth_.find(f.get());
    return it == depth_.end() ? 0 : it->second;
  }

  FieldPtr<K> mode(const FieldPtr<K>& a, int n, const FieldPtr<K>& b) {
    const auto key = std::make_tuple(a.get(), n, b.get());
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = modes_.find(key);
      if (it != modes_.end()) return it->second;
    }
    if (n < mode_floor)
      throw WindowEscape("mode " + std::to_string(n) + " below the computed z-window (floor " + std::to_string(mode_floor) + ")");
    const int d = std::max(depth(a), depth(b)) + 1;
    if (d > closure_depth)
      throw WindowEscape("product nesting " + std::to_string(d) + " exceeds closure depth " + std::to_string(closure_depth));
    FieldPtr<K> f = std::make_shared<ModeField<K>>(product(a, b), n);
    std::lock_guard<std::mutex> lk(mu_);
    depth_[f.get()] = d;
    return modes_.emplace(key, f).first->second;
  }

 private:
  std::vector<K> sample_;
  std::vector<Multiplier> candidates_;
  int window_;
  FieldPtr<K> one_;
  mutable std::mutex mu_;
  std::map<const Field<K>*, int> depth_;
  std::map<std::pair<const Field<K>*, const Field<K>*>, std::shared_ptr<YPhiProduct<K>>> products_;
  std::map<std::tuple<const Field<K>*, int, const Field<K>*>, FieldPtr<K>> modes_;
  std::vector<FieldPtr<K>> keep_;
};

// y_phi with a given multiplier, certified on the sample before use.
template <class K>
std::shared_ptr<const YPhiProduct<K>> y_phi(const FieldPtr<K>& a, const FieldPtr<K>& b, const Multiplier& p,
                                            const std::vector<K>& sample, int window = 4) {
  auto prod = std::make_shared<YPhiProduct<K>>(a, b, p, window);
  for (const auto& w : sample) prod->cert(w);
  return prod;
}

template <class K>
FieldPtr<K> mode_field(const std::shared_ptr<const YPhiProduct<K>>& prod, int n) {
  return std::make_shared<ModeField<K>>(prod, n);
}

// Coefficients of x1^m x2^n of a(x1) b(x2) w for (m,n) in the window; lives in W((x1))((x2)).
template <class K>
WindowTable<Vec<K>> product_window(const FieldPtr<K>& a, const FieldPtr<K>& b, const K& w, int D) {
  if constexpr (std::is_same_v<K, Word>) {
    for (const auto* f : {a.get(), b.get()})
      if (const auto* g = dynamic_cast<const GenField*>(f); g && !g->module().in_bounds(w))
        throw WindowEscape("state " + word_str(w) + " outside the module policy");
  }
  WindowTable<Vec<K>> t({"x1", "x2"}, symmetric_box(2, D), Shape::iter(0, 1));
  const int lb = b->lower(w);
  if (lb < kNoLower) t.lower[1] = lb;
  for (int n = -D; n <= D; ++n) {
    Vec<K> v = b->coeff(n, w);
    if (v.is_zero()) continue;
    const int la = a->lower(v);
    if (la < kNoLower) t.row_lower[n] = la;
    for (int m = -D; m <= D; ++m) t.set({m, n}, a->coeff(m, v));
  }
  return t;
}

template <class K>
std::string vec_str(const Vec<K>& v) {
  if constexpr (std::is_same_v<K, Word>) {
    return state_str(v);
  } else {
    if (v.is_zero()) return "0";
    std::string s;
    for (const auto& [k, c] : v.terms) {
      if (!s.empty()) s += " + ";
      s += "(" + c.str() + ")*e" + std::to_string(k);
    }
    return s;
  }
}

template <class K>
Json key_json(const K& k) {
  if constexpr (std::is_same_v<K, Word>) {
    return word_str(k);
  } else {
    return k;
  }
}

// Field equality on sampled vectors and x-exponents in [-D, D].
template <class K>
void compare_fields(CheckReport& rep, const Field<K>& f, const Field<K>& g, const std::vector<K>& sample, int D, Json where) {
  for (const auto& w : sample)
    for (int t = -D; t <= D; ++t) {
      ++rep.checked;
      Vec<K> a = f.coeff(t, w), b = g.coeff(t, w);
      if (a != b) {
        Json loc = where;
        loc["state"] = key_json(w);
        loc["x"] = t;
        rep.fail(loc, vec_str(a), vec_str(b));
      }
    }
}

// Rational function of t as numerator and denominator series in `var`.
inline std::pair<LaurentSeries, LaurentSeries> ratio_parts(const RationalExpr& q, const std::string& var = "t") {
  const int ti = var_index("t");
  auto conv = [&](const MPoly& p) {
    LaurentSeries s(var);
    for (const auto& [m, c] : p.terms) {
      for (int i = 0; i < 6; ++i)
        if (i != ti && m[i] != 0) throw VariableMismatch("ratio function involves " + alphabet()[i]);
      s.add_to(m[ti], c);
    }
    s.lo = s.terms.empty() ? 0 : s.terms.begin()->first;
    return s;
  };
  return {conv(q.num), conv(q.den)};
}

// iota_{x2,x1} q(x1/x2): expansion in nonnegative powers of t, known below t^order.
inline LaurentSeries iota_ratio(const RationalExpr& q, int order) {
  auto [n, d] = ratio_parts(q);
  return series_quotient(n, d, order);
}

// s^k q(e^s) as a power series in s, known below s^order.
inline LaurentSeries exp_ratio(const RationalExpr& q, int k, int order) {
  auto [n, d] = ratio_parts(q);
  const int hi = order + k + 4;
  auto at_exp = [&](const LaurentSeries& p) {
    LaurentSeries s("s", 0, hi);
    for (int r = 0; r < hi; ++r) {
      Scalar v;
      for (const auto& [j, c] : p.terms) {
        Rational f = 1;
        for (int i = 0; i < r; ++i) f *= j;
        v += c * Scalar(f);
      }
      s.set(r, v * Scalar(1 / factorial(r)));
    }
    return s;
  };
  LaurentSeries out = series_quotient(at_exp(n), at_exp(d), order - k).shifted(k);
  if (auto v = out.valuation(); v && *v < 0)
    throw ExpansionDirectionError("s^k q(e^s) has a pole of order " + std::to_string(-*v) + " at s = 0");
  return out;
}

template <class K>
struct LocalityTerm {
  RationalExpr q;  // in t = x1/x2
  FieldPtr<K> u, v;
};

// p(x1/x2) a(x1) b(x2) = p(x1/x2) sum_i iota_{x2,x1}(q_i(x1/x2)) u_i(x2) v_i(x1)
template <class K>
struct LocalityRelation {
  std::string name;
  FieldPtr<K> a, b;
  Multiplier p;
  std::vector<LocalityTerm<K>> terms;
};

// Relations of the trigonometric generating fields in locality form:
//   (q x1/x2 - 1) b(x1)b(x2) = (q x1/x2 - 1) iota (x1/x2 - q)/(q x1/x2 - 1) b(x2)b(x1), likewise for gamma,
//   (x1/x2 - 1) b(x1)g(x2) = (x1/x2 - 1) iota (q x1/x2 - 1)/(x1/x2 - q) g(x2)b(x1).
inline std::vector<LocalityRelation<Word>> trig_relations(const FieldPtr<Word>& beta, const FieldPtr<Word>& gamma,
                                                          const Scalar& q) {
  const RationalExpr t = RationalExpr::variable("t"), Q = RationalExpr::constant(q),
                     one = RationalExpr::constant(Scalar(1));
  const RationalExpr same = (t - Q) / (Q * t - one), cross = (Q * t - one) / (t - Q);
  const Multiplier pq = Multiplier::ratio({Scalar(-1), q});
  return {{"beta-beta", beta, beta, pq, {{same, beta, beta}}},
          {"gamma-gamma", gamma, gamma, pq, {{same, gamma, gamma}}},
          {"beta-gamma", beta, gamma, Multiplier::power(1), {{cross, gamma, beta}}}};
}

namespace detail {

template <class K>
struct RatioCache {
  const RationalExpr* q;
  LaurentSeries s{"t", 0, 0};
  Scalar at(int k) {
    if (k >= s.hi) s = iota_ratio(*q, std::max<int>(k + 8, 2 * static_cast<int>(s.hi)));
    return k < s.lo ? Scalar() : s.coeff(k);
  }
};

}  // namespace detail

// Both sides of the locality relation on (x1, x2) in [-D, D]^2, applied to sampled vectors.
template <class K>
CheckReport check_strig_locality(const LocalityRelation<K>& rel, const std::vector<K>& sample, int D) {
  CheckReport rep("strig_locality");
  rep.meta["relation"] = rel.name;
  rep.meta["multiplier"] = rel.p.str();
  rep.meta["window"] = D;
  std::vector<detail::RatioCache<K>> Q;
  for (const auto& t : rel.terms) Q.push_back({&t.q});
  for (const auto& w : sample)
    for (int A = -D; A <= D; ++A)
      for (int Bx = -D; Bx <= D; ++Bx) {
        Vec<K> lhs, rhs;
        for (int i = 0; i <= rel.p.imax(); ++i) {
          const Scalar ci = rel.p.c[i];
          if (ci.is_zero()) continue;
          // a(x1) b(x2) at x1^(A-i) x2^(B-d+i)
          lhs.add(rel.a->coeff(A - i, rel.b->coeff(Bx - rel.p.d + i, w)), ci);
          for (size_t j = 0; j < rel.terms.size(); ++j) {
            const auto& T = rel.terms[j];
            const int lo_t = iota_ratio(T.q, 1).lo;
            // iota q = sum_k Q_k x1^k x2^-k; u(x2) v(x1) at x1^(A-i-k) x2^(B-d+i+k)
            const int lv = T.v->lower(w);
            if (lv == kNoLower) continue;
            for (int k = lo_t; A - i - k >= lv; ++k) {
              const Scalar qk = Q[j].at(k);
              if (qk.is_zero()) continue;
              rhs.add(T.u->coeff(Bx - rel.p.d + i + k, T.v->coeff(A - i - k, w)), ci * qk);
            }
          }
        }
        ++rep.checked;
        if (lhs != rhs) rep.fail(Json{{"x1", A}, {"x2", Bx}, {"state", key_json(w)}}, vec_str(lhs), vec_str(rhs));
      }
  return rep;
}

// (x1-x2)^k Y(a,x1)Y(b,x2) theta = (x1-x2)^k sum_i iota_{x2,x1} q_i(e^{x1-x2}) Y(u_i,x2)Y(v_i,x1) theta,
// with k the multiplicity of the zero of p at 1 and Y = Y_E^e; compared on fields of the span.
template <class K>
CheckReport check_locality_conversion(const LocalityRelation<K>& rel, FieldSpace<K>& space,
                                      const std::vector<FieldPtr<K>>& thetas, int D, int Dt) {
  CheckReport rep("locality_conversion");
  const int k = rel.p.zero_order_at_one();
  rep.meta["relation"] = rel.name;
  rep.meta["k"] = k;
  rep.meta["window"] = D;
  const int order = 4 * D + 8;
  std::vector<LaurentSeries> Qs;
  for (const auto& T : rel.terms) Qs.push_back(exp_ratio(T.q, k, order));
  for (const auto& theta : thetas) {
    const int ord_b = space.product(rel.b, theta)->ord();
    for (int A = -D; A <= D; ++A)
      for (int Bx = -D; Bx <= D; ++Bx) {
        // LHS fields with coefficients
        std::vector<std::pair<Scalar, FieldPtr<K>>> L, R;
        for (int l = 0; l <= k; ++l) {
          const int al = A - l, be = Bx - k + l;
          if (-be - 1 >= ord_b) continue;
          FieldPtr<K> inner = space.mode(rel.b, -be - 1, theta);
          L.emplace_back(Scalar(binom(k, l) * (((k - l) % 2) ? -1 : 1)), space.mode(rel.a, -al - 1, inner));
        }
        for (size_t i = 0; i < rel.terms.size(); ++i) {
          const auto& T = rel.terms[i];
          const int ord_v = space.product(T.v, theta)->ord();
          for (int l = 0; A - l >= -ord_v; ++l) {
            const int al = A - l;
            FieldPtr<K> inner = space.mode(T.v, -al - 1, theta);
            const int ord_u = space.product(T.u, inner)->ord();
            for (int j = l; Bx - j + l >= -ord_u; ++j) {
              if (j >= Qs[i].hi) throw PrecisionExhausted("locality conversion series order");
              const Scalar qj = j < Qs[i].lo ? Scalar() : Qs[i].coeff(j);
              if (qj.is_zero()) continue;
              const int be = Bx - j + l;
              Rational bc = binom(j, l) * (((j - l) % 2) ? -1 : 1);
              R.emplace_back(qj * Scalar(bc), space.mode(T.u, -be - 1, inner));
            }
          }
        }
        LinearField<K> lf(L, "lhs"), rf(R, "rhs");
        compare_fields(rep, lf, rf, space.sample(), Dt, Json{{"theta", theta->label}, {"x1", A}, {"x2", Bx}});
      }
  }
  return rep;
}

// Jacobi-type identity for a phi-coordinated module, phi = x e^z:
//   (x2 z)^-1 d((x1-x2)/(x2 z)) u(x1)v(x2) - (x2 z)^-1 d((x2-x1)/(-x2 z)) sum_i iota f_i(x1/x2) v_i(x2)u_i(x1)
//     = x1^-1 d(x2(1+z)/x1) C(log(1+z), x2),   C(x0,x2) = Y_E^e(u(x),x0)v(x) at x = x2,
// and its residue form
//   u(x1)v(x2) - sum_i iota f_i(x1/x2) v_i(x2)u_i(x1) = Res_x0 x1^-1 d(x2 e^x0/x1) x2 e^x0 C(x0,x2).
// Terms use the same (q, u, v) convention as LocalityRelation: q_i with u_i(x2) v_i(x1).
// Modes c_n of C(x0,x) with c_n = 0 for n >= top.
template <class K>
struct ModeFamily {
  int top = 0;
  std::function<FieldPtr<K>(int)> at;
};

template <class K>
ModeFamily<K> y_modes(FieldSpace<K>& space, const FieldPtr<K>& a, const FieldPtr<K>& b) {
  return {space.product(a, b)->ord(), [&space, a, b](int n) { return space.mode(a, n, b); }};
}

template <class K>
CheckReport check_jacobi_phi(const LocalityRelation<K>& rel, FieldSpace<K>& space, int D,
                             std::type_identity_t<std::optional<ModeFamily<K>>> Cfam = std::nullopt) {
  CheckReport rep("jacobi_phi");
  rep.meta["relation"] = rel.name;
  rep.meta["window"] = D;
  if (!Cfam) Cfam = y_modes(space, rel.a, rel.b);
  const int ord = Cfam->top;
  rep.meta["ord"] = ord;
  auto cmode = [&](int n) { return Cfam->at(n); };
  std::vector<detail::RatioCache<K>> Q;
  for (const auto& t : rel.terms) Q.push_back({&t.q});
  // A(x1,x2) and B(x1,x2) coefficients
  auto Acoef = [&](int al, int be, const K& w) { return rel.a->coeff(al, rel.b->coeff(be, w)); };
  auto Bcoef = [&](int al, int be, const K& w) {
    Vec<K> out;
    for (size_t j = 0; j < rel.terms.size(); ++j) {
      const auto& T = rel.terms[j];
      const int lv = T.v->lower(w);
      if (lv == kNoLower) continue;
      const int lo_t = iota_ratio(T.q, 1).lo;
      for (int k = lo_t; al - k >= lv; ++k) {
        const Scalar qk = Q[j].at(k);
        if (!qk.is_zero()) out.add(T.u->coeff(be + k, T.v->coeff(al - k, w)), qk);
      }
    }
    return out;
  };
  // powers of L = log(1+z)
  const int zord = 2 * D + ord + 4;
  const LaurentSeries L = log1p_series(zord);
  auto Lpow = [&](int e) { return L.pow(e, zord - ord); };
  std::map<int, LaurentSeries> Lp;
  for (const auto& w : space.sample())
    for (int a = -D; a <= D; ++a)
      for (int b = -D; b <= D; ++b) {
        for (int c = -D; c <= D; ++c) {
          const long n = -c - 1;
          Vec<K> t1, t2, rhs;
          // term 1: sum_j binom(n,j)(-1)^j A_{a-n+j, b+n+1-j}
          const int lb = rel.b->lower(w);
          for (int j = 0; lb < kNoLower && b + n + 1 - j >= lb; ++j) {
            Rational bc = binom(n, j) * ((j % 2) ? -1 : 1);
            t1.add(Acoef(static_cast<int>(a - n + j), static_cast<int>(b + n + 1 - j), w), Scalar(bc));
          }
          // term 2: sum_l (-1)^(n+l) binom(n,l) B_{a-l, b+l+1}; B lives in W((x2))((x1))
          int lv = kNoLower;
          for (const auto& T : rel.terms) lv = std::min(lv, T.v->lower(w) + iota_ratio(T.q, 1).lo);
          for (int l = 0; lv < kNoLower && a - l >= lv; ++l) {
            Rational bc = binom(n, l) * (((n + l) % 2 != 0) ? -1 : 1);
            t2.add(Bcoef(a - l, b + l + 1, w), Scalar(bc));
          }
          // right side: sum_{c1} binom(-a-1,c1) sum_m [L^(-m-1)]_{c-c1} [c_m]_{b+a+1}
          for (int c1 = 0; c - c1 >= -ord; ++c1) {
            const Rational b1 = binom(-a - 1, c1);
            if (b1 == 0) continue;
            for (int m = -(c - c1) - 1; m <= ord - 1; ++m) {
              const int e = -m - 1;
              auto it = Lp.find(e);
              if (it == Lp.end()) it = Lp.emplace(e, Lpow(e)).first;
              const int zc = c - c1;
              if (zc < it->second.lo) continue;
              const Scalar lc = it->second.coeff(zc);
              if (lc.is_zero()) continue;
              rhs.add(cmode(m)->coeff(b + a + 1, w), Scalar(b1) * lc);
            }
          }
          ++rep.checked;
          Vec<K> lhs = t1 - t2;
          if (lhs != rhs)
            rep.fail(Json{{"form", "delta"}, {"x1", a}, {"x2", b}, {"z", c}, {"state", key_json(w)}}, vec_str(lhs),
                     vec_str(rhs));
        }
        // residue form
        Vec<K> lhs = Acoef(a, b, w) - Bcoef(a, b, w), rhs;
        for (int r = 0; r < ord; ++r) {
          Rational f = 1 / factorial(r);
          for (int i = 0; i < r; ++i) f *= -a;
          rhs.add(cmode(r)->coeff(b + a, w), Scalar(f));
        }
        ++rep.checked;
        if (lhs != rhs)
          rep.fail(Json{{"form", "residue"}, {"x1", a}, {"x2", b}, {"state", key_json(w)}}, vec_str(lhs), vec_str(rhs));
      }
  return rep;
}

// Premises of the delta bridge for k = multiplicity of the zero of p at 1:
//   (x1-x2)^k a(x1)b(x2) = (x1-x2)^k sum_i iota q_i(x1/x2) u_i(x2)v_i(x1)   (as check_strig_locality with (x1-x2)^k)
//   ((x1-x2)^k a(x1)b(x2))|_{x1 = x2 e^x0} = x2^k (e^x0 - 1)^k C(x0,x2)
// on x2 in [-D, D], x0 in [0, D].
template <class K>
CheckReport check_delta_premises(const LocalityRelation<K>& rel, FieldSpace<K>& space, int D,
                                 std::type_identity_t<std::optional<ModeFamily<K>>> Cfam = std::nullopt) {
  CheckReport rep("delta_premises");
  const int k = rel.p.zero_order_at_one();
  rep.meta["relation"] = rel.name;
  rep.meta["k"] = k;
  if (!Cfam) Cfam = y_modes(space, rel.a, rel.b);
  LocalityRelation<K> pk = rel;
  pk.p = Multiplier::power(k);
  rep.merge(check_strig_locality(pk, space.sample(), D));
  auto prod = y_phi(rel.a, rel.b, pk.p, space.sample(), space.window());
  // (e^x0 - 1)^k
  LaurentSeries e1("s", 0, D + k + 2);
  for (int r = 1; r < D + k + 2; ++r) e1.set(r, Scalar(1 / factorial(r)));
  const LaurentSeries E = e1.pow(k, D + k + 2);
  for (const auto& w : space.sample()) {
    const auto c = prod->cert(w);
    for (int s = -D; s <= D; ++s)
      for (int r = 0; r <= D; ++r) {
        Vec<K> lhs, rhs;
        if (!c.zero)
          for (int m = c.L1; m <= s - c.L2; ++m) {
            Vec<K> v;
            for (int i = 0; i <= k; ++i)
              v.add(rel.a->coeff(m - i, rel.b->coeff(s - m - k + i, w)), pk.p.c[i]);
            Rational f = 1 / factorial(r);
            for (int j = 0; j < r; ++j) f *= m;
            lhs.add(v, Scalar(f));
          }
        for (int n = k - r - 1; n < Cfam->top; ++n) {
          const int j = r + n + 1;
          if (j < E.lo || j >= E.hi) continue;
          const Scalar ej = E.coeff(j);
          if (!ej.is_zero()) rhs.add(Cfam->at(n)->coeff(s - k, w), ej);
        }
        ++rep.checked;
        if (lhs != rhs) rep.fail(Json{{"x2", s}, {"x0", r}, {"state", key_json(w)}}, vec_str(lhs), vec_str(rhs), "substitution premise");
      }
  }
  return rep;
}

// (x0+x2)^k Y(a,x0+x2)Y(b,x2)c = (x0+x2)^k Y(Y(a,x0)b,x2)c on (x0, x2) in [-D, D]^2.
template <class K>
CheckReport check_weak_assoc(const FieldPtr<K>& a, const FieldPtr<K>& b, const FieldPtr<K>& c, int k,
                             FieldSpace<K>& space, int D, int Dt) {
  CheckReport rep("weak_assoc");
  rep.meta["k"] = k;
  rep.meta["window"] = D;
  rep.meta["fields"] = Json::array({a->label, b->label, c->label});
  const int ord_bc = space.product(b, c)->ord();
  const int ord_ab = space.product(a, b)->ord();
  for (int al = -D; al <= D; ++al)
    for (int be = -D; be <= D; ++be) {
      std::vector<std::pair<Scalar, FieldPtr<K>>> L, R;
      for (int i = 0; i <= ord_bc + be; ++i) {
        const int m = k - 1 - i - al, n = i - be - 1;
        const Rational bc = binom(al + i, i);
        if (bc == 0) continue;
        L.emplace_back(Scalar(bc), space.mode(a, m, space.mode(b, n, c)));
      }
      for (int l = 0; l <= k; ++l) {
        const int j = l - al - 1, n = k - l - be - 1;
        if (j >= ord_ab) continue;
        R.emplace_back(Scalar(binom(k, l)), space.mode(space.mode(a, j, b), n, c));
      }
      LinearField<K> lf(L, "lhs"), rf(R, "rhs");
      compare_fields(rep, lf, rf, space.sample(), Dt, Json{{"x0", al}, {"x2", be}});
    }
  return rep;
}

// (1/k!) p~^(k)(1) a_{k-1}^e b against the residue expression
//   Res_x1 ( iota_{x1,x} (x1-x)^-1 p(x1/x) a(x1)b(x) - iota_{x,x1} (x1-x)^-1 p(x1/x) sum_i q_i(x1/x) u_i(x)v_i(x1) ).
template <class K>
CheckReport residue_mode_check(const LocalityRelation<K>& rel, FieldSpace<K>& space, int Dt) {
  CheckReport rep("residue_mode");
  const int k = rel.p.zero_order_at_one();
  rep.meta["relation"] = rel.name;
  rep.meta["k"] = k;
  auto prod = y_phi(rel.a, rel.b, rel.p, space.sample(), space.window());
  FieldPtr<K> mk = mode_field<K>(prod, k - 1);
  const Scalar lead = rel.p.taylor_at_one(k);
  std::vector<detail::RatioCache<K>> Q;
  for (const auto& t : rel.terms) Q.push_back({&t.q});
  for (const auto& w : space.sample())
    for (int s = -Dt; s <= Dt; ++s) {
      Vec<K> lhs = mk->coeff(s, w).scaled(lead), rhs;
      const int lb = rel.b->lower(w);
      for (int i = 0; i <= rel.p.imax(); ++i) {
        const Scalar ci = rel.p.c[i];
        if (ci.is_zero()) continue;
        // first term: sum_{j>=0} A_{j-i, s-j+i}
        for (int j = 0; lb < kNoLower && s - j + i >= lb; ++j)
          rhs.add(rel.a->coeff(j - i, rel.b->coeff(s - j + i, w)), ci);
        // second term: + sum_{j>=0} sum_k q_k [u(x) v(x1)] at x1^(-1-j-i-kk) x^(s+j+1+i+kk)
        for (size_t tI = 0; tI < rel.terms.size(); ++tI) {
          const auto& T = rel.terms[tI];
          const int lv = T.v->lower(w);
          if (lv == kNoLower) continue;
          const int lo_t = iota_ratio(T.q, 1).lo;
          for (int j = 0; -1 - j - i - lo_t >= lv; ++j)
            for (int kk = lo_t; -1 - j - i - kk >= lv; ++kk) {
              const Scalar qk = Q[tI].at(kk);
              if (qk.is_zero()) continue;
              rhs.add(T.u->coeff(s + j + 1 + i + kk, T.v->coeff(-1 - j - i - kk, w)), ci * qk);
            }
        }
      }
      ++rep.checked;
      if (lhs != rhs) rep.fail(Json{{"x", s}, {"state", key_json(w)}}, vec_str(lhs), vec_str(rhs));
    }
  return rep;
}

// Finite-support fields and a general associate phi.

// p(phi(x,z),x)^{-1} (p(x1,x) a(x1) b(x))|_{x1 = phi(x,z)}, entry by entry, z-rows below zorder.
inline std::vector<std::vector<SeriesXZ>> y_phi_finite(const MatrixField& a, const MatrixField& b, const Associate& phi,
                                                       const Multiplier& p, int zorder,
                                                       std::optional<long long> xhi = std::nullopt) {
  const int n = a.dim();
  AssocPowers P(phi.phi.truncated(std::min(phi.phi.zhi, zorder + p.zero_order_at_one() + 1)));
  SeriesXZ pinv(0, 1);
  const bool trivial = p.d == 0 && p.c.size() == 1 && p.c[0].is_one();
  if (!trivial) pinv = substitute_assoc(p.bivariate(), P).invert(xhi);
  std::vector<std::vector<SeriesXZ>> out(n, std::vector<SeriesXZ>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::map<std::pair<int, int>, Scalar> H;
      for (int k = 0; k < n; ++k)
        for (const auto& [m, ca] : a.matrix()[i][k].terms)
          for (const auto& [np, cb] : b.matrix()[k][j].terms)
            for (const auto& [ij, cp] : p.bivariate()) {
              auto& h = H[{m + ij.first, np + ij.second}];
              h += ca * cb * cp;
            }
      std::erase_if(H, [](const auto& kv) { return kv.second.is_zero(); });
      SeriesXZ s = substitute_assoc(H, P);
      if (!trivial) s = s * pinv;
      SeriesXZ r(0, zorder + 1, "x");
      for (int e = 0; e <= zorder; ++e) r.row_mut(e) = s.row(e);
      for (int e = s.zlo; e < 0; ++e)
        if (!s.row(e).is_zero()) throw UncertifiedMultiplier("negative z-row in a product of finite fields");
      out[i][j] = r;
    }
  return out;
}

inline LMatrix matrix_derivation(const LMatrix& m, const LaurentSeries& p) {
  LMatrix r = m;
  for (auto& row : r)
    for (auto& e : row) e = p * e.derivative();
  return r;
}

inline LMatrix matrix_mul(const LMatrix& a, const LMatrix& b) {
  const size_t n = a.size();
  LMatrix r = zero_matrix(static_cast<int>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < n; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

// Borcherds construction: Y(a(x),z)b(x) = (e^{z p(x) d/dx} a(x)) b(x), compared with the general y_phi engine;
// plus the D-property Y_W(e^{x0 D} v, x) = Y_W(v, phi(x,x0)) for v in {a, b}.
inline CheckReport borcherds_oracle(const MatrixField& a, const MatrixField& b, const LaurentSeries& p, int order) {
  CheckReport rep("borcherds");
  rep.meta["p"] = p.str();
  rep.meta["order"] = order;
  const Associate phi = associate_from_p(p, order);
  const auto Y = y_phi_finite(a, b, phi, Multiplier::one(), order);
  const int n = a.dim();
  LMatrix Dk = a.matrix();
  for (int r = 0; r <= order; ++r) {
    if (r > 0) Dk = matrix_derivation(Dk, p);
    LMatrix expect = matrix_mul(Dk, b.matrix());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        ++rep.checked;
        LaurentSeries e = expect[i][j].scaled(Scalar(1 / factorial(r)));
        if (!(Y[i][j].row(r) == e))
          rep.fail(Json{{"z", r}, {"entry", Json::array({i, j})}}, Y[i][j].row(r).str(), e.str(), "Y vs e^{zD}a b");
      }
  }
  for (const MatrixField* v : {&a, &b}) {
    LMatrix Dv = v->matrix();
    for (int r = 0; r <= order; ++r) {
      if (r > 0) Dv = matrix_derivation(Dv, p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          ++rep.checked;
          SeriesXZ sub = substitute_assoc(v->matrix()[i][j], phi.phi);
          LaurentSeries e = Dv[i][j].scaled(Scalar(1 / factorial(r)));
          if (!(sub.row(r) == e))
            rep.fail(Json{{"z", r}, {"entry", Json::array({i, j})}, {"field", v->label}}, sub.row(r).str(), e.str(),
                     "D-property");
        }
    }
  }
  return rep;
}

// Realization of states of the rational vacuum module as fields: 1 -> 1_W, g_n s -> (g~)_n^e (field of s).
class Realization {
 public:
  Realization(BgModule V, FieldPtr<Word> beta, FieldPtr<Word> gamma, FieldSpace<Word>& space)
      : V_(std::move(V)), gens_{std::move(beta), std::move(gamma)}, space_(space) {}

  FieldPtr<Word> field(const Word& w) {
    FieldPtr<Word> f = space_.identity();
    for (auto it = w.rbegin(); it != w.rend(); ++it) f = space_.mode(gens_[it->first], it->second, f);
    return f;
  }
  FieldPtr<Word> field(const ModuleState& s) {
    std::vector<std::pair<Scalar, FieldPtr<Word>>> terms;
    for (const auto& [w, c] : s.terms) terms.emplace_back(c, field(w));
    return std::make_shared<LinearField<Word>>(terms, "theta(" + state_str(s) + ")");
  }
  const BgModule& source() const { return V_; }
  const FieldPtr<Word>& gen(int g) const { return gens_[g]; }

 private:
  BgModule V_;
  FieldPtr<Word> gens_[2];
  FieldSpace<Word>& space_;
};

// Y_W(Y(u,x0)v,x) = Y_E^e(u(x),x0)v(x): theta(u_n v) against (theta u)_n^e (theta v), modes n in [nlo, nhi].
inline CheckReport state_field_check(Realization& th, FieldSpace<Word>& space, const Word& u, const Word& v, int nlo,
                                     int nhi, int Dt) {
  CheckReport rep("state_field");
  rep.meta["u"] = word_str(u);
  rep.meta["v"] = word_str(v);
  FieldPtr<Word> fu = th.field(u), fv = th.field(v);
  for (int n = nlo; n <= nhi; ++n) {
    ModuleState unv;
    if (u.empty()) {
      if (n == -1) unv = ModuleState(v);
    } else {
      // u = g_{-1} 1 for a generator; general u uses its field only on the right side
      if (u.size() != 1 || u[0].second != -1) throw PolicyError("state_field_check supports u in {1, beta, gamma}");
      unv = th.source().act(u[0].first, n, v);
    }
    FieldPtr<Word> lhs = th.field(unv);
    FieldPtr<Word> rhs = space.mode(fu, n, fv);
    compare_fields(rep, *lhs, *rhs, space.sample(), Dt, Json{{"n", n}});
  }
  return rep;
}

// Sparse table of the modes n in [nlo, nhi] of Y_E^e(a,z)b on sampled vectors and x-exponents in [-D, D].
template <class K>
Json y_phi_json(const YPhiProduct<K>& prod, const std::vector<K>& sample, int nlo, int nhi, int D) {
  Json j;
  j["multiplier"] = prod.multiplier().str();
  j["ord"] = prod.ord();
  Json rows = Json::array();
  for (int n = nlo; n <= nhi; ++n) {
    Json r;
    r["mode"] = n;
    r["z"] = -n - 1;
    Json ents = Json::array();
    for (const auto& w : sample)
      for (int t = -D; t <= D; ++t) {
        Vec<K> v = prod.mode_coeff(n, t, w);
        if (v.is_zero()) continue;
        Json e;
        e["state"] = key_json(w);
        e["x"] = t;
        if constexpr (std::is_same_v<K, Word>) {
          e["value"] = state_to_json(v);
        } else {
          Json vv = Json::array();
          for (const auto& [k, c] : v.terms) vv.push_back(Json::array({k, c.str()}));
          e["value"] = vv;
        }
        ents.push_back(e);
      }
    r["entries"] = ents;
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j;
}

}  // namespace phical
