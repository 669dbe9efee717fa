#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "associates.hpp"
#include "eops.hpp"
#include "fockrep.hpp"
#include "jsonio.hpp"
#include "window.hpp"

namespace phical {

inline void compare_series(CheckReport& rep, const LaurentSeries& a, const LaurentSeries& b, long long below, Json where) {
  const int lo = std::min(a.lo, b.lo);
  for (long long e = lo; e < below; ++e) {
    ++rep.checked;
    const Scalar x = e < a.lo ? Scalar() : a.coeff(static_cast<int>(e)), y = e < b.lo ? Scalar() : b.coeff(static_cast<int>(e));
    if (!(x == y)) {
      Json w = where;
      w["exp"] = e;
      rep.fail(w, x.str(), y.str());
    }
  }
}

// e^{log(1+z)} = 1+z and log(1+(e^x-1)) = x below z^order.
inline CheckReport check_log_exp(int order) {
  CheckReport rep("log_exp");
  rep.meta["order"] = order;
  const LaurentSeries L = log1p_series(order - 1);
  const LaurentSeries one_plus_z("z", {{0, Scalar(1)}, {1, Scalar(1)}});
  LaurentSeries lhs = exp_series(L, order);
  compare_series(rep, lhs, one_plus_z, order, Json{{"identity", "exp(log(1+z))"}});
  LaurentSeries em1("x", 1, order);
  for (int n = 1; n < order; ++n) em1.set(n, Scalar(1 / factorial(n)));
  LaurentSeries back = log1p_of(em1, order);
  compare_series(rep, back, LaurentSeries::monomial("x", 1), order, Json{{"identity", "log(1+(exp(x)-1))"}});
  return rep;
}

// Both delta-function identities as all-zero difference tables on [-D, D]^3.
inline CheckReport check_delta_tables(int D) {
  CheckReport rep("delta_identities");
  rep.meta["window"] = D;
  auto one = [&](const DeltaTriple& t, const char* name) {
    auto diff = (t.first - t.second) - t.third;
    for_each_in_box(diff.valid, [&](const Exps& e) {
      ++rep.checked;
      const Scalar v = diff.get(e);
      if (!v.is_zero()) rep.fail(Json{{"identity", name}, {"exps", e}}, v.str(), "0");
    });
  };
  one(standard_delta(D), "standard");
  one(substituted_delta(D), "x0=x2*z");
  return rep;
}

// A phi given as a rational expression in x, z, expanded in nonnegative powers of z.
inline Associate phi_from_expr(const RationalExpr& f, int order, std::optional<int> xhi = std::nullopt) {
  WindowTable<Scalar> t = iota_expand(f, "x", "z", order + 1, xhi);
  SeriesXZ phi(0, order + 1);
  const long long hi = t.valid[0].second < t.window[0].second || xhi ? t.valid[0].second + 1 : kExact;
  for (int r = 0; r <= order; ++r) phi.row_mut(r) = LaurentSeries("x", 0, hi);
  for (const auto& [e, c] : t.coeffs) {
    if (e[1] < 0) throw CompositionError("phi has a pole in z");
    if (e[1] <= order) phi.row_mut(e[1]).set(e[0], c);
  }
  for (auto& r : phi.rows) r.lo = r.terms.empty() ? 0 : r.terms.begin()->first;
  return associate_from_phi(phi);
}

inline CheckReport check_associate_suite(int order) {
  CheckReport rep("associates");
  rep.meta["order"] = order;
  for (const char* p : {"0", "1", "x", "x^2", "x^-1", "1 + x^3"}) {
    Associate A = associate_from_p(to_laurent(parse_rational_expr(p), "x"), order);
    rep.merge(verify_associate(A, order));
    rep.merge(inverse_flow_check(A, order));
  }
  return rep;
}

// lambda * lambda' = 1 and mu * mu' = 1 as series; mu_0 = -1, or mu = (1, 0, ...) at q = 1.
inline CheckReport check_coeffs_suite(const SystemKind& kind, int order) {
  CheckReport rep("expansion_coeffs");
  rep.meta["q"] = kind.q.str();
  rep.meta["order"] = order;
  ExpansionCoeffs c = expansion_coeffs(kind, order);
  auto conv = [&](const std::vector<Scalar>& a, const std::vector<Scalar>& b, const char* name) {
    for (int n = 0; n < order; ++n) {
      Scalar s;
      for (int k = 0; k <= n; ++k) s += a[k] * b[n - k];
      ++rep.checked;
      const Scalar want = n == 0 ? Scalar(1) : Scalar();
      if (!(s == want)) rep.fail(Json{{"product", name}, {"n", n}}, s.str(), want.str());
    }
  };
  conv(c.lambda, c.lambda_prime, "lambda*lambda'");
  conv(c.mu, c.mu_prime, "mu*mu'");
  if (kind.q.symbolic || kind.q.value != 1) {
    ++rep.checked;
    if (!(c.mu[0] == Scalar(-1))) rep.fail(Json{{"mu", 0}}, c.mu[0].str(), "-1");
  } else {
    for (int k = 0; k < order; ++k) {
      ++rep.checked;
      const Scalar want = k == 0 ? Scalar(1) : Scalar();
      if (!(c.mu[k] == want)) rep.fail(Json{{"mu", k}}, c.mu[k].str(), want.str());
    }
  }
  return rep;
}

inline CheckReport check_qbg(const SystemKind& kind, int depth, int floor, int window) {
  BgModule M = build_module(kind, TruncPolicy::make(depth, floor));
  return verify_relations(M, M.basis(), window);
}

// The trigonometric module with its generating fields and a Y_E^e registry.
struct TrigDesk {
  BgModule W;
  FieldPtr<Word> beta, gamma;
  std::unique_ptr<FieldSpace<Word>> space;
  std::vector<LocalityRelation<Word>> relations;
};

inline std::vector<Multiplier> trig_candidates(const Scalar& q, int kmax) {
  return default_candidates(kmax, {Multiplier::ratio({Scalar(-1), q}), Multiplier::ratio({-q, Scalar(1)})});
}

inline TrigDesk make_trig_desk(const QValue& q = QValue::at(-1), int depth = 2, int floor = -4, int kmax = 6,
                               int cert_window = 4) {
  BgModule W = build_module(SystemKind{SystemKind::Tag::Trig, q}, TruncPolicy::make(depth, floor));
  TrigDesk d{W, std::make_shared<GenField>(W, Gen::Beta, "beta~"), std::make_shared<GenField>(W, Gen::Gamma, "gamma~"),
             nullptr, {}};
  d.space = std::make_unique<FieldSpace<Word>>(W.basis(), trig_candidates(q.scalar(), kmax), cert_window);
  d.relations = trig_relations(d.beta, d.gamma, q.scalar());
  return d;
}

inline FieldPtr<Word> zero_field() {
  return std::make_shared<LinearField<Word>>(std::vector<std::pair<Scalar, FieldPtr<Word>>>{}, "0");
}

// beta~_0^e gamma~ = 1_W and beta~_n^e gamma~ = 0 for n >= 1 (checked up to nmax).
inline CheckReport check_flagship(TrigDesk& d, int nmax, int D) {
  CheckReport rep("flagship_mode");
  auto& S = *d.space;
  for (int n = 0; n <= nmax; ++n)
    compare_fields(rep, *S.mode(d.beta, n, d.gamma), n == 0 ? *S.identity() : *zero_field(), S.sample(), D,
                   Json{{"mode", n}});
  // modes n >= 1 also vanish with the squared multiplier, where they are computed rather than implied
  auto p2 = y_phi(d.beta, d.gamma, Multiplier::power(2), S.sample(), S.window());
  compare_fields(rep, *mode_field<Word>(p2, 1), *zero_field(), S.sample(), D, Json{{"mode", 1}, {"multiplier", "(x1-x2)^2"}});
  rep.meta["multiplier"] = S.product(d.beta, d.gamma)->multiplier().str();
  return rep;
}

// y_phi rows agree for two certified multipliers of the same pair.
inline CheckReport check_multiplier_independence(const FieldPtr<Word>& a, const FieldPtr<Word>& b, const Multiplier& p1,
                                                 const Multiplier& p2, const std::vector<Word>& sample, int nlo, int D,
                                                 int cert_window = 4) {
  CheckReport rep("multiplier_independence");
  rep.meta["p1"] = p1.str();
  rep.meta["p2"] = p2.str();
  auto y1 = y_phi(a, b, p1, sample, cert_window), y2 = y_phi(a, b, p2, sample, cert_window);
  const int top = std::max(y1->ord(), y2->ord());
  for (int n = nlo; n <= top; ++n)
    compare_fields(rep, *mode_field<Word>(y1, n), *mode_field<Word>(y2, n), sample, D, Json{{"mode", n}});
  return rep;
}

inline std::vector<std::pair<LMatrix, LMatrix>> borcherds_pairs() {
  auto lp = [](const char* s) { return to_laurent(parse_rational_expr(s), "x"); };
  std::vector<std::pair<LMatrix, LMatrix>> out;
  LMatrix a = zero_matrix(2), b = zero_matrix(2);
  a[0][1] = lp("x^-1");
  b[1][0] = lp("x^2");
  out.emplace_back(a, b);
  a = zero_matrix(2), b = zero_matrix(2);
  a[0][0] = lp("x^2 + 1"), a[0][1] = lp("x^-1"), a[1][1] = lp("3*x");
  b[0][1] = lp("x"), b[1][0] = lp("2 - x^-2"), b[1][1] = lp("x^3");
  out.emplace_back(a, b);
  a = zero_matrix(2), b = zero_matrix(2);
  a[0][0] = lp("x^-2"), a[1][0] = lp("1/2*x - x^2"), a[1][1] = lp("1");
  b[0][0] = lp("x + x^-1"), b[0][1] = lp("-3"), b[1][1] = lp("x^-3");
  out.emplace_back(a, b);
  return out;
}

inline CheckReport check_borcherds_suite(int order) {
  CheckReport rep("borcherds");
  rep.meta["order"] = order;
  for (const auto& [A, B] : borcherds_pairs())
    for (const char* p : {"1", "x", "x^2"}) {
      MatrixField a(A, "a"), b(B, "b");
      rep.merge(borcherds_oracle(a, b, to_laurent(parse_rational_expr(p), "x"), order));
    }
  return rep;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"log-exp",  "delta",    "associates", "coeffs",
                                              "qbg-rat",  "qbg-trig", "flagship",   "multiplier-independence",
                                              "locality", "jacobi",   "weak-assoc", "borcherds"};
  return names;
}

// One named suite item; `order` is the series order or window where one applies (0 selects the default).
inline CheckReport run_suite(const std::string& name, int order = 0) {
  auto pick = [&](int dflt) { return order > 0 ? order : dflt; };
  if (name == "log-exp") return check_log_exp(pick(12));
  if (name == "delta") return check_delta_tables(pick(6));
  if (name == "associates") return check_associate_suite(pick(8));
  if (name == "coeffs") {
    CheckReport r = check_coeffs_suite({SystemKind::Tag::Trig, QValue::sym()}, pick(6));
    r.merge(check_coeffs_suite({SystemKind::Tag::Trig, QValue::at(1)}, pick(6)));
    return r;
  }
  if (name == "qbg-rat") {
    CheckReport r = check_qbg({SystemKind::Tag::Rat, QValue::at(1)}, 2, -4, pick(4));
    r.merge(check_qbg({SystemKind::Tag::Rat, QValue::at(-1)}, 2, -4, pick(4)));
    r.name = "qbg_rat";
    return r;
  }
  if (name == "qbg-trig") {
    CheckReport r = check_qbg({SystemKind::Tag::Trig, QValue::at(-1)}, 2, -4, pick(4));
    r.merge(check_qbg({SystemKind::Tag::Trig, QValue::at(1)}, 2, -4, pick(4)));
    r.name = "qbg_trig";
    return r;
  }
  if (name == "borcherds") return check_borcherds_suite(pick(5));
  TrigDesk d = make_trig_desk();
  const int D = pick(4);
  if (name == "flagship") return check_flagship(d, 3, D);
  if (name == "multiplier-independence")
    return check_multiplier_independence(d.beta, d.gamma, Multiplier::power(1), Multiplier::power(2), d.space->sample(), -3, D);
  if (name == "locality") {
    CheckReport r("locality");
    for (const auto& rel : d.relations) {
      r.merge(check_strig_locality(rel, d.space->sample(), D));
      r.merge(check_locality_conversion(rel, *d.space, {d.space->identity(), d.beta, d.gamma}, D, D));
    }
    return r;
  }
  if (name == "jacobi") return check_jacobi_phi(d.relations[2], *d.space, D);
  if (name == "weak-assoc") return check_weak_assoc(d.beta, d.gamma, d.beta, 0, *d.space, D, D);
  throw PolicyError("unknown suite item '" + name + "'");
}

}  // namespace phical
