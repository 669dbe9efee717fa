#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "phical/phical.hpp"

using namespace phical;

namespace {

LaurentSeries X(std::map<int, Scalar> t, long long hi = kExact) { return LaurentSeries("x", std::move(t), hi); }
LaurentSeries lp(const char* s, const char* v = "x") { return to_laurent(parse_rational_expr(s), v); }

LaurentSeries random_laurent(std::mt19937& rng) {
  std::uniform_int_distribution<int> c(-3, 3), e(-2, 3);
  std::map<int, Scalar> t;
  for (int i = 0; i < 3; ++i) t[e(rng)] = Scalar(c(rng));
  return X(t);
}

}  // namespace

TEST_CASE("laurent products track truncation", "[series]") {
  // (x^-1 + 1 + O(x^3)) (x - 1) = x - x^-1 + O(x^3)
  const LaurentSeries a = X({{-1, Scalar(1)}, {0, Scalar(1)}}, 3), b = lp("x - 1");
  const LaurentSeries ab = a * b;
  CHECK(ab.hi == 3);
  CHECK(ab.terms == std::map<int, Scalar>{{-1, Scalar(-1)}, {1, Scalar(1)}});

  CHECK(a * LaurentSeries::constant("x", 1) == a);

  // (1 - x)(1 + x + x^2 + O(x^3)) = 1 + O(x^3)
  const LaurentSeries c = lp("1 - x") * X({{0, Scalar(1)}, {1, Scalar(1)}, {2, Scalar(1)}}, 3);
  CHECK(c.hi == 3);
  CHECK(c.terms == std::map<int, Scalar>{{0, Scalar(1)}});

  const LaurentSeries s = X({{0, Scalar(1)}}, 5) + X({{1, Scalar(2)}}, 2);
  CHECK(s.hi == 2);
  CHECK_THROWS_AS(s.coeff(2), PrecisionExhausted);
  CHECK_THROWS_AS(lp("x") * lp("z", "z"), VariableMismatch);
}

TEST_CASE("shift and derivative", "[series]") {
  const LaurentSeries a = X({{-2, Scalar(3)}, {1, Scalar(1)}}, 4);
  const LaurentSeries s = a.shifted(2);
  CHECK(s.hi == 6);
  CHECK(s.coeff(0) == Scalar(3));
  const LaurentSeries d = a.derivative();
  CHECK(d.hi == 3);
  CHECK(d.terms == std::map<int, Scalar>{{-3, Scalar(-6)}, {0, Scalar(1)}});
}

TEST_CASE("unit inversion", "[series]") {
  // 1/(1 - q x) is the geometric series in q x
  const LaurentSeries a = X({{0, Scalar(1)}, {1, -Scalar::q()}}, 3);
  const LaurentSeries inv = a.invert_unit();
  CHECK(inv.hi == 3);
  Scalar qk(1);
  for (int k = 0; k < 3; ++k, qk = qk * Scalar::q()) CHECK(inv.coeff(k) == qk);

  CHECK(lp("x").invert_unit() == lp("x^-1"));
  CHECK(lp("2").invert_unit() == LaurentSeries::constant("x", Scalar(Rational(1, 2))));
  CHECK_THROWS_AS(lp("1 + x").invert_unit(), PrecisionExhausted);
  CHECK_THROWS_AS(LaurentSeries("x").invert_unit(), DivisionByZero);
}

TEST_CASE("laurent ring laws on random polynomials", "[series][property]") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const LaurentSeries a = random_laurent(rng), b = random_laurent(rng), c = random_laurent(rng);
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a * b == b * a);
    if (!a.is_zero()) {
      // a * a^-1 = 1 below the inverse's order
      const LaurentSeries prod = a * a.invert_unit(8);
      for (const auto& [e, v] : prod.terms) CHECK(v == Scalar(e == 0 ? 1 : 0));
      CHECK(prod.hi >= 8 - 3 + *a.valuation());
    }
  }
}

TEST_CASE("iota expansions follow the long-division oracle", "[series]") {
  const Scalar q = Scalar::q();
  const auto L = iota_expand(parse_rational_expr("(x - q*z)/(q*x - z)"), "z", "x", 5);
  const auto Lp = iota_expand(parse_rational_expr("(q*x - z)/(x - q*z)"), "z", "x", 5);
  // (t - q)/(q t - 1) and its reciprocal around t = x/z = 0
  const auto lam = oracle::long_division({-q, Scalar(1)}, {Scalar(-1), q}, 5);
  const auto lamp = oracle::long_division({Scalar(-1), q}, {-q, Scalar(1)}, 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(L.get({-k, k}) == lam[k]);
    CHECK(Lp.get({-k, k}) == lamp[k]);
  }
  CHECK(lam[0] == q);
  CHECK(lam[1] == q * q - Scalar(1));
  CHECK(lam[2] == q * q * q - q);
  CHECK(lamp[0] == q.inv());
  CHECK(lamp[1] == q.inv() * q.inv() - Scalar(1));
  // nothing off the diagonal
  for (const auto& [e, v] : L.coeffs) CHECK(e[0] + e[1] == 0);

  const auto one = iota_expand(parse_rational_expr("1"), "x1", "x2", 4);
  REQUIRE(one.coeffs.size() == 1);
  CHECK(one.get({0, 0}) == Scalar(1));
}

TEST_CASE("iota expansion direction matters", "[series]") {
  const RationalExpr f = parse_rational_expr("1/(x - z)");
  const auto a = iota_expand(f, "x", "z", 6);  // sum z^n x^(-n-1)
  const auto b = iota_expand(f, "z", "x", 6);  // -sum x^n z^(-n-1)
  for (int n = 0; n < 6; ++n) {
    CHECK(a.get({-n - 1, n}) == Scalar(1));
    CHECK(b.get({-n - 1, n}) == Scalar(-1));
  }
  CHECK(a.coeffs.size() == 6);
  CHECK(b.coeffs.size() == 6);
  CHECK_THROWS_AS(iota_expand(f, "x", "x", 3), ExpansionDirectionError);
}

TEST_CASE("delta series", "[series][delta]") {
  const auto d = delta_series("x", "z", 4);
  CHECK(d.get({3, -3}) == Scalar(1));
  CHECK(d.get({3, -2}).is_zero());
  CHECK(d.shape.kind == ShapeKind::Distribution);
  // (x - z) delta(x/z) = 0 where every contributing coefficient lies in the window
  const auto m = multiply_poly(d, PolyN{{{1, 0}, Scalar(1)}, {{0, 1}, Scalar(-1)}});
  CHECK(m.valid == Box{{-3, 4}, {-3, 4}});
  CHECK(m.zero_on_valid());
  CHECK_FALSE(m.coeffs.empty());
}

TEST_CASE("delta identities vanish on the window", "[series][delta]") {
  for (const auto& t : {standard_delta(6), substituted_delta(6)}) {
    const auto diff = (t.first - t.second) - t.third;
    CHECK(diff.zero_on_valid());
    CHECK_FALSE(t.first.coeffs.empty());
    CHECK_FALSE(t.third.coeffs.empty());
  }
  const CheckReport rep = check_delta_tables(6);
  CHECK(rep.pass());
  CHECK(rep.checked == 2 * 13 * 13 * 13);
}

TEST_CASE("delta terms match binomial expansion", "[series][delta]") {
  const auto t = standard_delta(4);
  // x0^-1 delta((x1-x2)/x0) at x0^(-n-1): (x1 - x2)^n, expanded by repeated multiplication for n >= 0
  for (int n = 0; n <= 3; ++n) {
    std::map<int, Scalar> poly{{0, Scalar(1)}};  // keyed by the x2 exponent; x1 exponent is n - j
    for (int i = 0; i < n; ++i) {
      std::map<int, Scalar> next;
      for (const auto& [j, c] : poly) {
        next[j] = next[j] + c;
        next[j + 1] = next[j + 1] - c;
      }
      poly = next;
    }
    for (int j = 0; j <= n; ++j) CHECK(t.first.get({-n - 1, n - j, j}) == poly[j]);
  }
  // x1^-1 delta((x2+x0)/x1) at x1^-1 is (x2+x0)^0 = 1
  CHECK(t.third.get({0, -1, 0}) == Scalar(1));
  CHECK(t.third.get({1, -1, 0}).is_zero());
  // negative n: binom(-1, c) (-1)^c = 1
  for (int c = 0; c <= 3; ++c) CHECK(t.first.get({0, -1 - c, c}) == Scalar(oracle::rbinom(-1, c) * (c % 2 ? -1 : 1)));
}

TEST_CASE("table products obey shape legality", "[series][window]") {
  auto iz = iota_expand(parse_rational_expr("1/(x1 - x2)"), "x1", "x2", 4);
  auto jz = iota_expand(parse_rational_expr("1/(x1 - x2)"), "x2", "x1", 4);
  // the second table is keyed (x2, x1); reorder to compare expansions of the same variables
  WindowTable<Scalar> j2({"x1", "x2"}, {jz.window[1], jz.window[0]}, Shape::iter(1, 0));
  for (const auto& [e, v] : jz.coeffs) j2.set({e[1], e[0]}, v);
  CHECK_THROWS_AS(product(iz, j2), ShapeError);

  auto d = delta_series("x1", "x2", 3);
  WindowTable<Scalar> unbounded({"x1", "x2"}, symmetric_box(2, 3), Shape::joint());
  unbounded.set({0, 0}, Scalar(1));
  CHECK_THROWS_AS(product(d, unbounded), ShapeError);
  unbounded.finite_support = true;
  CHECK_NOTHROW(product(d, unbounded));

  // (x1 - x2) * iota_{x1,x2} 1/(x1 - x2) = 1: zero on the certified box, truncation debris outside it
  WindowTable<Scalar> lin({"x1", "x2"}, symmetric_box(2, 2), Shape::joint());
  lin.lower = {0, 0};
  lin.set({1, 0}, Scalar(1));
  lin.set({0, 1}, Scalar(-1));
  lin.finite_support = true;
  const auto one = product(iz, lin);
  CHECK(one.get({0, 0}) == Scalar(1));
  CHECK(one.zero_on_valid());
  CHECK_FALSE(one.coeffs.size() == 1);
  for (const auto& [e, v] : one.coeffs)
    if (e != Exps{0, 0}) CHECK_FALSE(in_box(e, one.valid));
}

TEST_CASE("log and exp", "[series][logexp]") {
  const LaurentSeries L = log1p_series(4);
  CHECK(L.terms == std::map<int, Scalar>{{1, Scalar(1)}, {2, Scalar(Rational(-1, 2))}, {3, Scalar(Rational(1, 3))},
                                         {4, Scalar(Rational(-1, 4))}});
  CHECK(check_log_exp(8).pass());
  CHECK(check_log_exp(12).pass());

  const SeriesXZ e = exp_series(log1p(8));
  for (int r = 0; r <= 8; ++r) CHECK(e.row(r).terms == (r <= 1 ? std::map<int, Scalar>{{0, Scalar(1)}} : std::map<int, Scalar>{}));
  CHECK_THROWS_AS(exp_series(LaurentSeries::constant("z", 1)), CompositionError);
}

TEST_CASE("substitution into an associate", "[series][subst]") {
  const int order = 6;
  // phi = x + z: x1^2 -> x^2 + 2xz + z^2
  const Associate add = associate_from_p(lp("1"), order);
  const SeriesXZ sq = substitute_assoc(lp("x^2"), add.phi);
  CHECK(sq.row(0) == lp("x^2"));
  CHECK(sq.row(1) == lp("2*x"));
  CHECK(sq.row(2) == lp("1"));
  for (int r = 3; r <= order; ++r) CHECK(sq.row(r).is_zero());

  // phi = x e^z: x1^-1 -> x^-1 e^-z
  const Associate mul = associate_from_p(lp("x"), order);
  const SeriesXZ inv = substitute_assoc(lp("x^-1"), mul.phi);
  for (int r = 0; r <= order; ++r)
    CHECK(inv.row(r).terms == std::map<int, Scalar>{{-1, Scalar(Rational(r % 2 ? -1 : 1) / oracle::fact(r))}});

  // phi = x/(1 - zx): x1 -> x + z x^2 + z^2 x^3 + ...
  const Associate geo = associate_from_p(lp("x^2"), order);
  const SeriesXZ id = substitute_assoc(lp("x"), geo.phi);
  for (int r = 0; r <= order; ++r) CHECK(id.row(r).terms == std::map<int, Scalar>{{r + 1, Scalar(1)}});
}

TEST_CASE("substitution is a ring homomorphism", "[series][subst][property]") {
  std::mt19937 rng(5);
  const Associate A = associate_from_p(lp("x^2 + 1"), 5);
  for (int trial = 0; trial < 10; ++trial) {
    const LaurentSeries f = random_laurent(rng), g = random_laurent(rng);
    const SeriesXZ fg = substitute_assoc(f * g, A.phi);
    const SeriesXZ prod = substitute_assoc(f, A.phi) * substitute_assoc(g, A.phi);
    for (int r = 0; r <= 5; ++r) CHECK(fg.row(r).agrees_with(prod.row(r)));
  }
}

TEST_CASE("json round trips", "[series][json]") {
  const LaurentSeries p = X({{-1, Scalar(1)}, {2, Scalar::parse("(q+1)/(q-1)")}}, 5);
  CHECK(laurent_from_json(to_json(p)) == p);
  CHECK(to_json(laurent_from_json(to_json(p))).dump() == to_json(p).dump());

  const SeriesXZ s = associate_from_p(lp("x^-1"), 4).phi;
  CHECK(seriesxz_from_json(to_json(s)) == s);

  const auto t = iota_expand(parse_rational_expr("(x - q*z)/(q*x - z)"), "z", "x", 3);
  const auto back = scalar_table_from_json(to_json(t));
  CHECK(back.coeffs == t.coeffs);
  CHECK(back.shape == t.shape);
  CHECK(back.window == t.window);
}
