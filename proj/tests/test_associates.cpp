#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "phical/phical.hpp"

using namespace phical;

namespace {

LaurentSeries lp(const std::string& s) { return to_laurent(parse_rational_expr(s), "x"); }

SeriesXZ rows_of(int order, oracle::Terms (*row)(int)) {
  SeriesXZ s(0, order + 1);
  for (int r = 0; r <= order; ++r) s.row_mut(r) = LaurentSeries("x", row(r));
  return s;
}

LaurentSeries random_p(std::mt19937& rng) {
  std::uniform_int_distribution<int> c(-5, 5), den(1, 4), lo(-2, 0), hi(0, 3);
  const int a = lo(rng), b = hi(rng);
  std::map<int, Scalar> t;
  for (int e = a; e <= b; ++e) t[e] = Scalar(Rational(c(rng)) / den(rng));
  if (t.begin()->second.is_zero()) t.begin()->second = Scalar(1);
  return LaurentSeries("x", t);
}

}  // namespace

TEST_CASE("associates of polynomial generators have closed forms", "[associates]") {
  for (const char* p : {"0", "1", "x", "x^2"}) {
    const Associate A = associate_from_p(lp(p), 8);
    for (int r = 0; r <= 8; ++r) {
      INFO("p = " << p << ", z^" << r);
      CHECK(A.row(r).terms == oracle::closed_associate_row(p, r));
    }
    CHECK(verify_associate(A, 8).pass());
    CHECK(inverse_flow_check(A, 8).pass());
  }
}

TEST_CASE("p = x^-1 flows to sqrt(x^2 + 2z)", "[associates]") {
  const Associate A = associate_from_p(lp("x^-1"), 8);
  for (int r = 0; r <= 8; ++r) CHECK(A.row(r).terms == oracle::sqrt_form_row(r));
  CHECK(verify_associate(A, 8).pass());
  // phi_z = 1/phi: the derivative in z of the flow equals the generator at the flow
  const SeriesXZ dz = [&] {
    SeriesXZ s(0, 8);
    for (int r = 0; r < 8; ++r) s.row_mut(r) = A.row(r + 1).scaled(Scalar(r + 1));
    return s;
  }();
  const SeriesXZ prod = dz * A.phi.truncated(8);
  CHECK(prod.row(0) == LaurentSeries::constant("x", 1));
  for (int r = 1; r < 8; ++r) CHECK(prod.row(r).is_zero());
}

TEST_CASE("x + log(1 + z/x) is not an associate", "[associates]") {
  const SeriesXZ L = rows_of(8, oracle::log_form_row);
  const Associate sq = associate_from_p(lp("x^-1"), 8);
  // agreement through z^1, divergence from z^2
  CHECK(L.row(1) == sq.row(1));
  CHECK_FALSE(L.row(2) == sq.row(2));
  const CheckReport rep = verify_associate(associate_from_phi(L), 8);
  CHECK_FALSE(rep.pass());
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations[0].where == Json{{"x0", 1}, {"x2", 1}, {"x", -3}});
}

TEST_CASE("generator recovery", "[associates]") {
  CHECK(p_from_associate(associate_from_p(lp("x"), 6).phi) == lp("x"));
  CHECK(p_from_associate(associate_from_p(lp("1"), 6).phi) == lp("1"));
  CHECK(p_from_associate(associate_from_p(lp("0"), 6).phi).is_zero());
  // from phi given directly
  CHECK(p_from_associate(phi_from_expr(parse_rational_expr("x + z"), 4).phi) == lp("1"));
  CHECK(p_from_associate(phi_from_expr(parse_rational_expr("x/(1 - z*x)"), 4).phi) == lp("x^2"));
}

TEST_CASE("generator round trip on random Laurent polynomials", "[associates][property]") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const LaurentSeries p = random_p(rng);
    INFO("p = " << p.str());
    const Associate A = associate_from_p(p, 6);
    CHECK(p_from_associate(A.phi) == p);
    CHECK(verify_associate(A, 4).pass());
  }
}

TEST_CASE("associate axioms detect corruption", "[associates]") {
  CHECK(verify_associate(associate_from_p(lp("x^2"), 6), 6).pass());
  CHECK(verify_associate(associate_from_p(lp("x"), 8), 8).pass());
  // phi = x + z + z x
  SeriesXZ bad(0, 3);
  bad.row_mut(0) = lp("x");
  bad.row_mut(1) = lp("1 + x");
  const CheckReport rep = verify_associate(associate_from_phi(bad), 2);
  CHECK_FALSE(rep.pass());
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations[0].where.contains("x0"));
  CHECK(rep.violations[0].where.contains("x"));
}

TEST_CASE("phi from a closed form agrees with the flow", "[associates]") {
  const Associate a = phi_from_expr(parse_rational_expr("x/(1 - z*x)"), 6, 12);
  const Associate b = associate_from_p(lp("x^2"), 6);
  for (int r = 0; r <= 6; ++r) CHECK(a.row(r).agrees_with(b.row(r)));
  CHECK(verify_associate(phi_from_expr(parse_rational_expr("x + z"), 6), 6).pass());
}

TEST_CASE("inverse flow", "[associates]") {
  for (const char* p : {"x", "1", "x^2", "x^-1", "1 + x^3"}) {
    INFO("p = " << p);
    CHECK(inverse_flow_check(associate_from_p(lp(p), 6), 6).pass());
  }
}

TEST_CASE("injectivity witnesses", "[associates]") {
  const Associate ex = associate_from_p(lp("x"), 6), add = associate_from_p(lp("1"), 6);
  auto witness = [](const CheckReport& r) { return r.meta.at("witness"); };
  CHECK(witness(injectivity_probe(parse_rational_expr("x1 - x"), ex, 4, 6)) == Json{{"z", 1}, {"x", 1}, {"coeff", "1"}});
  CHECK(witness(injectivity_probe(parse_rational_expr("x1 - x"), add, 4, 6)) == Json{{"z", 1}, {"x", 0}, {"coeff", "1"}});
  CHECK(witness(injectivity_probe(parse_rational_expr("x1^2 - x^2"), ex, 4, 6)) == Json{{"z", 1}, {"x", 2}, {"coeff", "2"}});
  CHECK_THROWS_AS(injectivity_probe(parse_rational_expr("x1 - z"), ex, 4, 6), VariableMismatch);
}

TEST_CASE("precision and input errors", "[associates]") {
  CHECK_THROWS_AS(associate_from_p(lp("x"), 0), PrecisionExhausted);
  CHECK_THROWS_AS(associate_from_p(to_laurent(parse_rational_expr("z"), "z"), 3), VariableMismatch);
  CHECK_THROWS_AS(associate_from_p(LaurentSeries("x", 0, 0), 3), PrecisionExhausted);
  // p = x^-1 + O(x^2): row z^1 is known only below x^2
  const LaurentSeries trunc("x", {{-1, Scalar(1)}}, 2);
  CHECK_NOTHROW(associate_from_p(trunc, 3));
  CHECK_THROWS_AS(associate_from_p(trunc, 3, 3), PrecisionExhausted);

  SeriesXZ shifted(0, 2);
  shifted.row_mut(0) = lp("2*x");
  CHECK_THROWS_AS(associate_from_phi(shifted), NotAnAssociateBase);
  SeriesXZ polez(-1, 2);
  polez.row_mut(-1) = lp("1");
  polez.row_mut(0) = lp("x");
  CHECK_THROWS_AS(associate_from_phi(polez), NotAnAssociateBase);
}

TEST_CASE("inexact generators keep honest windows", "[associates][property]") {
  // rows computed from a truncated p agree with the exact flow wherever they claim to be known
  const LaurentSeries exact = lp("x^-1 + x + x^2");
  const LaurentSeries trunc = exact.truncated(6);
  const Associate a = associate_from_p(trunc, 4), b = associate_from_p(exact, 4);
  for (int r = 0; r <= 4; ++r) {
    CHECK(a.row(r).agrees_with(b.row(r)));
    CHECK(a.row(r).hi > a.row(r).lo);
  }
}

TEST_CASE("additive formal group", "[associates]") {
  CHECK(FormalGroup::additive().check_axioms().pass());
}
