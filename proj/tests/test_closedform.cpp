#include <catch2/catch_amalgamated.hpp>

#include <nclheat/closedform.hpp>

#include <cmath>
#include <numbers>

using namespace nclheat;

namespace {

const SeriesCoefficient& coeff(const HalfPowerSeries& s, int key2) {
  auto it = s.terms.find(key2);
  REQUIRE(it != s.terms.end());
  return it->second;
}

}  // namespace

TEST_CASE("averaged-flux series coefficients, lambda = 1", "[closedform]") {
  HalfPowerSeries s = series_W(1.0, 1.0, 3);
  // ascending exponents: 2/sqrt(pi t), -2, (8/3) sqrt(t/pi), -(2/3) t, ...
  CHECK(coeff(s, -1).q == 2);
  CHECK(coeff(s, -1).over_sqrt_pi);
  CHECK(coeff(s, 0).q == -2);
  CHECK_FALSE(coeff(s, 0).over_sqrt_pi);
  CHECK(coeff(s, 1).q == Rational(8, 3));
  CHECK(coeff(s, 1).over_sqrt_pi);
  CHECK(coeff(s, 2).q == Rational(-2, 3));
  CHECK(coeff(s, 3).q == Rational(16, 45));
  CHECK(coeff(s, 4).q == Rational(-2, 45));
  CHECK(coeff(s, 5).q == Rational(64, 4725));
}

TEST_CASE("averaged-flux series scales as lambda powers", "[closedform]") {
  // t^2 coefficient is -2 lambda^5 / 45; dyadic lambda keeps it exact
  HalfPowerSeries s = series_W(1.0, 0.5, 2);
  CHECK(coeff(s, 4).q == Rational(-1, 720));
  // h0 enters linearly
  HalfPowerSeries s3 = series_W(3.0, 0.5, 2);
  CHECK(coeff(s3, 4).q == Rational(-3, 720));
}

TEST_CASE("series with lambda = 0 is the single singular term", "[closedform]") {
  HalfPowerSeries s = series_W(2.5, 0.0, 7);
  REQUIRE(s.terms.size() == 1);
  CHECK(coeff(s, -1).q == 5);
  CHECK(s.truncation_order == -1);  // exact, never refuses
}

TEST_CASE("decomposition terms are single exact monomials", "[closedform]") {
  for (auto [h0, lambda] : {std::pair{1.0, 1.0}, std::pair{0.75, 1.25}}) {
    const Rational h = rational_from_double(h0);
    const Rational lam = rational_from_double(lambda);
    auto terms = adomian_terms(h0, lambda, 9);
    REQUIRE(terms.size() == 9);

    // each term is one monomial at exponent (n-1)/2
    for (int n = 0; n < 9; ++n) {
      REQUIRE(terms[static_cast<std::size_t>(n)].terms.size() == 1);
      CHECK(terms[static_cast<std::size_t>(n)].terms.count(n - 1) == 1);
    }

    // seed and first successors in closed form
    CHECK(coeff(terms[0], -1).q == 2 * h);
    CHECK(coeff(terms[0], -1).over_sqrt_pi);
    CHECK(coeff(terms[1], 0).q == -2 * lam * h);
    CHECK_FALSE(coeff(terms[1], 0).over_sqrt_pi);
    CHECK(coeff(terms[2], 1).q == Rational(8, 3) * lam * lam * h);
    CHECK(coeff(terms[2], 1).over_sqrt_pi);
    CHECK(coeff(terms[3], 2).q == Rational(-2, 3) * lam * lam * lam * h);
    CHECK(coeff(terms[4], 3).q == Rational(16, 45) * lam * lam * lam * lam * h);
  }
}

TEST_CASE("decomposition terms sum to the series truncation exactly", "[closedform]") {
  auto terms = adomian_terms(1.0, 1.0, 18);
  HalfPowerSeries sum;
  for (const auto& t : terms) sum = add(sum, t);
  HalfPowerSeries truncated = series_W(1.0, 1.0, 8);
  CHECK(sum == truncated);  // exact rational equality, term for term

  // one term fewer drops exactly the top integer-exponent monomial
  HalfPowerSeries sum17;
  for (int n = 0; n < 17; ++n) sum17 = add(sum17, terms[static_cast<std::size_t>(n)]);
  HalfPowerSeries clipped = truncated;
  clipped.terms.erase(16);
  CHECK(sum17 == clipped);
}

TEST_CASE("boundary-flux series: leading terms and the Beta-constant route", "[closedform]") {
  HalfPowerSeries v = flux_series(1.0, 1.0, 3);
  CHECK(coeff(v, -1).q == 1);
  CHECK(coeff(v, -1).over_sqrt_pi);
  // the constant term comes from the Beta integral pi; the pi/8 variant
  // would give -1/4 here instead of -2
  CHECK(coeff(v, 0).q == -2);
  CHECK_FALSE(coeff(v, 0).over_sqrt_pi);
  CHECK(coeff(v, 1).q == 4);
  CHECK(coeff(v, 1).over_sqrt_pi);

  HalfPowerSeries v0 = flux_series(2.0, 0.0, 5);
  REQUIRE(v0.terms.size() == 1);
  CHECK(coeff(v0, -1).q == 2);
}

TEST_CASE("flux and averaged series are linked term by term", "[closedform]") {
  // V = d/dt (t W): a W term at t^(k/2) appears in V scaled by (k/2 + 1).
  // Both truncations share the exponent range, so every term pairs up.
  const int order = 6;
  for (double lambda : {1.0, 0.5}) {
    HalfPowerSeries w = series_W(1.0, lambda, order);
    HalfPowerSeries v = flux_series(1.0, lambda, order);
    CHECK(w.terms.rbegin()->first == v.terms.rbegin()->first);
    for (const auto& [k, cv] : v.terms) {
      const SeriesCoefficient& cw = coeff(w, k);
      CHECK(cv.over_sqrt_pi == cw.over_sqrt_pi);
      CHECK(cv.q == Rational(k + 2, 2) * cw.q);
    }
  }
}

TEST_CASE("closed Laplace image and its defining equation", "[closedform]") {
  LaplaceClosedForm form{1.0, 1.0};
  CHECK(laplace_Q(form, 1.0) == -std::expm1(-2.0));
  LaplaceClosedForm degenerate{3.0, 0.0};
  CHECK(laplace_Q(degenerate, 4.0) == 3.0);
  CHECK_THROWS_AS(laplace_Q(form, 0.0), std::domain_error);

  for (double lambda : {0.0, 0.5, 1.0, 2.0})
    for (double s : {0.5, 1.0, 4.0, 9.0}) {
      LaplaceClosedForm f{1.0, lambda};
      double scale = 1.0 / std::pow(s, 1.5);  // the free term h0 / s^(3/2)
      CHECK(std::abs(ode_residual(f, s)) <= 1e-12 * scale);
    }
}

TEST_CASE("term-wise Laplace transform converges to the closed image", "[closedform]") {
  HalfPowerSeries w = series_W(1.0, 1.0, 20);
  for (double s : {0.5, 1.0, 4.0, 9.0}) {
    double direct = laplace_Q(LaplaceClosedForm{1.0, 1.0}, s);
    CHECK(std::abs(laplace_of_series(w, s) - direct) <= 1e-10);
  }
}

TEST_CASE("transform coefficients match the closed image's Taylor expansion exactly", "[closedform]") {
  for (double lambda : {1.0, 0.5}) {
    auto symbol = laplace_symbol_of_series(series_W(1.0, lambda, 20));
    auto taylor = laplace_taylor_coefficients(1.0, lambda, 41);
    for (const auto& [k, q] : taylor) {
      REQUIRE(symbol.count(k) == 1);
      CHECK(symbol.at(k) == q);
    }
  }
}

TEST_CASE("series evaluation reference values", "[closedform]") {
  HalfPowerSeries w = series_W(1.0, 1.0, 40);
  CHECK(evaluate_series(w, 0.25).value ==
        Catch::Approx(0.8648649400050985322337373599926365009554).epsilon(1e-14));
  CHECK(evaluate_series(w, 1.0).value ==
        Catch::Approx(0.1290685408564648580432888359239916826668).epsilon(1e-13));
  CHECK(evaluate_series(series_W(1.0, 2.0, 40), 0.25).value ==
        Catch::Approx(0.2581370817129297160865776718479833653335).epsilon(1e-13));
  CHECK(evaluate_series(flux_series(1.0, 1.0, 40), 0.25).value ==
        Catch::Approx(-0.02144685716310437433352780920249529240015).margin(1e-14));
  CHECK_THROWS_AS(evaluate_series(w, 0.0), std::domain_error);
}

TEST_CASE("evaluation refuses when the truncation tail is not negligible", "[closedform]") {
  HalfPowerSeries coarse = series_W(1.0, 2.0, 5);
  try {
    evaluate_series(coarse, 4.0);
    FAIL("expected a truncation refusal");
  } catch (const TruncationRefusal& r) {
    CHECK(r.needed_order > 5);
    CHECK(r.estimate > 0);
  }
  // exact series never refuse
  auto monomials = adomian_terms(1.0, 2.0, 4);
  for (const auto& m : monomials) CHECK_NOTHROW(evaluate_series(m, 4.0));
  CHECK_NOTHROW(evaluate_series(series_W(1.0, 0.0, 0), 4.0));
}

TEST_CASE("series algebra: merging, cancellation, guards", "[closedform]") {
  HalfPowerSeries s;
  add_term(s, 1, SeriesCoefficient{Rational(1, 3), true});
  add_term(s, 1, SeriesCoefficient{Rational(2, 3), true});
  CHECK(coeff(s, 1).q == 1);
  add_term(s, 1, SeriesCoefficient{Rational(-1), true});
  CHECK(s.terms.empty());  // exact cancellation removes the term

  add_term(s, 0, SeriesCoefficient{Rational(1), false});
  CHECK_THROWS_AS(add_term(s, 0, SeriesCoefficient{Rational(1), true}), std::logic_error);
  CHECK_THROWS_AS(add_term(s, -2, SeriesCoefficient{Rational(1), false}), std::domain_error);

  CHECK(scale(s, Rational(0)).terms.empty());
  CHECK_THROWS_AS(shift_half_power(s, -2), std::domain_error);
  HalfPowerSeries shifted = shift_half_power(s, 3);
  CHECK(coeff(shifted, 3).q == 1);
}

TEST_CASE("series serialization is one exact term per line", "[closedform]") {
  HalfPowerSeries s = series_W(1.0, 1.0, 0);
  CHECK(serialize(s) == "-1/2, 2, 1\n0/2, -2, 0\n");
}
