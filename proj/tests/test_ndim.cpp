#include <catch2/catch_amalgamated.hpp>

#include <nclheat/ndim.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace nclheat;

namespace {

TransverseProblem constant_problem(double h0, double lambda, double T, int N, double L, int M) {
  return make_constant_transverse(h0, linear_source(lambda), build_graded(T, N, 2.0),
                                  transverse_grid(L, M));
}

}  // namespace

TEST_CASE("transverse free term: constant, zero, and flat general data", "[ndim]") {
  const double pi = std::numbers::pi_v<double>;
  auto mesh = build_graded(0.25, 8, 2.0);
  auto grid = transverse_grid(6.0, 9);

  auto constant = make_constant_transverse(2.0, zero_source(), mesh, grid);
  CHECK(free_term(constant, 1.5, 0.25) == 2.0 / std::sqrt(pi * 0.25));

  auto zero = make_general_transverse([](double, double) { return 0.0; }, zero_source(), mesh, grid);
  CHECK(free_term(zero, 0.0, 0.1) == 0.0);

  // y-independent data through the general quadrature path
  auto flat = make_general_transverse([](double, double) { return 1.0; }, zero_source(), mesh, grid);
  for (double t : {0.01, 0.1, 0.25})
    for (double y : {-3.0, 0.0, 2.0}) {
      const double exact = 1.0 / std::sqrt(pi * t);
      CHECK(std::abs(free_term(flat, y, t) - exact) <= 1e-12 * exact);
    }

  CHECK_THROWS_AS(free_term(constant, 0.0, 0.0), std::domain_error);
}

TEST_CASE("zero source keeps the transverse flux at its free term", "[ndim]") {
  auto problem = constant_problem(1.0, 0.0, 0.25, 16, 6.0, 9);
  TransverseFlux flux = solve_transverse(problem);
  for (int j = 1; j <= 16; ++j) {
    const double f = free_term(problem, 0.0, problem.mesh.at(j));
    for (int m = 0; m < 9; ++m)
      CHECK(std::abs(flux.at_v(j, m) - f) <= 1e-13 * f);
  }
}

TEST_CASE("y-independent data reduces to the one-dimensional marching exactly", "[ndim]") {
  auto problem = constant_problem(1.0, 1.0, 0.25, 32, 6.0, 33);
  TransverseFlux flux = solve_transverse(problem);
  auto flux1d = solve_flux(make_constant_problem(1.0, linear_source(1.0), 0.25), problem.mesh);
  for (int j = 1; j <= 32; ++j)
    for (int m = 0; m < 33; ++m) {
      CHECK(std::abs(flux.at_w(j, m) - flux1d.w[static_cast<std::size_t>(j) - 1]) <= 1e-12);
      CHECK(std::abs(flux.at_v(j, m) - flux1d.v[static_cast<std::size_t>(j) - 1]) <= 1e-12);
    }
  // constant fields keep their maximum on the boundary, so the truncation
  // audit fires by design (and harmlessly: the normalized convolution is
  // exact for constant data)
  CHECK(flux.truncation_warning);
}

TEST_CASE("even transverse data gives an even flux", "[ndim]") {
  auto mesh = build_graded(0.25, 32, 2.0);
  auto grid = transverse_grid(6.0, 33);
  auto problem = make_general_transverse(
      [](double, double eta) { return std::exp(-eta * eta); }, linear_source(1.0), mesh, grid);
  TransverseFlux flux = solve_transverse(problem);
  double mag = 0;
  for (int j = 1; j <= 32; ++j)
    for (int m = 0; m < 33; ++m) mag = std::max(mag, std::abs(flux.at_v(j, m)));
  for (int j = 1; j <= 32; ++j)
    for (int m = 0; m < 33; ++m)
      CHECK(std::abs(flux.at_v(j, m) - flux.at_v(j, 32 - m)) <= 1e-12 * mag);

  // localized data decays well inside the truncated boundary: no warning
  CHECK_FALSE(flux.truncation_warning);
  // and the response is strongest in the middle of the strip
  CHECK(std::abs(flux.at_v(32, 16)) > std::abs(flux.at_v(32, 0)));
}

TEST_CASE("normalized Gaussian rows carry the exact analytic mass", "[ndim]") {
  const double pi = std::numbers::pi_v<double>;
  for (double delta : {1e-8, 1e-3, 0.1, 1.0}) {
    for (int center : {0, 8, 16}) {
      auto w = normalized_gaussian_weights(0.375, 17, center, delta);
      REQUIRE(w.size() == 17);
      double sum = 0;
      for (double v : w) {
        CHECK(v >= 0.0);
        sum += v;
      }
      const double mass = 2.0 * std::sqrt(pi * delta);
      CHECK(std::abs(sum - mass) <= 1e-14 * mass);
    }
  }
}

TEST_CASE("transverse flux CSV serialization", "[ndim]") {
  auto problem = constant_problem(1.0, 0.0, 0.25, 4, 6.0, 5);
  TransverseFlux flux = solve_transverse(problem);
  std::string csv = to_csv(flux);
  CHECK(csv.rfind("t,y,V,W\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 5);
}
