#include <catch2/catch_amalgamated.hpp>

#include <nclheat/closedform.hpp>
#include <nclheat/quadrature.hpp>
#include <nclheat/volterra1d.hpp>

#include <cmath>
#include <numbers>

using namespace nclheat;

namespace {
const double pi = std::numbers::pi_v<double>;
}

TEST_CASE("free flux term: constant and general data", "[volterra1d]") {
  auto constant = make_constant_problem(3.0, zero_source(), 1.0);
  CHECK(initial_flux(constant, 0.25) == 3.0 / std::sqrt(pi * 0.25));

  // h(x) = x has initial flux identically 1: the Gaussian moment
  // (4/sqrt(pi)) int eta^2 e^(-eta^2) deta = 1 absorbs every t
  auto ramp = make_general_problem([](double x) { return x; }, zero_source(), 1.0);
  for (double t : {0.01, 0.25, 1.0})
    CHECK(initial_flux(ramp, t) == Catch::Approx(1.0).epsilon(1e-11));

  // constant data through the general path agrees with the closed form
  auto flat = make_general_problem([](double) { return 2.0; }, zero_source(), 1.0);
  CHECK(initial_flux(flat, 0.5) == Catch::Approx(2.0 / std::sqrt(pi * 0.5)).epsilon(1e-11));

  CHECK_THROWS_AS(initial_flux(constant, 0.0), std::domain_error);
}

TEST_CASE("difference helpers avoid cancellation", "[volterra1d]") {
  CHECK(detail::dsqrt(4.0, 1.0) == 1.0);  // sqrt(4) - sqrt(1)
  CHECK(detail::d32(4.0, 0.0) == 8.0);    // 4^(3/2)
  CHECK(detail::d52(1.0, 0.0) == 1.0);    // 1^(5/2)
  // tiny difference handled without digit loss: x^(3/2) - y^(3/2) with x ~ y.
  // The reference uses the representable gap x - y (exact by Sterbenz), since
  // 1e-12 itself rounds near 1; the quadratic term is 0.25 * delta relative.
  double x = 1.0, y = 1.0 - 1e-12;
  double delta = x - y;
  CHECK(detail::d32(x, y) == Catch::Approx(1.5 * delta).epsilon(1e-9));
}

TEST_CASE("raw product weights integrate linear functions exactly", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 64, 2.0);
  for (KernelKind kind : {KernelKind::inverse_sqrt, KernelKind::plus_sqrt}) {
    SingularWeights sw = build_weights(mesh, kind);
    for (int j : {1, 7, 64}) {
      const auto& row = sw.row(j);
      REQUIRE(row.size() == static_cast<std::size_t>(j) + 1);
      const double t = mesh.at(j);

      double sum = 0, weighted = 0;
      for (int k = 0; k <= j; ++k) {
        sum += row[static_cast<std::size_t>(k)];
        weighted += row[static_cast<std::size_t>(k)] * mesh.at(k);
      }
      // phi = 1 and phi = tau reproduce the exact kernel moments
      double m_const = (kind == KernelKind::inverse_sqrt) ? moment_sqrt_inv(HalfInt::integer(0), t)
                                                          : moment_sqrt(HalfInt::integer(0), t);
      double m_linear = (kind == KernelKind::inverse_sqrt) ? moment_sqrt_inv(HalfInt::integer(1), t)
                                                           : moment_sqrt(HalfInt::integer(1), t);
      CHECK(std::abs(sum - m_const) <= 1e-12 * m_const);
      CHECK(std::abs(weighted - m_linear) <= 1e-12 * m_linear);

      // both kernels are positive, so product weights stay nonnegative
      for (double wgt : row) CHECK(wgt >= 0.0);
    }
  }
}

TEST_CASE("substituted kernel moments match quadrature on sample intervals", "[volterra1d]") {
  const double T = 1.0;
  // weights {left, right} integrate piecewise-linear data against the kernel:
  // left + right is the plain kernel mass, right * (b - a) the (s - a) moment.
  // At the s = sqrt(T) endpoint the kernel's derivative blows up and the
  // referee quadrature is only good to ~1e-11, hence the looser epsilon.
  for (auto [a, b] : {std::pair{0.3, 0.6}, std::pair{0.0, 0.25}, std::pair{0.9, 1.0}}) {
    auto [pl, pr] = detail::SMoments::plus_kernel(a, b, T);
    auto q = [&](auto f) { return integrate(f, a, b, 1e-13); };
    double p0 = q([&](double s) { return std::sqrt(T - s * s); });
    double p1 = q([&](double s) { return (s - a) * std::sqrt(T - s * s); });
    CHECK(pl + pr == Catch::Approx(p0).epsilon(1e-9));
    CHECK(pr * (b - a) == Catch::Approx(p1).epsilon(1e-9));
  }
  // the inverse kernel is compared away from its s = sqrt(T) endpoint
  // singularity, where plain quadrature is a trustworthy referee
  for (auto [a, b] : {std::pair{0.3, 0.6}, std::pair{0.0, 0.25}, std::pair{0.5, 0.9}}) {
    auto [il, ir] = detail::SMoments::inverse_kernel(a, b, T);
    auto q = [&](auto f) { return integrate(f, a, b, 1e-13); };
    double i0 = q([&](double s) { return 1.0 / std::sqrt(T - s * s); });
    double i1 = q([&](double s) { return (s - a) / std::sqrt(T - s * s); });
    CHECK(il + ir == Catch::Approx(i0).epsilon(1e-11));
    CHECK(ir * (b - a) == Catch::Approx(i1).epsilon(1e-11));
  }
}

TEST_CASE("zero source reproduces the free flux exactly", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 1024, 2.0);
  auto spec = make_constant_problem(1.0, zero_source(), 1.0);
  FluxSolution flux = solve_flux(spec, mesh);
  for (int j = 1; j <= mesh.count; ++j) {
    const double t = mesh.at(j);
    const double v_exact = 1.0 / std::sqrt(pi * t);
    CHECK(std::abs(flux.v[static_cast<std::size_t>(j) - 1] - v_exact) <= 1e-12 * v_exact);
    CHECK(std::abs(flux.w[static_cast<std::size_t>(j) - 1] - 2 * v_exact) <= 2e-12 * v_exact);
  }
}

TEST_CASE("nonlinear marching matches the exact series", "[volterra1d][slow]") {
  GradedMesh mesh = build_graded(1.0, 1024, 2.0);
  // t = 0.25 is node 512 of the r = 2 mesh
  struct Row {
    double lambda, w_exact, tol;
  };
  // reference values from the 40-digit series evaluation
  const Row rows[] = {
      {0.5, 1.425472188957272958517711742725080475364, 2e-5},
      {1.0, 0.8648649400050985322337373599926365009554, 2e-5},
      {2.0, 0.2581370817129297160865776718479833653335, 1e-4},
  };
  for (const Row& row : rows) {
    auto spec = make_constant_problem(1.0, linear_source(row.lambda), 1.0);
    FluxSolution flux = solve_flux(spec, mesh);
    CHECK(std::abs(flux.w[511] - row.w_exact) <= row.tol * std::abs(row.w_exact));
  }

  // flux values against the differentiated series
  auto spec = make_constant_problem(1.0, linear_source(1.0), 1.0);
  FluxSolution flux = solve_flux(spec, mesh);
  CHECK(flux.v[511] == Catch::Approx(-0.02144685716310437433352780920249529240015).margin(2e-5));
  CHECK(flux.v[1023] == Catch::Approx(-0.1212108807175584582642285837043606633179).margin(2e-5));
  CHECK(flux.w[1023] == Catch::Approx(0.1290685408564648580432888359239916826668).epsilon(2e-4));

  CHECK(flux.visited_w_min <= flux.visited_w_max);
}

TEST_CASE("nonlinear marching converges at second order", "[volterra1d][slow]") {
  HalfPowerSeries series = series_W(1.0, 1.0, 40);
  auto spec = make_constant_problem(1.0, linear_source(1.0), 1.0);
  double err[2];
  int idx = 0;
  for (int N : {128, 512}) {
    GradedMesh mesh = build_graded(1.0, N, 2.0);
    FluxSolution flux = solve_flux(spec, mesh);
    double sup = 0;
    for (int j = 1; j <= N; ++j) {
      const double t = mesh.at(j);
      if (t < 0.1) continue;
      double exact = evaluate_series(series, t).value;
      sup = std::max(sup, std::abs(flux.w[static_cast<std::size_t>(j) - 1] - exact) / std::abs(exact));
    }
    err[idx++] = sup;
  }
  CHECK(err[1] < err[0] / 8.0);  // two doublings, clean order gives 16x
}

TEST_CASE("regularized head: sqrt(t) W approaches 2 h0 / sqrt(pi)", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 1024, 2.0);
  auto spec = make_constant_problem(1.0, linear_source(1.0), 1.0);
  FluxSolution flux = solve_flux(spec, mesh);
  const double limit = 2.0 / std::sqrt(pi);
  CHECK(std::abs(flux.sqrt_t_w[0] - limit) <= 0.02 * limit);
  // stored regularized traces are consistent with the raw values
  for (int j : {1, 100, 1024}) {
    const double rt = std::sqrt(mesh.at(j));
    CHECK(flux.sqrt_t_w[static_cast<std::size_t>(j) - 1] ==
          Catch::Approx(rt * flux.w[static_cast<std::size_t>(j) - 1]).epsilon(1e-14));
    CHECK(flux.sqrt_t_v[static_cast<std::size_t>(j) - 1] ==
          Catch::Approx(rt * flux.v[static_cast<std::size_t>(j) - 1]).epsilon(1e-14));
  }
}

TEST_CASE("solution scales linearly in the data for a linear source", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 128, 2.0);
  FluxSolution one = solve_flux(make_constant_problem(1.0, linear_source(1.0), 1.0), mesh);
  FluxSolution two = solve_flux(make_constant_problem(2.0, linear_source(1.0), 1.0), mesh);
  for (int j = 0; j < 128; ++j)
    CHECK(two.v[static_cast<std::size_t>(j)] ==
          Catch::Approx(2 * one.v[static_cast<std::size_t>(j)]).epsilon(1e-10));
}

TEST_CASE("averaged solution stays positive for moderate lambda", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 256, 2.0);
  FluxSolution flux = solve_flux(make_constant_problem(1.0, linear_source(0.5), 1.0), mesh);
  for (double w : flux.w) CHECK(w > 0.0);
}

TEST_CASE("dedicated linear solver agrees with the nonlinear marching", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 512, 2.0);
  FluxSolution a = solve_flux(make_constant_problem(1.0, linear_source(1.0), 1.0), mesh);
  FluxSolution b = solve_average_linear(1.0, 1.0, mesh);
  double worst = 0, worst_tail = 0;
  for (int j = 1; j <= 512; ++j) {
    double rel = std::abs(a.w[static_cast<std::size_t>(j) - 1] - b.w[static_cast<std::size_t>(j) - 1]) /
                 std::max(1.0, std::abs(b.w[static_cast<std::size_t>(j) - 1]));
    worst = std::max(worst, rel);
    if (mesh.at(j) >= 0.1) worst_tail = std::max(worst_tail, rel);
  }
  CHECK(worst <= 1e-2);       // the singular head dominates the raw difference
  CHECK(worst_tail <= 5e-4);  // away from t = 0 the two discretizations agree tightly
}

TEST_CASE("a wild source makes the step solver fail loudly", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 4, 2.0);
  auto spec = make_constant_problem(1.0, [](double w) { return 1e6 * std::sin(1e6 * w); }, 1.0);
  try {
    solve_flux(spec, mesh);
    FAIL("expected a step failure");
  } catch (const StepFailure& failure) {
    CHECK(failure.node >= 1);
    CHECK(failure.node <= 4);
  }
}

TEST_CASE("solver argument validation", "[volterra1d]") {
  GradedMesh mesh = build_graded(1.0, 8, 2.0);
  auto spec = make_constant_problem(1.0, zero_source(), 1.0);
  CHECK_THROWS_AS(solve_flux(spec, mesh, 0.0), std::invalid_argument);
  ProblemSpec1D no_source = spec;
  no_source.source = nullptr;
  CHECK_THROWS_AS(solve_flux(no_source, mesh), std::invalid_argument);
}

TEST_CASE("kernel majorant: closed-form sup and small-t slope", "[volterra1d]") {
  for (double k : {1.0, 4.0}) {
    MajorantReport rep = kernel_majorant_check(3.0, k);
    CHECK(rep.closed_form_sup == 2.0 * std::sqrt(k) / std::sqrt(pi) * 3.0);
    CHECK(std::abs(rep.sup_integral - rep.closed_form_sup) <= 1e-10 * rep.closed_form_sup);
    CHECK(rep.max_rel_deviation <= 1e-10);
    CHECK(std::abs(rep.small_t_slope - 0.5) <= 0.05);
    CHECK_FALSE(rep.samples.empty());
  }

  MajorantReport zero = kernel_majorant_check(0.0, 1.0);
  CHECK(zero.sup_integral == 0.0);
  CHECK(std::isnan(zero.small_t_slope));  // no slope on identically zero data

  CHECK_THROWS_AS(kernel_majorant_check(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_majorant_check(-1.0, 1.0), std::invalid_argument);
}
