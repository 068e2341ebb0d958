#include <catch2/catch_amalgamated.hpp>

#include <nclheat/field.hpp>
#include <nclheat/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace nclheat;

TEST_CASE("image heat kernel: reference value, symmetry, guards", "[field]") {
  // G(1,1;1,0) = (1 - e^(-1)) / (2 sqrt(pi)), to 40 digits
  CHECK(kernel(1.0, 1.0, 1.0, 0.0) ==
        Catch::Approx(0.1783179174187294676389726634200519515798).epsilon(1e-15));
  for (auto [x, xi] : {std::pair{0.5, 2.0}, std::pair{1.0, 3.5}})
    CHECK(kernel(x, 1.0, xi, 0.25) == kernel(xi, 1.0, x, 0.25));
  CHECK(kernel(0.0, 1.0, 1.0, 0.0) == 0.0);  // absorbing boundary
  CHECK_THROWS_AS(kernel(1.0, 1.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(kernel(1.0, 0.5, 1.0, 1.0), std::domain_error);
}

TEST_CASE("kernel mass over the half line collapses to erf", "[field]") {
  ErfKernelReport rep = erf_kernel_integral();
  REQUIRE_FALSE(rep.rows.empty());
  CHECK(rep.max_abs_deviation <= 1e-10);
}

TEST_CASE("erf antiderivatives reproduce the kernel moments", "[field]") {
  // m0 = int erf(c/sqrt(d)) dd and m1 = int (d - d_lo) erf(c/sqrt(d)) dd
  // assembled from the stored saturated-limit deviations; the quadrature
  // referee splits at the transition layer d ~ c^2 so it resolves the region
  // the closed forms handle analytically.
  for (double c : {0.005, 0.05, 0.5, 2.0}) {
    for (auto [d_lo, d_hi] : {std::pair{0.0, 0.5}, std::pair{0.01, 2.0}, std::pair{0.0, 1e-4}}) {
      auto hi = detail::ErfAnti::at(c, d_hi);
      auto lo = detail::ErfAnti::at(c, d_lo);
      const double delta = d_hi - d_lo;
      const double m0 = delta + (hi.a - lo.a);
      const double m1 = 0.5 * delta * delta + (hi.b - lo.b) - d_lo * (hi.a - lo.a);

      std::vector<double> cuts{d_lo, d_hi};
      for (double edge : {c * c / 9, 25 * c * c})
        if (d_lo < edge && edge < d_hi) cuts.insert(cuts.end() - 1, edge);
      double q0 = 0, q1 = 0;
      for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        q0 += integrate([&](double d) { return std::erf(c / std::sqrt(d)); }, cuts[p], cuts[p + 1]);
        q1 += integrate([&](double d) { return (d - d_lo) * std::erf(c / std::sqrt(d)); }, cuts[p],
                        cuts[p + 1]);
      }
      CHECK(m0 == Catch::Approx(q0).epsilon(1e-10));
      CHECK(m1 == Catch::Approx(q1).epsilon(1e-10));
    }
  }
  // deviations vanish in the saturated limit and at d = 0
  auto zero = detail::ErfAnti::at(1.0, 0.0);
  CHECK(zero.a == 0.0);
  CHECK(zero.b == 0.0);
}

TEST_CASE("source-free temperature: constant and general data", "[field]") {
  auto constant = make_constant_problem(1.0, zero_source(), 1.0);
  CHECK(initial_field(constant, 2.0, 1.0) ==
        Catch::Approx(0.8427007929497148693412206350826092592961).epsilon(1e-15));
  CHECK(initial_field(constant, 0.0, 1.0) == 0.0);

  auto flat = make_general_problem([](double) { return 1.0; }, zero_source(), 1.0);
  for (double x : {0.25, 1.0, 4.0})
    CHECK(initial_field(flat, x, 0.5) ==
          Catch::Approx(initial_field(make_constant_problem(1.0, zero_source(), 1.0), x, 0.5))
              .epsilon(1e-8));

  CHECK_THROWS_AS(initial_field(constant, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(initial_field(constant, -1.0, 1.0), std::domain_error);
}

TEST_CASE("zero source reconstructs the source-free temperature exactly", "[field]") {
  auto spec = make_constant_problem(1.5, zero_source(), 1.0);
  GradedMesh mesh = build_graded(1.0, 256, 2.0);
  FluxSolution flux = solve_flux(spec, mesh);
  SpatialGrid grid = axis_grid(12.0, 128);
  TemperatureField field = reconstruct(spec, flux, grid);

  for (int j : {1, 17, 128, 256})
    for (int i = 0; i < grid.count; ++i) {
      const double exact = 1.5 * std::erf(grid.at(i) / (2.0 * std::sqrt(mesh.at(j))));
      CHECK(std::abs(field.at(j, i) - exact) <= 1e-10);
    }
  // boundary column pinned to the boundary condition
  for (int j = 1; j <= 256; ++j) CHECK(field.at(j, 0) == 0.0);
  // source trace is recorded per time node
  REQUIRE(field.source_trace.size() == 256);
  for (double f : field.source_trace) CHECK(f == 0.0);
}

TEST_CASE("reconstructed temperature matches series-driven reference values", "[field][slow]") {
  auto spec = make_constant_problem(1.0, linear_source(1.0), 1.0);
  GradedMesh mesh = build_graded(1.0, 1024, 2.0);
  FluxSolution flux = solve_flux(spec, mesh);
  SpatialGrid grid = axis_grid(12.0, 97);  // spacing 1/8 puts x = 0.5 and 1 on nodes
  TemperatureField field = reconstruct(spec, flux, grid);

  // reference values computed from the exact series solution
  CHECK(field.at(512, 4) ==
        Catch::Approx(0.06981112316168983984450633721759252947231).margin(1e-5));
  CHECK(field.at(1024, 8) ==
        Catch::Approx(-0.05697824387174749509001044707661353912649).margin(1e-5));
}

TEST_CASE("reconstruction argument validation", "[field]") {
  auto spec = make_constant_problem(1.0, zero_source(), 1.0);
  GradedMesh mesh = build_graded(1.0, 16, 2.0);
  FluxSolution flux = solve_flux(spec, mesh);
  SpatialGrid grid = axis_grid(12.0, 32);

  ProblemSpec1D no_source = spec;
  no_source.source = nullptr;
  CHECK_THROWS_AS(reconstruct(no_source, flux, grid), std::invalid_argument);

  ProblemSpec1D other = make_constant_problem(1.0, zero_source(), 2.0);
  CHECK_THROWS_AS(reconstruct(other, flux, grid), std::invalid_argument);

  FluxSolution incomplete = flux;
  incomplete.w.pop_back();
  CHECK_THROWS_AS(reconstruct(spec, incomplete, grid), std::invalid_argument);
}

TEST_CASE("interior residual of the reconstructed field is small", "[field][slow]") {
  auto spec = make_constant_problem(1.0, linear_source(1.0), 1.0);
  GradedMesh mesh = build_graded(1.0, 256, 2.0);
  FluxSolution flux = solve_flux(spec, mesh);
  TemperatureField field = reconstruct(spec, flux, axis_grid(12.0, 96));
  const double residual = pde_residual(field, spec);
  CHECK(residual > 0.0);
  CHECK(residual <= 1e-2);  // measured ~1.3e-3 at this (M, N)
}

TEST_CASE("residual evaluation rejects grids too coarse for its stencils", "[field]") {
  auto spec = make_constant_problem(1.0, zero_source(), 1.0);
  GradedMesh mesh = build_graded(1.0, 16, 2.0);
  FluxSolution flux = solve_flux(spec, mesh);
  TemperatureField small = reconstruct(spec, flux, axis_grid(12.0, 32));
  CHECK_THROWS_AS(pde_residual(small, spec), std::invalid_argument);

  GradedMesh short_mesh = build_graded(1.0, 8, 2.0);
  FluxSolution short_flux = solve_flux(spec, short_mesh);
  TemperatureField shallow = reconstruct(spec, short_flux, axis_grid(12.0, 96));
  CHECK_THROWS_AS(pde_residual(shallow, spec), std::invalid_argument);
}

TEST_CASE("field CSV serialization", "[field]") {
  auto spec = make_constant_problem(1.0, zero_source(), 1.0);
  GradedMesh mesh = build_graded(1.0, 2, 2.0);
  FluxSolution flux = solve_flux(spec, mesh);
  TemperatureField field = reconstruct(spec, flux, axis_grid(1.0, 2));
  std::string csv = to_csv(field);
  CHECK(csv.rfind("t,x,u\n", 0) == 0);
  // header + N * M rows
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2);
}
