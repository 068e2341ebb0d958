#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "nclheat/format.hpp"
#include "nclheat/mesh.hpp"
#include "nclheat/quadrature.hpp"
#include "nclheat/specfun.hpp"
#include "nclheat/volterra1d.hpp"

namespace nclheat {

/**
 * Half-space heat kernel with a Dirichlet image across x = 0:
 *   G(x,t; xi,tau) = [e^(-(x-xi)^2/4(t-tau)) - e^(-(x+xi)^2/4(t-tau))] / (2 sqrt(pi (t-tau)))
 * Positive for x, xi > 0, vanishes at x = 0, symmetric in (x, xi).
 */
struct HeatKernel1D {
  static double evaluate(double x, double t, double xi, double tau) {
    if (!(t > tau)) throw std::domain_error("HeatKernel1D: requires t > tau");
    const double dt4 = 4.0 * (t - tau);
    const double direct = std::exp(-(x - xi) * (x - xi) / dt4);
    const double image = std::exp(-(x + xi) * (x + xi) / dt4);
    return (direct - image) / (2.0 * std::sqrt(std::numbers::pi_v<double> * (t - tau)));
  }
};

inline double kernel(double x, double t, double xi, double tau) { return HeatKernel1D::evaluate(x, t, xi, tau); }

/**
 * Verifies by quadrature that the kernel integrated over the spatial half
 * line collapses to the error function:
 *   int_0^inf G(x,t; xi,tau) dxi = erf(x / (2 sqrt(t-tau))).
 * The upper limit is the spatial half-line (an integration variable, not a
 * time); the quadrature is truncated where the Gaussian tail is below 1e-15.
 */
struct ErfKernelReport {
  struct Row {
    double x = 0;
    double dt = 0;  // t - tau
    double quadrature = 0;
    double expected = 0;
    double deviation = 0;
  };
  std::vector<Row> rows;
  double max_abs_deviation = 0;
};

inline ErfKernelReport erf_kernel_integral() {
  ErfKernelReport rep;
  const double xs[] = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 20.0};
  const double dts[] = {0.01, 0.1, 1.0, 4.0};
  for (double x : xs)
    for (double dt : dts) {
      const double upper = x + 14.0 * std::sqrt(dt);
      const double q = integrate([&](double xi) { return kernel(x, dt, xi, 0.0); }, 0.0, upper, 1e-12);
      const double e = erf(x / (2.0 * std::sqrt(dt)));
      rep.rows.push_back({x, dt, q, e, q - e});
      rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(q - e));
    }
  return rep;
}

/**
 * Temperature of the source-free problem. Constant data gives
 * u0(x,t) = h0 erf(x / (2 sqrt(t))) exactly; general data integrates the
 * kernel against h over the half line.
 */
inline double initial_field(const ProblemSpec1D& spec, double x, double t) {
  if (!(t > 0)) throw std::domain_error("initial_field: t must be positive");
  if (x < 0) throw std::domain_error("initial_field: x must be nonnegative");
  if (spec.constant_data) return spec.h0 * erf(x / (2.0 * std::sqrt(t)));
  const double upper = x + 14.0 * std::sqrt(t);
  return integrate([&](double xi) { return kernel(x, t, xi, 0.0) * spec.h(xi); }, 0.0, upper, 1e-9);
}

/**
 * Reconstructed temperature on a space-time grid (time rows j = 1..N from the
 * flux mesh). source_trace keeps the F(W(t_j)) values used, for residual
 * checks.
 */
struct TemperatureField {
  SpatialGrid x_grid;
  GradedMesh mesh;
  std::vector<double> values;        // row-major: values[(j-1) * M + i]
  std::vector<double> source_trace;  // F(W(t_j)), j = 1..N

  double at(int j, int i) const {
    return values[static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(x_grid.count) +
                  static_cast<std::size_t>(i)];
  }
};

namespace detail {

/// erf(x / (2 sqrt(d))) with the d -> 0+ limit resolved (1 for x > 0, 0 at x = 0).
inline double erf_factor(double x, double d) {
  if (d <= 0) return x > 0 ? 1.0 : 0.0;
  return std::erf(x / (2.0 * std::sqrt(d)));
}

/**
 * Closed antiderivatives of the erf kernel in the depth variable d = t - s^2,
 * with u = c/sqrt(d):
 *   int erf(c/sqrt(d)) dd   = d erf(u) + (2c^2/sqrt(pi)) e^(-u^2)/u + 2c^2 erf(u)
 *   int d erf(c/sqrt(d)) dd = (d^2/2) erf(u)
 *          + (c^4/(3 sqrt(pi))) e^(-u^2) (1/u^3 - 2/u) - (2c^4/3) erf(u)
 * (verified by differentiation). Differencing these directly across a short
 * saturated interval (u large, erf ~ 1) would cancel the constants 2c^2 and
 * 2c^4/3, so what is stored is the deviation from the saturated limit:
 *   a(d) = A(d) - (d + 2c^2)       = (2c^2/sqrt(pi)) e^(-u^2)/u - (d + 2c^2) erfc(u)
 *   b(d) = B(d) - (d^2/2 - 2c^4/3) = (c^4/(3 sqrt(pi))) e^(-u^2) (1/u^3 - 2/u)
 *                                    + (2c^4/3 - d^2/2) erfc(u)
 * which vanish as u -> infinity, and at d = 0. Kernel moments over
 * [d_lo, d_hi] then assemble cancellation-free:
 *   m0 = (d_hi - d_lo) + (a_hi - a_lo)
 *   m1 = (d_hi - d_lo)^2 / 2 + (b_hi - b_lo) - d_lo (a_hi - a_lo).
 * This makes the product rule below exact for the erf factor, whose
 * transition layer d ~ c^2 is far below the mesh resolution at small x.
 */
struct ErfAnti {
  double a = 0, b = 0;

  static ErfAnti at(double c, double d) {
    if (d <= 0) return {0, 0};
    const double c2 = c * c;
    const double sqrt_pi = std::sqrt(std::numbers::pi_v<double>);
    const double u = c / std::sqrt(d);
    const double e = std::exp(-u * u);
    const double q = std::erfc(u);
    return {(2 * c2 / sqrt_pi) * (e / u) - (d + 2 * c2) * q,
            (c2 * c2 / (3 * sqrt_pi)) * e * (1 / (u * u * u) - 2 / u) +
                (2 * c2 * c2 / 3 - 0.5 * d * d) * q};
  }
};

}  // namespace detail

/**
 * Temperature reconstruction from a solved flux:
 *   u(x,t) = u0(x,t) - int_0^t erf(x / (2 sqrt(t-tau))) F(W(tau)) dtau.
 * The integrand's W-singularity is absorbed by chi_F = sqrt(tau) F(W(tau)):
 * in s = sqrt(tau) the integral is 2 int_0^{s_j} erf(...) chi_F(s) ds with a
 * bounded integrand. On s in [0, s_j/2] the erf factor is slowly varying and
 * the trapezoid on the mesh's s-nodes suffices; the s = 0 head uses the same
 * rule as the flux solver (node-1 value for j = 1, linear extrapolation once
 * two nodes exist). On s in [s_j/2, s_j] the erf factor develops a layer of
 * width d ~ x^2 in the depth d = t_j - s^2, unresolvable by any fixed mesh at
 * small x, so there the erf factor is integrated exactly in d (ErfAnti)
 * against a piecewise-linear interpolant of the smooth remaining factor
 * F(W)/2. Without this split the layer error, amplified by 1/dx^2 in u_xx,
 * grows under simultaneous grid refinement.
 */
inline TemperatureField reconstruct(const ProblemSpec1D& spec, const FluxSolution& flux,
                                    const SpatialGrid& x_grid) {
  if (!spec.source) throw std::invalid_argument("reconstruct: source functional required");
  if (flux.mesh.count < 2 || flux.w.size() != static_cast<std::size_t>(flux.mesh.count))
    throw std::invalid_argument("reconstruct: flux solution incomplete");
  if (flux.mesh.horizon != spec.horizon)
    throw std::invalid_argument("reconstruct: flux mesh does not match the problem horizon");

  const int N = flux.mesh.count;
  const int M = x_grid.count;
  TemperatureField field;
  field.x_grid = x_grid;
  field.mesh = flux.mesh;
  field.values.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(M), 0.0);
  field.source_trace.resize(static_cast<std::size_t>(N));

  std::vector<double> s(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= N; ++j) s[static_cast<std::size_t>(j)] = std::sqrt(flux.mesh.at(j));

  std::vector<double> chiF(static_cast<std::size_t>(N) + 1, 0.0);
  for (int j = 1; j <= N; ++j) {
    field.source_trace[static_cast<std::size_t>(j) - 1] = spec.source(flux.w[static_cast<std::size_t>(j) - 1]);
    chiF[static_cast<std::size_t>(j)] =
        s[static_cast<std::size_t>(j)] * field.source_trace[static_cast<std::size_t>(j) - 1];
  }
  chiF[0] = (N >= 2) ? 2 * chiF[1] - chiF[2] : chiF[1];

  // psi[k] = chi_F(s_k) / (2 s_k) = F(W(t_k)) / 2, the smooth factor of the
  // product rule on the layer half of each row (only nodes k >= 1 are used).
  std::vector<double> psi(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = 1; k <= N; ++k)
    psi[static_cast<std::size_t>(k)] = 0.5 * field.source_trace[static_cast<std::size_t>(k) - 1];

  for (int i = 0; i < M; ++i) {
    const double x = x_grid.at(i);
    const double c = 0.5 * x;
    for (int j = 1; j <= N; ++j) {
      const double tj = flux.mesh.at(j);
      double u = spec.constant_data ? spec.h0 * erf(x / (2.0 * std::sqrt(tj))) : initial_field(spec, x, tj);
      if (x > 0) {
        int split = 1;  // first node with s_k >= s_j / 2 (split <= j - 1 for j >= 2)
        while (s[static_cast<std::size_t>(split)] < 0.5 * s[static_cast<std::size_t>(j)]) ++split;

        detail::NeumaierSum acc;
        double g_prev = detail::erf_factor(x, tj) * ((j == 1) ? chiF[1] : chiF[0]);
        for (int k = 1; k <= split; ++k) {
          const double g =
              detail::erf_factor(x, tj - flux.mesh.at(k)) * chiF[static_cast<std::size_t>(k)];
          acc.add(0.5 * (g_prev + g) * (s[static_cast<std::size_t>(k)] - s[static_cast<std::size_t>(k) - 1]));
          g_prev = g;
        }
        // exact erf moments, interval [s_k, s_{k+1}] <-> d in [d_lo, d_hi]
        detail::ErfAnti hi = detail::ErfAnti::at(c, tj - flux.mesh.at(split));
        for (int k = split; k < j; ++k) {
          const double d_hi = tj - flux.mesh.at(k);
          const double d_lo = tj - flux.mesh.at(k + 1);
          const detail::ErfAnti lo = detail::ErfAnti::at(c, d_lo);
          const double delta = d_hi - d_lo;
          const double da = hi.a - lo.a;
          const double m0 = delta + da;
          const double m1 = 0.5 * delta * delta + (hi.b - lo.b) - d_lo * da;  // of (d - d_lo)
          const double ratio = m1 / delta;
          acc.add(psi[static_cast<std::size_t>(k) + 1] * (m0 - ratio) +
                  psi[static_cast<std::size_t>(k)] * ratio);
          hi = lo;
        }
        u -= 2.0 * acc.value();
      } else {
        u = 0.0;  // boundary row pinned
      }
      field.values[static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(M) + static_cast<std::size_t>(i)] = u;
    }
  }
  return field;
}

/**
 * Max PDE residual |u_t - u_xx + F(W(t))| / max|u| over interior samples.
 * The time mesh is graded, so u_t uses a locally uniform 5-point stencil:
 * spacing delta = (t_{j+1} - t_{j-1})/4, each sample value interpolated
 * quadratically through the 3 nearest stored rows; u_xx is the fourth-order
 * centered five-point stencil on the uniform x grid.
 */
inline double pde_residual(const TemperatureField& field, const ProblemSpec1D& spec) {
  (void)spec;
  const int M = field.x_grid.count;
  const int N = field.mesh.count;
  if (M < 68) throw std::invalid_argument("pde_residual: need at least 64 interior x nodes");
  if (N < 16) throw std::invalid_argument("pde_residual: time grid too coarse");

  const double dx = field.x_grid.spacing;
  double umax = 0;
  for (double v : field.values) umax = std::max(umax, std::abs(v));
  if (umax == 0) return 0;

  // quadratic interpolation of u(x_i, .) through rows {k-1, k, k+1}
  auto interp = [&](int i, double t) {
    int lo = 1, hi = N;  // bracket among stored rows
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      (field.mesh.at(mid) <= t ? lo : hi) = mid;
    }
    int k = std::clamp(lo, 2, N - 1);
    const double ta = field.mesh.at(k - 1), tb = field.mesh.at(k), tc = field.mesh.at(k + 1);
    const double ua = field.at(k - 1, i), ub = field.at(k, i), uc = field.at(k + 1, i);
    const double la = (t - tb) * (t - tc) / ((ta - tb) * (ta - tc));
    const double lb = (t - ta) * (t - tc) / ((tb - ta) * (tb - tc));
    const double lc = (t - ta) * (t - tb) / ((tc - ta) * (tc - tb));
    return la * ua + lb * ub + lc * uc;
  };

  const double t_floor = field.mesh.horizon / 10.0;
  double worst = 0;
  for (int j = 2; j <= N - 1; ++j) {
    const double tj = field.mesh.at(j);
    if (tj < t_floor) continue;
    const double delta = (field.mesh.at(j + 1) - field.mesh.at(j - 1)) / 4.0;
    const double fw = field.source_trace[static_cast<std::size_t>(j) - 1];
    for (int i = 2; i < M - 2; ++i) {
      const double um2 = interp(i, tj - 2 * delta), um1 = interp(i, tj - delta);
      const double up1 = interp(i, tj + delta), up2 = interp(i, tj + 2 * delta);
      const double ut = (um2 - 8 * um1 + 8 * up1 - up2) / (12 * delta);
      const double uxx = (-field.at(j, i - 2) + 16 * field.at(j, i - 1) - 30 * field.at(j, i) +
                          16 * field.at(j, i + 1) - field.at(j, i + 2)) /
                         (12 * dx * dx);
      worst = std::max(worst, std::abs(ut - uxx + fw));
    }
  }
  return worst / umax;
}

/// CSV serialization, header `t,x,u`, row-major by time.
inline std::string to_csv(const TemperatureField& field) {
  std::string out = "t,x,u\n";
  for (int j = 1; j <= field.mesh.count; ++j)
    for (int i = 0; i < field.x_grid.count; ++i) {
      out += format_g17(field.mesh.at(j));
      out += ',';
      out += format_g17(field.x_grid.at(i));
      out += ',';
      out += format_g17(field.at(j, i));
      out += '\n';
    }
  return out;
}

}  // namespace nclheat
