#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "nclheat/format.hpp"
#include "nclheat/mesh.hpp"
#include "nclheat/volterra1d.hpp"

namespace nclheat {

/**
 * Data of the n = 2 problem: one transverse coordinate y on a truncated
 * symmetric grid, initial temperature h(xi, eta) (constant fast path), and
 * the source functional F of the per-column time-averaged flux.
 */
struct TransverseProblem {
  SpatialGrid y_grid;  // [-L, L]
  GradedMesh mesh;
  bool constant_data = true;
  double h0 = 0;
  std::function<double(double, double)> h;  // (xi, eta)
  std::function<double(double)> source;
  double tol = 1e-10;
};

inline TransverseProblem make_constant_transverse(double h0, std::function<double(double)> source,
                                                  const GradedMesh& mesh, const SpatialGrid& y_grid,
                                                  double tol = 1e-10) {
  if (!source) throw std::invalid_argument("make_constant_transverse: source functional required");
  return TransverseProblem{y_grid, mesh, true, h0, {}, std::move(source), tol};
}

inline TransverseProblem make_general_transverse(std::function<double(double, double)> h,
                                                 std::function<double(double)> source, const GradedMesh& mesh,
                                                 const SpatialGrid& y_grid, double tol = 1e-10) {
  if (!h || !source) throw std::invalid_argument("make_general_transverse: data and source required");
  return TransverseProblem{y_grid, mesh, false, 0.0, std::move(h), std::move(source), tol};
}

/**
 * Boundary flux V(y_k, t_j) and per-column averages W(y_k, t_j), j >= 1,
 * row-major by time. truncation_warning is set when the source trace at the
 * grid boundary exceeds 1e-10 of its maximum (for y-independent data this
 * fires benignly: the boundary equals the maximum everywhere, while the
 * normalized convolution below handles constant fields exactly).
 */
struct TransverseFlux {
  SpatialGrid y_grid;
  GradedMesh mesh;
  std::vector<double> v;
  std::vector<double> w;
  bool truncation_warning = false;

  double at_v(int j, int m) const {
    return v[static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(y_grid.count) +
             static_cast<std::size_t>(m)];
  }
  double at_w(int j, int m) const {
    return w[static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(y_grid.count) +
             static_cast<std::size_t>(m)];
  }
};

/**
 * Free term of the transverse flux equation (n = 2):
 *   f(y,t) = (1/(t (2 sqrt(pi t))^2)) int_0^inf xi e^(-xi^2/4t)
 *            int_R e^(-(y-eta)^2/4t) h(xi, eta) deta dxi.
 * After xi = 2 sqrt(t) a, eta = y + 2 sqrt(t) b this is
 *   (2/(pi sqrt(t))) int_0^inf int_R a e^(-a^2) e^(-b^2) h(2 sqrt(t) a, y + 2 sqrt(t) b) db da,
 * evaluated by composite Gauss-Legendre on a in [0,6], b in [-6,6] (the
 * discarded Gaussian tails are below 1e-15). Constant data collapses to
 * h0 / sqrt(pi t), independent of y.
 */
inline double free_term(const TransverseProblem& problem, double y, double t) {
  if (!(t > 0)) throw std::domain_error("free_term: t must be positive");
  if (problem.constant_data) return problem.h0 / std::sqrt(std::numbers::pi_v<double> * t);
  const double rt = std::sqrt(t);
  using gauss = boost::math::quadrature::gauss<double, 32>;
  auto inner = [&](double a) {
    double sum = 0;
    for (int p = 0; p < 6; ++p) {
      const double b0 = -6.0 + 2.0 * p, b1 = b0 + 2.0;
      sum += gauss::integrate(
          [&](double b) { return std::exp(-b * b) * problem.h(2 * rt * a, y + 2 * rt * b); }, b0, b1);
    }
    return a * std::exp(-a * a) * sum;
  };
  double outer = 0;
  for (int p = 0; p < 3; ++p) {
    const double a0 = 2.0 * p, a1 = a0 + 2.0;
    outer += gauss::integrate(inner, a0, a1);
  }
  return 2.0 / (std::numbers::pi_v<double> * rt) * outer;
}

/**
 * Marching solver for the n = 2 flux equation
 *   V(y,t) = f(y,t) - (2/(2 sqrt(pi))^2) int_0^t (t-tau)^(-1)
 *            int F(W(eta,tau)) e^(-(y-eta)^2/4(t-tau)) deta dtau.
 *
 * The Gaussian mass (2 sqrt(pi (t-tau)))^(n-1) folded into the time kernel
 * leaves the same integrable (t-tau)^(-1/2) singularity as in 1D:
 *   V(y,t) = f(y,t) - (1/sqrt(pi)) int_0^t (t-tau)^(-1/2) C(y,tau; t) dtau,
 * where C is the mass-normalized convolution of F(W(., tau)) at width
 * 2(t-tau). Discrete weights are row-normalized so they sum to the exact
 * Gaussian mass (this also resolves sub-grid widths: as tau -> t the value
 * tends to F(W(y, t)) itself, which closes the per-column scalar equation).
 * Time discretization mirrors the 1D solver exactly, so y-independent data
 * reproduces the 1D marching equations verbatim. Convolutions are summed
 * left-to-right over the grid for reproducibility.
 */
inline TransverseFlux solve_transverse(const TransverseProblem& problem) {
  if (!problem.source) throw std::invalid_argument("solve_transverse: source functional required");
  if (!(problem.tol > 0)) throw std::invalid_argument("solve_transverse: tolerance must be positive");
  const int N = problem.mesh.count;
  const int M = problem.y_grid.count;
  const double dy = problem.y_grid.spacing;
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi_v<double>);

  TransverseFlux out;
  out.y_grid = problem.y_grid;
  out.mesh = problem.mesh;
  out.v.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(M), 0.0);
  out.w.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(M), 0.0);

  std::vector<double> s(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= N; ++j) s[static_cast<std::size_t>(j)] = std::sqrt(problem.mesh.at(j));

  // per-column state across rows
  std::vector<std::vector<double>> psi(static_cast<std::size_t>(N) + 1,
                                       std::vector<double>(static_cast<std::size_t>(M), 0.0));
  std::vector<std::vector<double>> ftrace(static_cast<std::size_t>(N) + 1,
                                          std::vector<double>(static_cast<std::size_t>(M), 0.0));
  std::vector<double> psi0(static_cast<std::size_t>(M), 0.0);
  bool psi_head_frozen = false;

  std::vector<double> gauss_row(static_cast<std::size_t>(M), 0.0);
  std::vector<double> conv(static_cast<std::size_t>(M), 0.0);
  std::vector<double> chat1(static_cast<std::size_t>(M), 0.0);  // s_1 * C(., tau_1; t_j)
  std::vector<double> chat2(static_cast<std::size_t>(M), 0.0);
  std::vector<double> k_base(static_cast<std::size_t>(M), 0.0);
  std::vector<double> a_base(static_cast<std::size_t>(M), 0.0);
  std::vector<double> fvals(static_cast<std::size_t>(M), 0.0);

  // normalized convolution of ftrace[k] at width 2(t_j - t_k), into conv
  auto convolve = [&](int k, double delta) {
    for (int d = 0; d < M; ++d) gauss_row[static_cast<std::size_t>(d)] = std::exp(-(dy * d) * (dy * d) / (4.0 * delta));
    const auto& src = ftrace[static_cast<std::size_t>(k)];
    for (int m = 0; m < M; ++m) {
      double num = 0, den = 0;
      for (int i = 0; i < M; ++i) {
        const double g = gauss_row[static_cast<std::size_t>(std::abs(m - i))];
        num += g * src[static_cast<std::size_t>(i)];
        den += g;
      }
      conv[static_cast<std::size_t>(m)] = num / den;
    }
  };

  for (int j = 1; j <= N; ++j) {
    const double Tj = problem.mesh.at(j);
    const double sj = s[static_cast<std::size_t>(j)];
    for (int m = 0; m < M; ++m)
      fvals[static_cast<std::size_t>(m)] = free_term(problem, problem.y_grid.at(m), Tj);

    // cumulative-average base per column (all intervals but the last)
    for (int m = 0; m < M; ++m) {
      double acc = 0;
      if (j > 1) {
        const double p0 = psi_head_frozen ? psi0[static_cast<std::size_t>(m)] : psi[1][static_cast<std::size_t>(m)];
        acc += 0.5 * (p0 + psi[1][static_cast<std::size_t>(m)]) * s[1];
        for (int k = 1; k < j - 1; ++k)
          acc += 0.5 *
                 (psi[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] +
                  psi[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(m)]) *
                 (s[static_cast<std::size_t>(k) + 1] - s[static_cast<std::size_t>(k)]);
      }
      a_base[static_cast<std::size_t>(m)] = acc;
    }

    // per-node kernel weights for this row (node k collects the right weight
    // of interval k-1 and the left weight of interval k)
    std::vector<double> node_weight(static_cast<std::size_t>(j) + 1, 0.0);
    for (int k = 0; k < j; ++k) {
      auto [wl, wr] =
          detail::SMoments::inverse_kernel(s[static_cast<std::size_t>(k)], s[static_cast<std::size_t>(k) + 1], Tj);
      node_weight[static_cast<std::size_t>(k)] += wl;
      node_weight[static_cast<std::size_t>(k) + 1] += wr;
    }
    const double wr_last = node_weight[static_cast<std::size_t>(j)];

    // known part of the kernel sum: one convolution per past node
    std::fill(k_base.begin(), k_base.end(), 0.0);
    for (int k = 1; k < j; ++k) {
      convolve(k, Tj - problem.mesh.at(k));
      for (int m = 0; m < M; ++m) {
        const double chat = s[static_cast<std::size_t>(k)] * conv[static_cast<std::size_t>(m)];
        if (k == 1) chat1[static_cast<std::size_t>(m)] = chat;
        if (k == 2) chat2[static_cast<std::size_t>(m)] = chat;
        k_base[static_cast<std::size_t>(m)] += node_weight[static_cast<std::size_t>(k)] * chat;
      }
    }
    // s = 0 head of the row integrand: node-1 value while only one past
    // sample exists, then per-row linear extrapolation from the two nearest
    // samples (for y-independent data this reproduces the 1D head exactly);
    // at the first row the head joins the endpoint inside the iteration
    if (j >= 2) {
      for (int m = 0; m < M; ++m) {
        const double head = (j == 2) ? chat1[static_cast<std::size_t>(m)]
                                     : 2 * chat1[static_cast<std::size_t>(m)] - chat2[static_cast<std::size_t>(m)];
        k_base[static_cast<std::size_t>(m)] += node_weight[0] * head;
      }
    }
    const double wl_first = node_weight[0];

    const double ds_last = sj - s[static_cast<std::size_t>(j) - 1];
    const double psi_prev_s = s[static_cast<std::size_t>(j) - 1];

    for (int m = 0; m < M; ++m) {
      const double f = fvals[static_cast<std::size_t>(m)];
      const double ab = a_base[static_cast<std::size_t>(m)];
      const double kb = k_base[static_cast<std::size_t>(m)];
      const double psi_prev = (j > 1) ? psi[static_cast<std::size_t>(j) - 1][static_cast<std::size_t>(m)] : 0.0;

      double wj = 0;
      auto propose = [&](double vj) {
        const double psi_j = sj * vj;
        double integral_psi;
        if (j == 1)
          integral_psi = psi_j * s[1];
        else
          integral_psi = ab + 0.5 * (psi_prev + psi_j) * ds_last;
        wj = 2.0 * integral_psi / Tj;
        const double chat_j = sj * problem.source(wj);
        double kernel_sum = kb + wr_last * chat_j;
        if (j == 1) kernel_sum += wl_first * chat_j;  // constant head at the first row
        return f - inv_sqrt_pi * 2.0 * kernel_sum;
      };

      double vj = (j == 1) ? f : out.at_v(j - 1, m) * psi_prev_s / sj;
      bool converged = false;
      constexpr int kCap = 100;
      int it = 0;
      for (; it < kCap / 2; ++it) {
        const double vnew = propose(vj);
        if (std::abs(vnew - vj) <= problem.tol * std::max(1.0, std::abs(vj))) {
          vj = vnew;
          converged = true;
          break;
        }
        vj += 0.5 * (vnew - vj);
      }
      if (!converged) {
        double va = vj, ga = propose(va) - va;
        double vb = vj + (std::abs(vj) + 1.0) * 1e-3, gb = propose(vb) - vb;
        for (; it < kCap; ++it) {
          if (std::abs(gb) <= problem.tol * std::max(1.0, std::abs(vb))) {
            vj = vb;
            converged = true;
            break;
          }
          const double denom = gb - ga;
          double vc = (denom != 0 && std::isfinite(denom)) ? vb - gb * (vb - va) / denom : 0.5 * (va + vb);
          if (!std::isfinite(vc)) break;
          va = vb;
          ga = gb;
          vb = vc;
          gb = propose(vb) - vb;
        }
      }
      if (!converged) throw StepFailure(j);
      (void)propose(vj);

      psi[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] = sj * vj;
      ftrace[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] = problem.source(wj);
      out.v[static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(M) + static_cast<std::size_t>(m)] = vj;
      out.w[static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(M) + static_cast<std::size_t>(m)] = wj;
    }

    if (j == 2 && !psi_head_frozen) {
      for (int m = 0; m < M; ++m)
        psi0[static_cast<std::size_t>(m)] =
            2 * psi[1][static_cast<std::size_t>(m)] - psi[2][static_cast<std::size_t>(m)];
      psi_head_frozen = true;
    }
  }

  // truncation audit on the stored source trace
  double fmax = 0, fboundary = 0;
  for (int j = 1; j <= N; ++j)
    for (int m = 0; m < M; ++m) {
      const double a = std::abs(ftrace[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)]);
      fmax = std::max(fmax, a);
      if (m == 0 || m == M - 1) fboundary = std::max(fboundary, a);
    }
  out.truncation_warning = fboundary > 1e-10 * fmax;
  return out;
}

/// Row-normalized Gaussian weights at width 2 delta: they sum to the exact
/// mass 2 sqrt(pi delta) by construction (the discrete form of the
/// normalization identity for the transverse Gaussian).
inline std::vector<double> normalized_gaussian_weights(double dy, int M, int center, double delta) {
  if (!(delta > 0)) throw std::domain_error("normalized_gaussian_weights: width must be positive");
  std::vector<double> w(static_cast<std::size_t>(M));
  double sum = 0;
  for (int i = 0; i < M; ++i) {
    const double d = dy * (i - center);
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (4.0 * delta));
    sum += w[static_cast<std::size_t>(i)];
  }
  const double mass = 2.0 * std::sqrt(std::numbers::pi_v<double> * delta);
  for (double& x : w) x *= mass / sum;
  return w;
}

/// CSV serialization, header `t,y,V,W`, row-major by time.
inline std::string to_csv(const TransverseFlux& flux) {
  std::string out = "t,y,V,W\n";
  for (int j = 1; j <= flux.mesh.count; ++j)
    for (int m = 0; m < flux.y_grid.count; ++m) {
      out += format_g17(flux.mesh.at(j));
      out += ',';
      out += format_g17(flux.y_grid.at(m));
      out += ',';
      out += format_g17(flux.at_v(j, m));
      out += ',';
      out += format_g17(flux.at_w(j, m));
      out += '\n';
    }
  return out;
}

}  // namespace nclheat
