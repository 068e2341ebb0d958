#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nclheat/mesh.hpp"
#include "nclheat/quadrature.hpp"
#include "nclheat/specfun.hpp"

namespace nclheat {

/**
 * Data of the 1D problem on the half line: initial temperature h (constant h0
 * or a general bounded profile), the source functional F acting on the
 * time-averaged boundary flux, and the time horizon.
 */
struct ProblemSpec1D {
  double horizon = 0;
  bool constant_data = true;
  double h0 = 0;
  std::function<double(double)> h;       // used when !constant_data
  std::function<double(double)> source;  // F
  std::optional<double> lipschitz_bound;
};

inline ProblemSpec1D make_constant_problem(double h0, std::function<double(double)> source, double T,
                                           std::optional<double> lipschitz = std::nullopt) {
  if (!(T > 0)) throw std::invalid_argument("make_constant_problem: horizon must be positive");
  if (!source) throw std::invalid_argument("make_constant_problem: source functional required");
  if (lipschitz && !(*lipschitz >= 0)) throw std::invalid_argument("make_constant_problem: negative Lipschitz bound");
  return ProblemSpec1D{T, true, h0, {}, std::move(source), lipschitz};
}

inline ProblemSpec1D make_general_problem(std::function<double(double)> h, std::function<double(double)> source,
                                          double T, std::optional<double> lipschitz = std::nullopt) {
  if (!(T > 0)) throw std::invalid_argument("make_general_problem: horizon must be positive");
  if (!h || !source) throw std::invalid_argument("make_general_problem: data and source required");
  if (lipschitz && !(*lipschitz >= 0)) throw std::invalid_argument("make_general_problem: negative Lipschitz bound");
  return ProblemSpec1D{T, false, 0.0, std::move(h), std::move(source), lipschitz};
}

inline std::function<double(double)> zero_source() {
  return [](double) { return 0.0; };
}

inline std::function<double(double)> linear_source(double lambda) {
  return [lambda](double w) { return lambda * w; };
}

/**
 * Boundary flux V(t_j) and its running time average W(t_j) on a graded mesh,
 * j >= 1 (index 0 of the arrays). Both are singular like t^(-1/2) at the
 * origin, so the regularized values sqrt(t_j) V, sqrt(t_j) W are stored too;
 * those stay bounded as t_j -> 0.
 *
 * visited_w_min/max record every argument the solver fed to F, so a caller
 * can audit the range a declared Lipschitz bound (or a table) must cover.
 */
struct FluxSolution {
  GradedMesh mesh;
  std::vector<double> v;
  std::vector<double> w;
  std::vector<double> sqrt_t_v;
  std::vector<double> sqrt_t_w;
  double visited_w_min = std::numeric_limits<double>::infinity();
  double visited_w_max = -std::numeric_limits<double>::infinity();
};

/**
 * Product-trapezoidal weights for the singular kernels on a graded mesh:
 * row j satisfies int_0^{t_j} phi(tau) K(t_j - tau) dtau = sum_k w[j][k] phi(t_k)
 * exactly for phi piecewise linear on the mesh, K = (t-tau)^(-1/2) or
 * (t-tau)^(+1/2). Row j has j+1 entries (nodes 0..j).
 */
struct SingularWeights {
  KernelKind kernel_kind = KernelKind::inverse_sqrt;
  std::vector<std::vector<double>> weights;

  const std::vector<double>& row(int j) const { return weights[static_cast<std::size_t>(j) - 1]; }
};

/// Per-step iteration did not converge within the cap.
struct StepFailure : std::runtime_error {
  int node;
  explicit StepFailure(int j)
      : std::runtime_error("solve_flux: per-step iteration failed to converge at node " + std::to_string(j)),
        node(j) {}
};

namespace detail {

/// sqrt(x) - sqrt(y) without cancellation, x >= y >= 0.
inline double dsqrt(double x, double y) {
  double denom = std::sqrt(x) + std::sqrt(y);
  return denom == 0 ? 0.0 : (x - y) / denom;
}

/// x^(3/2) - y^(3/2) via u^3 - v^3 = (u - v)(u^2 + uv + v^2), u = sqrt(x).
inline double d32(double x, double y) {
  double u = std::sqrt(x), v = std::sqrt(y);
  return dsqrt(x, y) * (u * u + u * v + v * v);
}

/// x^(5/2) - y^(5/2) via the quintic factorization.
inline double d52(double x, double y) {
  double u = std::sqrt(x), v = std::sqrt(y);
  double u2 = u * u, v2 = v * v;
  return dsqrt(x, y) * (u2 * u2 + u2 * u * v + u2 * v2 + u * v2 * v + v2 * v2);
}

/// Compensated accumulation (Neumaier); keeps the lambda=0 trivial limits at
/// the 1e-12 level even on long meshes.
struct NeumaierSum {
  double s = 0, c = 0;
  void add(double x) {
    double t = s + x;
    c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

inline double clamp_unit(double x) { return std::min(1.0, std::max(-1.0, x)); }

/// Moments of the substituted kernels over an s-interval [a, b], s = sqrt(tau),
/// with T the row time: the tau-domain integrals
///   int tau^(-1/2) phi (t-tau)^(+-1/2) dtau = 2 int phi(s) (T - s^2)^(+-1/2) ds
/// against phi piecewise linear in s. Returns {w_left, w_right} for the
/// interval endpoints.
struct SMoments {
  // plus kernel: integral of (T - s^2)^(1/2)
  static std::pair<double, double> plus_kernel(double a, double b, double T) {
    auto anti0 = [T](double s) {
      double d = std::max(T - s * s, 0.0);
      return 0.5 * (s * std::sqrt(d) + T * std::asin(clamp_unit(s / std::sqrt(T))));
    };
    auto anti1 = [T](double s) {  // antiderivative of s (T - s^2)^(1/2)
      double d = std::max(T - s * s, 0.0);
      return -d * std::sqrt(d) / 3.0;
    };
    double m0 = anti0(b) - anti0(a);
    double m1 = (anti1(b) - anti1(a)) - a * m0;  // moment of (s - a)
    double d = b - a;
    return {m0 - m1 / d, m1 / d};
  }

  // inverse kernel: integral of (T - s^2)^(-1/2)
  static std::pair<double, double> inverse_kernel(double a, double b, double T) {
    double rt = std::sqrt(T);
    double m0 = std::asin(clamp_unit(b / rt)) - std::asin(clamp_unit(a / rt));
    double da = std::sqrt(std::max(T - a * a, 0.0));
    double db = std::sqrt(std::max(T - b * b, 0.0));
    double m1 = (da - db) - a * m0;
    double d = b - a;
    return {m0 - m1 / d, m1 / d};
  }
};

}  // namespace detail

/**
 * Free flux term V0(t) = (2/sqrt(pi t)) int_0^inf eta e^(-eta^2) h(2 sqrt(t) eta) deta.
 * Constant data collapses to h0/sqrt(pi t) exactly.
 */
inline double initial_flux(const ProblemSpec1D& spec, double t) {
  if (!(t > 0)) throw std::domain_error("initial_flux: t must be positive");
  const double sqrt_pi_t = std::sqrt(std::numbers::pi_v<double> * t);
  if (spec.constant_data) return spec.h0 / sqrt_pi_t;
  const double rt = std::sqrt(t);
  double integral = integrate([&](double eta) { return eta * std::exp(-eta * eta) * spec.h(2 * rt * eta); },
                              0.0, 8.0, 1e-12);
  if (!std::isfinite(integral)) throw std::runtime_error("initial_flux: quadrature of the data failed");
  return 2.0 / sqrt_pi_t * integral;
}

/// Raw product-trapezoidal weights in the tau variable (piecewise-linear
/// interpolation of phi on the mesh nodes against the exact kernel moments).
inline SingularWeights build_weights(const GradedMesh& mesh, KernelKind kind) {
  SingularWeights sw;
  sw.kernel_kind = kind;
  sw.weights.resize(static_cast<std::size_t>(mesh.count));
  for (int j = 1; j <= mesh.count; ++j) {
    const double T = mesh.at(j);
    auto& row = sw.weights[static_cast<std::size_t>(j) - 1];
    row.assign(static_cast<std::size_t>(j) + 1, 0.0);
    for (int k = 0; k < j; ++k) {
      const double a = mesh.at(k), b = mesh.at(k + 1);
      const double xa = T - a, xb = T - b;  // xa > xb >= 0
      double m0, m1;
      if (kind == KernelKind::inverse_sqrt) {
        m0 = 2.0 * detail::dsqrt(xa, xb);
        m1 = 2.0 * xa * detail::dsqrt(xa, xb) - (2.0 / 3.0) * detail::d32(xa, xb);
      } else {
        m0 = (2.0 / 3.0) * detail::d32(xa, xb);
        m1 = (2.0 / 3.0) * xa * detail::d32(xa, xb) - (2.0 / 5.0) * detail::d52(xa, xb);
      }
      const double d = b - a;
      row[static_cast<std::size_t>(k)] += m0 - m1 / d;
      row[static_cast<std::size_t>(k) + 1] += m1 / d;
    }
  }
  return sw;
}

/**
 * Marching solver for the nonlinear flux equation
 *   V(t) = V0(t) - (1/sqrt(pi)) int_0^t F(W(tau)) (t - tau)^(-1/2) dtau,
 *   W(tau) = (1/tau) int_0^tau V.
 *
 * Discretization: the regularized unknowns psi = sqrt(tau) V and
 * chi_F = sqrt(tau) F(W) are interpolated piecewise-linearly in s = sqrt(tau)
 * (uniform when r = 2) against the exact substituted kernel moments; the
 * cumulative average uses the plain trapezoid in s, which is exact for the
 * leading c/sqrt(tau) behavior. Values at s = 0: node 1 uses the constant
 * head (giving W(t_1) = 2 V(t_1)); once two nodes exist the s = 0 values are
 * frozen by linear extrapolation 2 psi_1 - psi_2.
 *
 * Each step solves the scalar equation for V(t_j) by a damped fixed point
 * (damping 0.5, strongly contractive since the new-value kernel weight is
 * O(sqrt(delta s))), falling back to a secant iteration if the cap nears;
 * StepFailure carries the node index if neither converges.
 */
inline FluxSolution solve_flux(const ProblemSpec1D& spec, const GradedMesh& mesh, double tol = 1e-10) {
  if (!(tol > 0)) throw std::invalid_argument("solve_flux: tolerance must be positive");
  if (!spec.source) throw std::invalid_argument("solve_flux: source functional required");
  const int N = mesh.count;
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi_v<double>);

  FluxSolution sol;
  sol.mesh = mesh;
  sol.v.resize(static_cast<std::size_t>(N));
  sol.w.resize(static_cast<std::size_t>(N));
  sol.sqrt_t_v.resize(static_cast<std::size_t>(N));
  sol.sqrt_t_w.resize(static_cast<std::size_t>(N));

  std::vector<double> s(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= N; ++j) s[static_cast<std::size_t>(j)] = std::sqrt(mesh.at(j));

  std::vector<double> psi(static_cast<std::size_t>(N) + 1, 0.0);   // sqrt(t) V at nodes
  std::vector<double> chiF(static_cast<std::size_t>(N) + 1, 0.0);  // sqrt(t) F(W) at nodes
  bool head_frozen = false;
  double psi0 = 0, chiF0 = 0;

  auto eval_F = [&](double wv) {
    sol.visited_w_min = std::min(sol.visited_w_min, wv);
    sol.visited_w_max = std::max(sol.visited_w_max, wv);
    return spec.source(wv);
  };

  for (int j = 1; j <= N; ++j) {
    const double Tj = mesh.at(j);
    const double sj = s[static_cast<std::size_t>(j)];
    const double v0j = initial_flux(spec, Tj);

    // Iteration-independent parts: cumulative-average base over [0, s_{j-1}]
    // and the kernel convolution over all but the last s-interval.
    detail::NeumaierSum a_base;  // int_0^{s_{j-1}} psi ds
    if (j > 1) {
      const double p0 = head_frozen ? psi0 : psi[1];
      a_base.add(0.5 * (p0 + psi[1]) * s[1]);
      for (int k = 1; k < j - 1; ++k)
        a_base.add(0.5 * (psi[static_cast<std::size_t>(k)] + psi[static_cast<std::size_t>(k) + 1]) *
                   (s[static_cast<std::size_t>(k) + 1] - s[static_cast<std::size_t>(k)]));
    }
    detail::NeumaierSum k_base;  // kernel sum, all intervals except the last
    double wr_last = 0, wl_last = 0;
    {
      const double c0 = head_frozen ? chiF0 : chiF[1];
      for (int k = 0; k < j; ++k) {
        const double a = s[static_cast<std::size_t>(k)], b = s[static_cast<std::size_t>(k) + 1];
        auto [wl, wr] = detail::SMoments::inverse_kernel(a, b, Tj);
        if (k == j - 1) {
          wl_last = wl;
          wr_last = wr;
        } else {
          const double cl = (k == 0) ? c0 : chiF[static_cast<std::size_t>(k)];
          k_base.add(wl * cl + wr * chiF[static_cast<std::size_t>(k) + 1]);
        }
      }
    }
    const double ds_last = sj - s[static_cast<std::size_t>(j) - 1];
    const double psi_prev = psi[static_cast<std::size_t>(j) - 1];
    const double chiF_prev_known = chiF[static_cast<std::size_t>(j) - 1];

    double wj = 0;
    auto propose = [&](double vj) {
      const double psi_j = sj * vj;
      double integral_psi;
      if (j == 1)
        integral_psi = psi_j * s[1];  // constant head: psi(0) = psi_1
      else
        integral_psi = a_base.value() + 0.5 * (psi_prev + psi_j) * ds_last;
      wj = 2.0 * integral_psi / Tj;
      const double chiF_j = sj * eval_F(wj);
      const double chiF_left = (j == 1) ? chiF_j : chiF_prev_known;
      const double kernel_sum = k_base.value() + wl_last * chiF_left + wr_last * chiF_j;
      return v0j - inv_sqrt_pi * 2.0 * kernel_sum;
    };

    double vj = (j == 1) ? v0j : sol.v[static_cast<std::size_t>(j) - 2] * s[static_cast<std::size_t>(j) - 1] / sj;
    bool converged = false;
    constexpr int kCap = 100;
    int it = 0;
    for (; it < kCap / 2; ++it) {
      const double vnew = propose(vj);
      if (std::abs(vnew - vj) <= tol * std::max(1.0, std::abs(vj))) {
        vj = vnew;
        converged = true;
        break;
      }
      vj += 0.5 * (vnew - vj);
    }
    if (!converged) {
      // secant on g(v) = propose(v) - v
      double va = vj, ga = propose(va) - va;
      double vb = vj + (std::abs(vj) + 1.0) * 1e-3, gb = propose(vb) - vb;
      for (; it < kCap; ++it) {
        if (std::abs(gb) <= tol * std::max(1.0, std::abs(vb))) {
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
    (void)propose(vj);  // sync wj and the visited range with the accepted value

    psi[static_cast<std::size_t>(j)] = sj * vj;
    chiF[static_cast<std::size_t>(j)] = sj * eval_F(wj);
    sol.v[static_cast<std::size_t>(j) - 1] = vj;
    sol.w[static_cast<std::size_t>(j) - 1] = wj;
    sol.sqrt_t_v[static_cast<std::size_t>(j) - 1] = sj * vj;
    sol.sqrt_t_w[static_cast<std::size_t>(j) - 1] = sj * wj;

    if (j == 2 && !head_frozen) {
      psi0 = 2 * psi[1] - psi[2];
      chiF0 = 2 * chiF[1] - chiF[2];
      head_frozen = true;
    }
  }
  return sol;
}

/**
 * Direct solver for the linear averaged equation
 *   W(t) = 2 h0 / sqrt(pi t) - (2 lambda / (t sqrt(pi))) int_0^t W(tau) sqrt(t - tau) dtau.
 *
 * The regularized unknown chi = sqrt(tau) W is piecewise linear in
 * s = sqrt(tau) with the exact limit chi(0) = 2 h0 / sqrt(pi) pinned; the
 * plus-sqrt kernel vanishes at tau = t, so each step is one linear solve.
 * V is then populated through the boundary-flux integral formula
 *   V(t) = h0/sqrt(pi t) - (lambda/sqrt(pi)) int_0^t W(tau) (t-tau)^(-1/2) dtau.
 */
inline FluxSolution solve_average_linear(double h0, double lambda, const GradedMesh& mesh) {
  const int N = mesh.count;
  const double sqrt_pi = std::sqrt(std::numbers::pi_v<double>);

  FluxSolution sol;
  sol.mesh = mesh;
  sol.v.resize(static_cast<std::size_t>(N));
  sol.w.resize(static_cast<std::size_t>(N));
  sol.sqrt_t_v.resize(static_cast<std::size_t>(N));
  sol.sqrt_t_w.resize(static_cast<std::size_t>(N));

  std::vector<double> s(static_cast<std::size_t>(N) + 1);
  for (int j = 0; j <= N; ++j) s[static_cast<std::size_t>(j)] = std::sqrt(mesh.at(j));

  std::vector<double> chi(static_cast<std::size_t>(N) + 1, 0.0);
  chi[0] = 2 * h0 / sqrt_pi;  // exact limit of sqrt(t) W(t)

  for (int j = 1; j <= N; ++j) {
    const double Tj = mesh.at(j);
    const double sj = s[static_cast<std::size_t>(j)];
    detail::NeumaierSum known;
    double c_jj = 0;
    for (int k = 0; k < j; ++k) {
      const double a = s[static_cast<std::size_t>(k)], b = s[static_cast<std::size_t>(k) + 1];
      auto [wl, wr] = detail::SMoments::plus_kernel(a, b, Tj);
      known.add(wl * chi[static_cast<std::size_t>(k)]);
      if (k == j - 1)
        c_jj = wr;
      else
        known.add(wr * chi[static_cast<std::size_t>(k) + 1]);
    }
    const double factor = 2 * lambda / (sqrt_pi * Tj) * 2.0;  // 2/(t sqrt(pi)) lambda, times the s-substitution 2
    const double lhs = 1.0 / sj + factor * c_jj;
    const double rhs = 2 * h0 / (sqrt_pi * sj) - factor * known.value();
    chi[static_cast<std::size_t>(j)] = rhs / lhs;

    sol.w[static_cast<std::size_t>(j) - 1] = chi[static_cast<std::size_t>(j)] / sj;
    sol.sqrt_t_w[static_cast<std::size_t>(j) - 1] = chi[static_cast<std::size_t>(j)];
  }

  for (int j = 1; j <= N; ++j) {
    const double Tj = mesh.at(j);
    const double sj = s[static_cast<std::size_t>(j)];
    detail::NeumaierSum conv;
    for (int k = 0; k < j; ++k) {
      const double a = s[static_cast<std::size_t>(k)], b = s[static_cast<std::size_t>(k) + 1];
      auto [wl, wr] = detail::SMoments::inverse_kernel(a, b, Tj);
      conv.add(wl * chi[static_cast<std::size_t>(k)] + wr * chi[static_cast<std::size_t>(k) + 1]);
    }
    const double vj = h0 / (sqrt_pi * sj) - lambda / sqrt_pi * 2.0 * conv.value();
    sol.v[static_cast<std::size_t>(j) - 1] = vj;
    sol.sqrt_t_v[static_cast<std::size_t>(j) - 1] = sj * vj;
  }

  sol.visited_w_min = *std::min_element(sol.w.begin(), sol.w.end());
  sol.visited_w_max = *std::max_element(sol.w.begin(), sol.w.end());
  return sol;
}

/**
 * Verification of the source-kernel majorant m(t, tau) = bound / sqrt(pi (t - tau))
 * that dominates the memory term whenever |F| <= bound:
 * int_0^t m(t, tau) dtau = 2 bound sqrt(t) / sqrt(pi), so the sup over t <= k
 * is (2 sqrt(k) / sqrt(pi)) bound and the small-t limit vanishes like sqrt(t).
 * The integral is measured by quadrature (sin^2 substitution), not by the
 * closed form, so this is an actual check.
 */
struct MajorantReport {
  double bound = 0;
  double k = 0;
  double sup_integral = 0;
  double closed_form_sup = 0;
  double max_rel_deviation = 0;        // against 2 bound sqrt(t)/sqrt(pi) over the grid
  double small_t_slope = 0;            // log-log slope, 0.5 expected; NaN when bound = 0
  std::vector<std::pair<double, double>> samples;  // (t, integral)
};

inline MajorantReport kernel_majorant_check(double bound, double k) {
  if (!(k > 0)) throw std::invalid_argument("kernel_majorant_check: k must be positive");
  if (bound < 0) throw std::invalid_argument("kernel_majorant_check: bound must be nonnegative");
  const double sqrt_pi = std::sqrt(std::numbers::pi_v<double>);
  auto integral_at = [&](double t) {
    // tau = t sin^2(theta): integrand becomes (2 bound sqrt(t)/sqrt(pi)) sin(theta)
    return integrate([&](double theta) { return 2.0 * bound * std::sqrt(t) / sqrt_pi * std::sin(theta); },
                     0.0, 0.5 * std::numbers::pi_v<double>, 1e-13);
  };

  MajorantReport rep;
  rep.bound = bound;
  rep.k = k;
  rep.closed_form_sup = 2.0 * std::sqrt(k) / sqrt_pi * bound;
  const int grid = 64;
  for (int i = 1; i <= grid; ++i) {
    const double t = k * std::pow(static_cast<double>(i) / grid, 2.0);
    const double val = integral_at(t);
    rep.samples.emplace_back(t, val);
    rep.sup_integral = std::max(rep.sup_integral, val);
    const double exact = 2.0 * bound * std::sqrt(t) / sqrt_pi;
    if (exact > 0) rep.max_rel_deviation = std::max(rep.max_rel_deviation, std::abs(val - exact) / exact);
  }
  if (bound > 0) {
    // least-squares slope of log I vs log t on t = k 10^-m
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int pts = 6;
    for (int m = 1; m <= pts; ++m) {
      const double t = k * std::pow(10.0, -m);
      const double x = std::log(t), y = std::log(integral_at(t));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.small_t_slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
  } else {
    rep.small_t_slope = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace nclheat
