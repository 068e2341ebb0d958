#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nclheat/specfun.hpp"

namespace nclheat {

/// Adaptive Gauss-Kronrod on a finite interval.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-13) {
  double error = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      std::forward<F>(f), a, b, 12, tol, &error);
  return v;
}

enum class KernelKind { inverse_sqrt, plus_sqrt };

/**
 * Quadrature oracle for the singular moments int_0^t tau^p (t-tau)^(+-1/2) dtau.
 * The substitution tau = t sin^2(theta) removes both endpoint singularities:
 *
 *   inverse_sqrt: t^(p+1/2) * int_0^{pi/2} 2 sin^(2p+1) theta dtheta
 *   plus_sqrt:    t^(p+3/2) * int_0^{pi/2} 2 sin^(2p+1) theta cos^2 theta dtheta
 *
 * Smooth for p >= -1/2, so the adaptive rule converges fast. This is the
 * independent reference the closed-form moments are validated against.
 */
inline double oracle_moment(HalfInt p, double t, KernelKind kind) {
  if (!(t > 0)) throw std::domain_error("oracle_moment: t must be positive");
  if (p.twice < -1) throw std::domain_error("oracle_moment: exponent below -1/2");
  const double pd = p.value();
  const double half_pi = 0.5 * std::numbers::pi_v<double>;
  auto integrand = [&](double theta) {
    double s = std::sin(theta);
    double base = 2.0 * std::pow(s, 2.0 * pd + 1.0);
    if (kind == KernelKind::plus_sqrt) {
      double c = std::cos(theta);
      base *= c * c;
    }
    return base;
  };
  double shape = integrate(integrand, 0.0, half_pi, 1e-13);
  double power = (kind == KernelKind::inverse_sqrt) ? pd + 0.5 : pd + 1.5;
  return shape * std::pow(t, power);
}

/// Oracle for the Beta constant int_0^t dtau/sqrt(tau(t-tau)); the same
/// substitution gives int_0^{pi/2} 2 dtheta = pi for every t.
inline double oracle_inverse_sqrt_beta(double t) {
  if (!(t > 0)) throw std::domain_error("oracle_inverse_sqrt_beta: t must be positive");
  auto integrand = [](double) { return 2.0; };
  return integrate(integrand, 0.0, 0.5 * std::numbers::pi_v<double>, 1e-13);
}

}  // namespace nclheat
