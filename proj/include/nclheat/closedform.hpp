#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nclheat/specfun.hpp"

namespace nclheat {

/// One exact series coefficient: value = q, or q/sqrt(pi) when flagged.
/// Both closed-form solution families split cleanly into a sqrt(pi)-free and
/// a sqrt(pi)-scaled part, so this pair keeps every comparison exact.
struct SeriesCoefficient {
  Rational q;
  bool over_sqrt_pi = false;

  double value() const {
    double v = detail::to_double(q);
    return over_sqrt_pi ? v / std::sqrt(std::numbers::pi_v<double>) : v;
  }

  bool operator==(const SeriesCoefficient&) const = default;
};

/**
 * Series in half powers of t: sum of coeff * t^(key/2) over the term map.
 * Exponents are bounded below by -1/2 (the strongest singularity in the
 * solution family).
 *
 * truncation_order >= 0 marks the series as the order-n truncation of an
 * infinite family, which arms the tail-estimate refusal in evaluate_series.
 * truncation_order == -1 means the series is exact (nothing was omitted).
 */
struct HalfPowerSeries {
  std::map<int, SeriesCoefficient> terms;  // key = 2 * exponent
  int truncation_order = -1;

  bool operator==(const HalfPowerSeries& o) const { return terms == o.terms; }
};

inline void add_term(HalfPowerSeries& s, int key2, const SeriesCoefficient& c) {
  if (key2 < -1) throw std::domain_error("HalfPowerSeries: exponent below -1/2");
  if (c.q == 0) return;
  auto [it, inserted] = s.terms.emplace(key2, c);
  if (!inserted) {
    if (it->second.over_sqrt_pi != c.over_sqrt_pi)
      throw std::logic_error("HalfPowerSeries: mixed pi scaling at one exponent");
    it->second.q += c.q;
    if (it->second.q == 0) s.terms.erase(it);
  }
}

inline HalfPowerSeries add(const HalfPowerSeries& a, const HalfPowerSeries& b) {
  HalfPowerSeries r = a;
  r.truncation_order = std::max(a.truncation_order, b.truncation_order);
  for (const auto& [k, c] : b.terms) add_term(r, k, c);
  return r;
}

inline HalfPowerSeries scale(const HalfPowerSeries& a, const Rational& f) {
  HalfPowerSeries r;
  r.truncation_order = a.truncation_order;
  if (f == 0) return r;
  for (const auto& [k, c] : a.terms) r.terms.emplace(k, SeriesCoefficient{c.q * f, c.over_sqrt_pi});
  return r;
}

/// Multiply by t^(k2/2); exact, shifts every exponent.
inline HalfPowerSeries shift_half_power(const HalfPowerSeries& a, int k2) {
  HalfPowerSeries r;
  r.truncation_order = a.truncation_order;
  for (const auto& [k, c] : a.terms) {
    if (k + k2 < -1) throw std::domain_error("shift_half_power: exponent below -1/2");
    r.terms.emplace(k + k2, c);
  }
  return r;
}

namespace detail {
inline Rational rational_pow(const Rational& x, int n) {
  Rational r = 1;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}
}  // namespace detail

/**
 * Exact series of the time-averaged boundary flux W for constant data h0 and
 * linear source F(w) = lambda w:
 *
 *   W(t) = (2 h0 / sqrt(pi t)) (1 + sum_{n>=1} (4 lambda^2 t)^n / [(2n+1) n! ((2n-1)!!)^2])
 *          - 2 h0 lambda      (1 + sum_{n>=1} (2 lambda^2 t)^n / [(n+1) (n!)^2 (2n+1)!!])
 *
 * Both families have infinite radius of convergence.
 */
inline HalfPowerSeries series_W(double h0, double lambda, int order) {
  if (order < 0) throw std::invalid_argument("series_W: order must be >= 0");
  const Rational h = rational_from_double(h0);
  const Rational lam = rational_from_double(lambda);
  const Rational lam2 = lam * lam;
  HalfPowerSeries s;
  s.truncation_order = (lambda == 0.0) ? -1 : order;
  for (int n = 0; n <= order; ++n) {
    BigInt dfac = double_factorial(2 * n - 1);
    Rational q1 = 2 * h * detail::rational_pow(4 * lam2, n);
    q1 /= Rational((2 * n + 1) * factorial(n) * dfac * dfac);
    add_term(s, 2 * n - 1, SeriesCoefficient{q1, true});

    Rational q2 = -2 * h * lam * detail::rational_pow(2 * lam2, n);
    q2 /= Rational((n + 1) * factorial(n) * factorial(n) * double_factorial(2 * n + 1));
    add_term(s, 2 * n, SeriesCoefficient{q2, false});
  }
  return s;
}

namespace detail {

/// Apply the averaged plus-sqrt kernel operator
///   (factor / (t sqrt(pi))) int_0^t phi(tau) sqrt(t - tau) dtau
/// term by term through the exact kernel moments. The pi bookkeeping always
/// lands back in {q, q/sqrt(pi)}: a flagged input meets a pi-carrying moment
/// and vice versa.
inline HalfPowerSeries apply_averaged_sqrt_kernel(const HalfPowerSeries& phi, const Rational& factor) {
  HalfPowerSeries r;
  for (const auto& [k, c] : phi.terms) {
    ExactMoment m = moment_sqrt_exact(HalfInt{k});
    int pi_half_units = (c.over_sqrt_pi ? -1 : 0) + (m.times_pi ? 2 : 0) - 1;
    if (pi_half_units != 0 && pi_half_units != -1)
      throw std::logic_error("apply_averaged_sqrt_kernel: pi bookkeeping left the representation");
    add_term(r, m.exponent.twice - 2, SeriesCoefficient{factor * c.q * m.q, pi_half_units == -1});
  }
  return r;
}

}  // namespace detail

/**
 * Decomposition terms of the averaged-flux fixed point: the seed is
 * W_0 = 2 h0 / sqrt(pi t) and each successor is
 *   W_n(t) = -(2 lambda / (t sqrt(pi))) int_0^t W_{n-1}(tau) sqrt(t - tau) dtau.
 * Every term is a single exact monomial.
 */
inline std::vector<HalfPowerSeries> adomian_terms(double h0, double lambda, int count) {
  if (count < 1) throw std::invalid_argument("adomian_terms: count must be >= 1");
  const Rational h = rational_from_double(h0);
  const Rational lam = rational_from_double(lambda);
  std::vector<HalfPowerSeries> terms;
  terms.reserve(static_cast<std::size_t>(count));
  HalfPowerSeries w0;
  add_term(w0, -1, SeriesCoefficient{2 * h, true});
  terms.push_back(w0);
  for (int n = 1; n < count; ++n)
    terms.push_back(detail::apply_averaged_sqrt_kernel(terms.back(), -2 * lam));
  return terms;
}

/// Closed Laplace-domain form of the averaged flux.
struct LaplaceClosedForm {
  double h0 = 0;
  double lambda = 0;
};

/// Q(s) = (h0/lambda)(1 - e^(-2 lambda / sqrt(s))); the lambda -> 0 limit is 2 h0 / sqrt(s).
inline double laplace_Q(const LaplaceClosedForm& form, double s) {
  if (!(s > 0)) throw std::domain_error("laplace_Q: s must be positive");
  if (form.lambda == 0.0) return 2 * form.h0 / std::sqrt(s);
  return form.h0 / form.lambda * -std::expm1(-2 * form.lambda / std::sqrt(s));
}

/// Residual of the first-order ODE Q'(s) - (lambda/s^(3/2)) Q(s) = -h0/s^(3/2),
/// with Q' taken analytically: Q'(s) = -h0 e^(-2 lambda/sqrt(s)) / s^(3/2).
inline double ode_residual(const LaplaceClosedForm& form, double s) {
  if (!(s > 0)) throw std::domain_error("ode_residual: s must be positive");
  const double s32 = std::pow(s, 1.5);
  const double qprime = -form.h0 * std::exp(-2 * form.lambda / std::sqrt(s)) / s32;
  return qprime - form.lambda / s32 * laplace_Q(form, s) + form.h0 / s32;
}

/**
 * Exact series of the boundary heat flux V(t) = u_x(0, t) for the linear
 * case, obtained by pushing every W monomial through the inverse-sqrt kernel:
 *
 *   V(t) = h0 / sqrt(pi t) - (lambda / sqrt(pi)) int_0^t W(tau) (t - tau)^(-1/2) dtau.
 *
 * The W term at t^(-1/2) maps through the Beta constant pi (not the sometimes
 * quoted pi/8, which would give a constant term of -h0 lambda / 4; the
 * quadrature oracle rules that value out and the correct constant is
 * -2 h0 lambda).
 *
 * The result is truncated to the same exponent range as the order-n averaged
 * series (t^(-1/2) .. t^n), so order 0 gives exactly the two leading terms.
 */
inline HalfPowerSeries flux_series(double h0, double lambda, int order) {
  if (order < 0) throw std::invalid_argument("flux_series: order must be >= 0");
  const Rational h = rational_from_double(h0);
  const Rational lam = rational_from_double(lambda);
  HalfPowerSeries v;
  v.truncation_order = (lambda == 0.0) ? -1 : order;
  add_term(v, -1, SeriesCoefficient{h, true});
  if (lambda == 0.0) return v;
  HalfPowerSeries w = series_W(h0, lambda, order);
  for (const auto& [k, c] : w.terms) {
    if (k == -1) {
      // Beta constant: -(lam/sqrt(pi)) * (q/sqrt(pi)) * pi = -lam q, a plain t^0 term.
      add_term(v, 0, SeriesCoefficient{-lam * c.q, false});
      continue;
    }
    if (k == 2 * order) continue;  // its image t^(order + 1/2) is beyond the truncation
    ExactMoment m = moment_sqrt_inv_exact(HalfInt{k});
    int pi_half_units = (c.over_sqrt_pi ? -1 : 0) + (m.times_pi ? 2 : 0) - 1;
    if (pi_half_units != 0 && pi_half_units != -1)
      throw std::logic_error("flux_series: pi bookkeeping left the representation");
    add_term(v, m.exponent.twice, SeriesCoefficient{-lam * c.q * m.q, pi_half_units == -1});
  }
  return v;
}

/// Thrown when a truncated series cannot certify 1e-8 relative accuracy at
/// the requested t; needed_order estimates the truncation order that would.
struct TruncationRefusal : std::runtime_error {
  int needed_order;
  double estimate;
  TruncationRefusal(int needed, double est)
      : std::runtime_error("evaluate_series: truncation estimate " + std::to_string(est) +
                           " too large; raise order to about " + std::to_string(needed)),
        needed_order(needed),
        estimate(est) {}
};

struct EvaluationResult {
  double value = 0;
  double truncation_estimate = 0;  // magnitude of the last included term
};

/**
 * Ascending-exponent summation. For truncated series the magnitude of the
 * last included term serves as the tail estimate; evaluation refuses (with a
 * needed-order suggestion extrapolated from the observed same-family term
 * ratio) when that estimate exceeds 1e-8 of the sum.
 */
inline EvaluationResult evaluate_series(const HalfPowerSeries& s, double t) {
  if (!(t > 0)) throw std::domain_error("evaluate_series: t must be positive");
  EvaluationResult res;
  for (const auto& [k, c] : s.terms) res.value += c.value() * detail::pow_half(t, HalfInt{k});
  if (s.truncation_order >= 0 && !s.terms.empty()) {
    const auto last = std::prev(s.terms.end());
    const double last_mag = std::abs(last->second.value() * detail::pow_half(t, HalfInt{last->first}));
    res.truncation_estimate = last_mag;
    if (last_mag > 1e-8 * std::abs(res.value)) {
      // same-family neighbor sits two half-powers below
      double ratio = 0.5;
      if (auto prev = s.terms.find(last->first - 2); prev != s.terms.end()) {
        double prev_mag = std::abs(prev->second.value() * detail::pow_half(t, HalfInt{prev->first}));
        if (prev_mag > 0 && last_mag < prev_mag) ratio = last_mag / prev_mag;
      }
      // factorial-type decay: ratio shrinks like (n0/n)^2 past the truncation order
      const double n0 = std::max(s.truncation_order, 1);
      int needed = s.truncation_order;
      double est = last_mag;
      const double target = 1e-8 * std::abs(res.value);
      while (est > target && needed < 10000) {
        ++needed;
        double shrink = ratio * (n0 / needed) * (n0 / needed);
        est *= std::min(shrink, 0.999);
      }
      throw TruncationRefusal(needed, last_mag);
    }
  }
  return res;
}

/// Plain-text serialization, one term per line:
/// "exponent_numerator/2, rational_coefficient, sqrt_pi_flag"
inline std::string serialize(const HalfPowerSeries& s) {
  std::ostringstream out;
  for (const auto& [k, c] : s.terms)
    out << k << "/2, " << c.q << ", " << (c.over_sqrt_pi ? 1 : 0) << "\n";
  return out.str();
}

/**
 * Term-wise Laplace transform of a half-power series, evaluated at s:
 *   L(t^(n-1/2)) = (2n-1)!! sqrt(pi) / (2^n s^(n+1/2)),  L(t^n) = n! / s^(n+1).
 */
inline double laplace_of_series(const HalfPowerSeries& series, double s) {
  if (!(s > 0)) throw std::domain_error("laplace_of_series: s must be positive");
  double sum = 0;
  const double sqrt_pi = std::sqrt(std::numbers::pi_v<double>);
  for (const auto& [k, c] : series.terms) {
    double coeff = detail::to_double(c.q) * (c.over_sqrt_pi ? 1.0 / sqrt_pi : 1.0);
    if (k % 2 == 0) {
      int n = k / 2;
      sum += coeff * detail::to_double(Rational(factorial(n))) / std::pow(s, n + 1);
    } else {
      int n = (k + 1) / 2;
      double fac = detail::to_double(Rational(double_factorial(2 * n - 1), BigInt(1) << n));
      sum += coeff * fac * sqrt_pi / std::pow(s, n + 0.5);
    }
  }
  return sum;
}

/**
 * Exact rational coefficients of s^(-k/2), k >= 1, in the term-wise Laplace
 * transform of a solution-family series (flag parity assumed: flagged terms
 * carry half-integer exponents). Used to compare against the direct Taylor
 * expansion of the closed form.
 */
inline std::map<int, Rational> laplace_symbol_of_series(const HalfPowerSeries& series) {
  std::map<int, Rational> out;
  for (const auto& [k, c] : series.terms) {
    if (k % 2 == 0) {
      if (c.over_sqrt_pi) throw std::logic_error("laplace_symbol_of_series: flagged integer exponent");
      int n = k / 2;
      out[2 * (n + 1)] += c.q * Rational(factorial(n));
    } else {
      if (!c.over_sqrt_pi) throw std::logic_error("laplace_symbol_of_series: plain half-integer exponent");
      int n = (k + 1) / 2;
      out[2 * n + 1] += c.q * Rational(double_factorial(2 * n - 1), BigInt(1) << n);
    }
  }
  return out;
}

/// Exact Taylor coefficients of Q(s) = (h0/lambda)(1 - e^(-2 lambda/sqrt(s)))
/// in powers s^(-k/2): coefficient of s^(-k/2) is h0 (-1)^(k+1) 2^k lambda^(k-1) / k!.
inline std::map<int, Rational> laplace_taylor_coefficients(double h0, double lambda, int order2) {
  const Rational h = rational_from_double(h0);
  const Rational lam = rational_from_double(lambda);
  std::map<int, Rational> out;
  for (int k = 1; k <= order2; ++k) {
    Rational c = h * detail::rational_pow(Rational(2), k) * detail::rational_pow(lam, k - 1);
    c /= Rational(factorial(k));
    if (k % 2 == 0) c = -c;
    if (c != 0) out[k] = c;
  }
  return out;
}

}  // namespace nclheat
