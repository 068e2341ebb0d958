#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nclheat {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact conversion; every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::domain_error("rational_from_double: non-finite input");
  return Rational(x);
}

inline BigInt factorial(int n) {
  if (n < 0) throw std::domain_error("factorial: negative argument");
  BigInt r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

/// n!! for odd n >= -1, with (-1)!! = 1 by the empty-product convention.
inline BigInt double_factorial(int n) {
  if (n < -1) throw std::domain_error("double_factorial: argument below -1");
  BigInt r = 1;
  for (int k = n; k >= 2; k -= 2) r *= k;
  return r;
}

/**
 * Table of odd double factorials 1!!, 3!!, ..., up to a configured odd bound.
 * 41!! already exceeds 2^64, hence the exact integers.
 */
class DoubleFactorialTable {
 public:
  explicit DoubleFactorialTable(int max_odd = 41) : max_odd_(max_odd) {
    if (max_odd < 1 || max_odd % 2 == 0)
      throw std::invalid_argument("DoubleFactorialTable: bound must be a positive odd integer");
    BigInt acc = 1;
    for (int n = 1; n <= max_odd; n += 2) {
      acc *= n;
      values_.push_back(acc);
    }
  }

  // n odd, 1 <= n <= max_odd()
  const BigInt& at(int n) const {
    if (n < 1 || n > max_odd_ || n % 2 == 0)
      throw std::out_of_range("DoubleFactorialTable::at: index " + std::to_string(n));
    return values_[static_cast<std::size_t>((n - 1) / 2)];
  }

  int max_odd() const { return max_odd_; }
  const std::vector<BigInt>& values() const { return values_; }

 private:
  int max_odd_;
  std::vector<BigInt> values_;
};

/// Exact half-integer exponent: value = twice/2. Never a float, so the
/// integer/half-integer branch in the moment formulas is unambiguous.
struct HalfInt {
  int twice = 0;

  static HalfInt integer(int n) { return HalfInt{2 * n}; }
  static HalfInt halves(int numerator) { return HalfInt{numerator}; }

  bool is_integer() const { return twice % 2 == 0; }
  int floor_int() const { return twice >= 0 ? twice / 2 : (twice - 1) / 2; }
  double value() const { return 0.5 * twice; }

  friend HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt{a.twice + b.twice}; }
  friend HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt{a.twice - b.twice}; }
  friend auto operator<=>(HalfInt, HalfInt) = default;
};

inline double erf(double z) {
  if (!std::isfinite(z)) throw std::domain_error("erf: non-finite input");
  return std::erf(z);
}

namespace detail {

inline double to_double(const Rational& q) { return q.template convert_to<double>(); }

inline double pow_half(double t, HalfInt p) {
  // t^(n/2) via sqrt to keep half powers exact-ish for dyadic t
  if (p.twice % 2 == 0) return std::pow(t, p.twice / 2);
  return std::pow(t, 0.5 * p.twice);
}

}  // namespace detail

/**
 * A kernel moment in exact form: value(t) = q * pi^{pi_power} * t^{exponent},
 * pi_power in {0, 1}. The two singular-kernel families below stay inside this
 * representation for every admissible exponent.
 */
struct ExactMoment {
  Rational q;
  bool times_pi = false;
  HalfInt exponent;

  double evaluate(double t) const {
    double v = detail::to_double(q) * detail::pow_half(t, exponent);
    return times_pi ? v * std::numbers::pi_v<double> : v;
  }
};

/**
 * Exact form of int_0^t tau^p (t - tau)^(-1/2) dtau.
 *
 * Integer p = n:        (2n)! / ((2n-1)!!)^2 * t^(n+1/2) / (n+1/2)
 * Half-integer p = n-1/2: pi ((2n-1)!!)^2 / (2n)! * t^n
 *
 * p = -1/2 is rejected: that moment is the t-independent constant pi and is
 * exposed separately (see inverse_sqrt_beta_constant).
 */
inline ExactMoment moment_sqrt_inv_exact(HalfInt p) {
  if (p.twice < 0)
    throw std::domain_error("moment_sqrt_inv: exponent below 0 (the p=-1/2 case is the separate Beta constant)");
  if (p.is_integer()) {
    int n = p.twice / 2;
    Rational q(factorial(2 * n) * 2, double_factorial(2 * n - 1) * double_factorial(2 * n - 1) * (2 * n + 1));
    return ExactMoment{q, false, HalfInt{2 * n + 1}};
  }
  int n = (p.twice + 1) / 2;  // p = n - 1/2
  Rational q(double_factorial(2 * n - 1) * double_factorial(2 * n - 1), factorial(2 * n));
  return ExactMoment{q, true, HalfInt::integer(n)};
}

/**
 * Exact form of int_0^t tau^p (t - tau)^(+1/2) dtau.
 *
 * Integer p = n:          2^(n+1) n! / (2n+3)!! * t^(n+3/2)
 * Half-integer p = n-1/2: pi (2n-1)!! / (2^(n+1) (n+1)!) * t^(n+1), n >= 0
 */
inline ExactMoment moment_sqrt_exact(HalfInt p) {
  if (p.twice < -1) throw std::domain_error("moment_sqrt: exponent below -1/2");
  if (p.is_integer()) {
    int n = p.twice / 2;
    Rational q(BigInt(1) << (n + 1), double_factorial(2 * n + 3));
    q *= factorial(n);
    return ExactMoment{q, false, HalfInt{2 * n + 3}};
  }
  int n = (p.twice + 1) / 2;
  Rational q(double_factorial(2 * n - 1), factorial(n + 1) * (BigInt(1) << (n + 1)));
  return ExactMoment{q, true, HalfInt::integer(n + 1)};
}

inline double moment_sqrt_inv(HalfInt p, double t) {
  if (!(t > 0)) throw std::domain_error("moment_sqrt_inv: t must be positive");
  return moment_sqrt_inv_exact(p).evaluate(t);
}

inline double moment_sqrt(HalfInt p, double t) {
  if (!(t > 0)) throw std::domain_error("moment_sqrt: t must be positive");
  return moment_sqrt_exact(p).evaluate(t);
}

/// int_0^t dtau / sqrt(tau (t - tau)) = B(1/2, 1/2) = pi, independent of t.
/// The value pi/8 sometimes quoted for this integral is wrong; see
/// beta_constant_check in checks.hpp for the quadrature evidence.
inline double inverse_sqrt_beta_constant() { return std::numbers::pi_v<double>; }

}  // namespace nclheat
