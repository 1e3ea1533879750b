#ifndef FROZEN_RDE_SCALEFIX_HPP
#define FROZEN_RDE_SCALEFIX_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "bivariate.hpp"
#include "ext_time.hpp"

namespace frozen_rde {

enum class FcMethod { runge_kutta, implicit_bisection };

/** f_c sampled at r_i = i/(n-1). */
struct ScaleFixFunction {
  double c = 0.0;
  std::vector<double> samples;
  FcMethod method = FcMethod::runge_kutta;

  double grid_point(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(samples.size() - 1); }

  /** Linear interpolation. */
  double at(double r) const {
    const double x = std::clamp(r, 0.0, 1.0) * static_cast<double>(samples.size() - 1);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x), samples.size() - 2);
    const double a = x - static_cast<double>(i);
    return (1 - a) * samples[i] + a * samples[i + 1];
  }
};

/** RK4 for f' = c r / (f - r/2), f(0) = 1/2, with `steps` uniform steps over [0,1]. */
inline ScaleFixFunction solve_fc_rk(double c, std::size_t n = 1001, std::size_t steps = 100000) {
  if (c < 0.0) throw DomainError("solve_fc_rk: c must be nonnegative");
  if (n < 2) throw DomainError("solve_fc_rk: need at least 2 grid points");
  // c = 0: f is constant 1/2 and the rhs is 0/0 at r = 1
  if (c == 0.0) return ScaleFixFunction{c, std::vector<double>(n, 0.5), FcMethod::runge_kutta};
  const std::size_t per_cell = std::max<std::size_t>(1, (steps + n - 2) / (n - 1));
  const double dr = 1.0 / static_cast<double>((n - 1) * per_cell);
  auto rhs = [c](const double &f, double &df, double r) { df = c * r / (f - 0.5 * r); };
  boost::numeric::odeint::runge_kutta4<double> stepper;
  ScaleFixFunction out{c, std::vector<double>(n), FcMethod::runge_kutta};
  double f = 0.5;
  out.samples[0] = f;
  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t s = 0; s < per_cell; ++s, ++k) stepper.do_step(rhs, f, static_cast<double>(k) * dr, dr);
    out.samples[i] = f;
  }
  return out;
}

struct GConstants {
  double g_plus;
  double g_minus;
  double a_plus;
  double a_minus;
};

inline GConstants g_constants(double c) {
  if (!(c > 0.0)) throw DomainError("g_constants: c must be positive");
  const double root = std::sqrt(1.0 + 16.0 * c);
  return {0.25 * (1.0 + root), 0.25 * (1.0 - root), -0.5 + 0.5 / root, -0.5 - 0.5 / root};
}

/**
 * f_c(r) = r g where (1/2) (g - g+)^{A+} (g - g-)^{A-} = r, solved by bisection in
 * log(g - g+). The left side decreases strictly from +inf to 0.
 */
inline double solve_fc_implicit(double c, double r) {
  if (!(c > 0.0)) throw DomainError("solve_fc_implicit: c must be positive");
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("solve_fc_implicit: r must lie in (0,1]");
  const GConstants k = g_constants(c);
  const double log_r = std::log(r);
  auto lhs = [&](double xi) {
    return std::log(0.5) + k.a_plus * xi + k.a_minus * std::log(std::exp(xi) + (k.g_plus - k.g_minus)) - log_r;
  };
  double lo = -700.0;
  double hi = 0.0;
  while (lhs(hi) > 0.0) {
    hi = 2.0 * hi + 1.0;
    if (hi > 700.0) throw NumericError("solve_fc_implicit: no bracket");
  }
  if (lhs(lo) <= 0.0) throw NumericError("solve_fc_implicit: no bracket");
  const auto [a, b] = boost::math::tools::bisect(lhs, lo, hi, boost::math::tools::eps_tolerance<double>(52));
  return r * (k.g_plus + std::exp(0.5 * (a + b)));
}

inline double h_of_c(double c) {
  if (c < 1e-10) return 1.0;
  const double a = std::sqrt(1.0 + 32.0 * c);
  const double b = std::sqrt(1.0 + 16.0 * c);
  const double ratio = 16.0 * c / ((a + b) * (a + b)); // (a-b)/(a+b) without cancellation
  return 0.25 * std::pow(ratio, 1.0 / b) / c;
}

/** The unique root of h(c) = 1 in (0, 1/4), by bisection on [1e-6, 0.25]. */
inline double find_c2(double tol = 1e-9) {
  if (!(tol > 0.0)) throw DomainError("find_c2: tolerance must be positive");
  auto f = [](double c) { return h_of_c(c) - 1.0; };
  const double lo = 1e-6, hi = 0.25;
  if (!(f(lo) > 0.0 && f(hi) < 0.0)) throw NumericError("find_c2: h - 1 does not change sign on the bracket");
  auto stop = [tol](double a, double b) { return std::abs(b - a) < tol; };
  const auto [a, b] = boost::math::tools::bisect(f, lo, hi, stop);
  return 0.5 * (a + b);
}

/** c2 to full double precision, computed once. */
inline double c2() {
  static const double value = find_c2(1e-15);
  return value;
}

/** Positive root of f^2 - f/2 = 2c; equals f_c(1) only at c = c2. */
inline double fc_at_one(double c) { return 0.25 * (1.0 + std::sqrt(1.0 + 32.0 * c)); }

inline double fc_first_derivative(double c, double r) {
  if (r == 0.0) return 0.0;
  const double f = solve_fc_implicit(c, r);
  return c * r / (f - 0.5 * r);
}

/** f_c'' from differentiating f' = c / (g - 1/2) with g = f/r. */
inline double fc_second_derivative(double c, double r) {
  if (r == 0.0) return 2.0 * c;
  const double f = solve_fc_implicit(c, r);
  const double g = f / r;
  const double fp = c / (g - 0.5);
  const double gp = (fp - g) / r;
  return -c * gp / ((g - 0.5) * (g - 0.5));
}

/** Union CDF of the nontrivial scale-invariant fixed point: (r v s) f_c2((r ^ s)/(r v s)). */
inline double rho2_union_cdf(double r, double s) {
  const double hi = std::max(r, s), lo = std::min(r, s);
  if (hi == 0.0) return 0.0;
  if (lo == 0.0) return 0.5 * hi;
  return hi * solve_fc_implicit(c2(), lo / hi);
}

/** Absolutely continuous density of the nontrivial fixed point on [0,1]^2: (r/s^2) f''(r/s), r <= s. */
inline double rho2_density(double r, double s) {
  if (r > s) std::swap(r, s);
  if (!(s > 0.0)) throw DomainError("rho2_density: s must be positive");
  const double x = r / s;
  return x / s * fc_second_derivative(c2(), x);
}

/** Rectangle mass [0,r] x [0,s] of the binary-scale nontrivial fixed point. */
inline double nu2_rect(double r, double s) {
  if (r <= 0.5 || s <= 0.5) return 0.0;
  const double hi = 2.0 - 1.0 / std::max(r, s);
  const double lo = 2.0 - 1.0 / std::min(r, s);
  return 2.0 - 0.5 / r - 0.5 / s - hi * solve_fc_implicit(c2(), lo / hi);
}

/** Grid of the nontrivial fixed point's union CDF. */
inline BivariateUnionCdf rho2_grid(std::size_t n) { return BivariateUnionCdf::from_function(n, rho2_union_cdf); }

/** max over grid r of |f(r)^2 - 1/4 - r f(r) + int_0^r f - c r^2|, trapezoid integral. */
inline double integral_equation_residual(const std::vector<double> &f, double c) {
  const std::size_t n = f.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  double integral = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) integral += 0.5 * h * (f[i - 1] + f[i]);
    const double r = static_cast<double>(i) * h;
    worst = std::max(worst, std::abs(f[i] * f[i] - 0.25 - r * f[i] + integral - c * r * r));
  }
  return worst;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_SCALEFIX_HPP
