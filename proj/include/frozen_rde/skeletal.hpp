#ifndef FROZEN_RDE_SKELETAL_HPP
#define FROZEN_RDE_SKELETAL_HPP

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "ext_time.hpp"

namespace frozen_rde {

/**
 * Integrates u' = u(1-u) - (1-t)u from t*phi0 and v' = t v(1-v) from phi0 with RK4 and returns
 * sup over the step grid of |u/t - v|.
 */
inline double skeletal_ode_check(double t, double horizon, double phi0, double dt = 1e-3) {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("skeletal_ode_check: t must lie in (0,1]");
  if (!(phi0 >= 0.0 && phi0 <= 1.0)) throw DomainError("skeletal_ode_check: phi0 must lie in [0,1]");
  auto full = [t](const double &u, double &du, double) { du = u * (1.0 - u) - (1.0 - t) * u; };
  auto skeleton = [t](const double &v, double &dv, double) { dv = t * v * (1.0 - v); };
  boost::numeric::odeint::runge_kutta4<double> a, b;
  double u = t * phi0, v = phi0, worst = 0.0;
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  for (long k = 0; k < steps; ++k) {
    const double h = static_cast<double>(k) * dt;
    a.do_step(full, u, h, dt);
    b.do_step(skeleton, v, h, dt);
    worst = std::max(worst, std::abs(u / t - v));
  }
  return worst;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_SKELETAL_HPP
