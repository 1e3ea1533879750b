#ifndef FROZEN_RDE_NODE_MAPS_HPP
#define FROZEN_RDE_NODE_MAPS_HPP

#include <string>

#include "ext_time.hpp"

namespace frozen_rde {

namespace detail {
inline void require_unit(double t, const char *what) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError(std::string(what) + ": time outside [0,1]");
}
} // namespace detail

/** Branching type of an MBBT node: a blocking point or a branch point. */
enum class Kappa : unsigned char { blocking = 1, branching = 2 };

inline Kappa kappa_from_int(int k) {
  if (k == 1) return Kappa::blocking;
  if (k == 2) return Kappa::branching;
  throw DomainError("kappa must be 1 or 2");
}

/** Binary-tree node map: min(x,y) if it exceeds t, else infinity. Ties freeze. */
inline ExtTime gamma(double t, ExtTime x, ExtTime y) {
  detail::require_unit(t, "gamma");
  const ExtTime m = min(x, y);
  return exceeds(m, t) ? m : kInfinity;
}

/** MBBT node map. */
inline ExtTime chi(double tau, Kappa kappa, ExtTime x, ExtTime y) {
  detail::require_unit(tau, "chi");
  if (kappa == Kappa::branching) return min(x, y);
  return exceeds(x, tau) ? x : kInfinity;
}

inline ExtTime chi(double tau, int kappa, ExtTime x, ExtTime y) {
  return chi(tau, kappa_from_int(kappa), x, y);
}

inline ExtTime phi(double t, ExtTime x) {
  detail::require_unit(t, "phi");
  return exceeds(x, t) ? x : kInfinity;
}

/** Time change from the MBBT scale to the binary-tree scale, 1/(2-t). */
inline double h_map(double t) { return 1.0 / (2.0 - t); }

inline ExtTime h_map(ExtTime t) {
  if (t.is_infinite()) return kInfinity;
  const double v = t.value();
  detail::require_unit(v, "h_map");
  return ExtTime::finite(h_map(v));
}

/** Inverse of h_map on [1/2,1]. */
inline double h_inv(double t) {
  if (!(t >= 0.5 && t <= 1.0)) throw DomainError("h_inv: time outside [1/2,1]");
  return 2.0 - 1.0 / t;
}

inline ExtTime h_inv(ExtTime t) {
  if (t.is_infinite()) return kInfinity;
  return ExtTime::finite(h_inv(t.value()));
}

/** Extension of h_map to [-1,1]: linear on [-1,0], 1/(2-s) on [0,1]. */
inline double h_ext(double s) {
  if (!(s >= -1.0 && s <= 1.0)) throw DomainError("h_ext: argument outside [-1,1]");
  return s <= 0.0 ? 0.5 * (1.0 + s) : 1.0 / (2.0 - s);
}

} // namespace frozen_rde

#endif // FROZEN_RDE_NODE_MAPS_HPP
