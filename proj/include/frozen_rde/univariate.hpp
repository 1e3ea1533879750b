#ifndef FROZEN_RDE_UNIVARIATE_HPP
#define FROZEN_RDE_UNIVARIATE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ext_time.hpp"
#include "node_maps.hpp"

namespace frozen_rde {

class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/** mbbt: measure on [0,1] u {inf}; binary: its image under h_map, on [1/2,1] u {inf}. */
enum class Scale { mbbt, binary };

struct Interval {
  double center; ///< in (0,1], or 2 for an interval whose atom is suppressed
  double radius;
};

struct Atom {
  double at;
  double mass;
};

struct Gap {
  double lo; ///< density vanishes on (lo, hi)
  double hi;
};

/**
 * Measure with constant density (1/2 for RDE solutions) on [0,1] minus a union of gaps, finitely many atoms, and the
 * remaining mass at infinity. All queries are closed form.
 */
class UnivariateSolution {
public:
  /** Unchecked against the RDE; use make_general_solution for actual solutions. */
  static UnivariateSolution from_parts(std::vector<Gap> gaps, std::vector<Atom> atoms,
                                       Scale scale = Scale::mbbt, double density = 0.5) {
    UnivariateSolution mu;
    if (!(density >= 0.0)) throw ValidationError("density must be nonnegative");
    mu.density_ = density;
    std::sort(gaps.begin(), gaps.end(), [](const Gap &a, const Gap &b) { return a.lo < b.lo; });
    std::sort(atoms.begin(), atoms.end(), [](const Atom &a, const Atom &b) { return a.at < b.at; });
    double prev_hi = 0.0;
    for (const auto &g : gaps) {
      if (!(g.lo >= 0.0 && g.hi <= 1.0 && g.lo < g.hi)) throw ValidationError("gap outside [0,1] or empty");
      if (g.lo < prev_hi) throw ValidationError("gaps overlap");
      prev_hi = g.hi;
    }
    for (const auto &a : atoms) {
      if (!(a.at >= 0.0 && a.at <= 1.0) || a.mass < 0.0) throw ValidationError("atom outside [0,1] or negative");
    }
    mu.gaps_ = std::move(gaps);
    mu.atoms_ = std::move(atoms);
    mu.scale_ = scale;
    const double finite_mass = mu.cdf_native(1.0);
    if (finite_mass > 1.0 + 1e-12) throw ValidationError("total finite mass exceeds 1");
    mu.inf_mass_ = std::max(0.0, 1.0 - finite_mass);
    return mu;
  }

  static UnivariateSolution rho() { return from_parts({}, {}); }
  static UnivariateSolution nu() { return from_parts({}, {}, Scale::binary); }

  Scale scale() const { return scale_; }
  const std::vector<Gap> &gaps() const { return gaps_; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  double density() const { return density_; }
  double inf_mass() const { return inf_mass_; }

  /** mu([0,t]) on this measure's own scale. */
  double cdf(double t) const {
    if (scale_ == Scale::mbbt) return cdf_native(std::clamp(t, 0.0, 1.0));
    if (t < 0.5) return 0.0;
    return cdf_native(h_inv(std::min(t, 1.0)));
  }

  /** int_{[0,t]} s mu(ds) on the MBBT scale. */
  double first_moment(double t) const {
    t = std::clamp(t, 0.0, 1.0);
    double removed = 0.0;
    for (const auto &g : gaps_) {
      if (g.lo >= t) break;
      const double hi = std::min(g.hi, t);
      removed += hi * hi - g.lo * g.lo;
    }
    double m = 0.5 * density_ * (t * t - removed);
    for (const auto &a : atoms_) {
      if (a.at > t) break;
      m += a.at * a.mass;
    }
    return m;
  }

  /** Gap ends and atom locations on the MBBT scale. */
  std::vector<double> breakpoints() const {
    std::vector<double> pts;
    for (const auto &g : gaps_) {
      pts.push_back(g.lo);
      pts.push_back(g.hi);
    }
    for (const auto &a : atoms_) pts.push_back(a.at);
    std::sort(pts.begin(), pts.end());
    return pts;
  }

  /** Generalized inverse CDF at u in [0,1), on this measure's own scale. */
  ExtTime quantile(double u) const {
    double acc = 0.0;
    double pos = 0.0;
    std::size_t gi = 0;
    std::size_t ai = 0;
    // walk left to right over density pieces and atoms
    while (pos < 1.0 || ai < atoms_.size()) {
      const double next_gap = gi < gaps_.size() ? gaps_[gi].lo : 1.0;
      const double next_atom = ai < atoms_.size() ? atoms_[ai].at : 2.0;
      const double stop = std::min(next_gap, next_atom);
      if (stop > pos) {
        const double piece = density_ * (stop - pos);
        if (u < acc + piece) return on_scale(pos + (u - acc) / density_);
        acc += piece;
        pos = stop;
      }
      if (ai < atoms_.size() && atoms_[ai].at <= pos) {
        acc += atoms_[ai].mass;
        if (u < acc) return on_scale(atoms_[ai].at);
        ++ai;
        continue;
      }
      if (gi < gaps_.size() && gaps_[gi].lo <= pos) {
        pos = std::max(pos, gaps_[gi].hi);
        ++gi;
        continue;
      }
      if (pos >= 1.0 && ai >= atoms_.size()) break;
    }
    return kInfinity;
  }

  UnivariateSolution with_scale(Scale s) const {
    UnivariateSolution mu = *this;
    mu.scale_ = s;
    return mu;
  }

private:
  UnivariateSolution() = default;

  double cdf_native(double t) const {
    double removed = 0.0;
    for (const auto &g : gaps_) {
      if (g.lo >= t) break;
      removed += std::min(g.hi, t) - g.lo;
    }
    double f = density_ * (t - removed);
    for (const auto &a : atoms_) {
      if (a.at > t) break;
      f += a.mass;
    }
    return f;
  }

  ExtTime on_scale(double t) const {
    return ExtTime::finite(scale_ == Scale::mbbt ? t : h_map(t));
  }

  std::vector<Gap> gaps_;
  std::vector<Atom> atoms_;
  Scale scale_ = Scale::mbbt;
  double density_ = 0.5;
  double inf_mass_ = 0.5;
};

/**
 * Solution of the MBBT-side RDE with density 1/2 off the union of (x-c, x+c) and an atom of
 * mass c at each center. A center of 2 marks the interval through 1 whose atom is suppressed.
 */
inline UnivariateSolution make_general_solution(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval &a, const Interval &b) { return a.center - a.radius < b.center - b.radius; });
  std::vector<Gap> gaps;
  std::vector<Atom> atoms;
  int touching_one = 0;
  double prev_hi = 0.0;
  for (const auto &iv : intervals) {
    const bool suppressed = iv.center == 2.0;
    if (!(iv.radius > 0.0)) throw ValidationError("interval radius must be positive");
    if (!suppressed && !(iv.center > 0.0 && iv.center <= 1.0))
      throw ValidationError("interval center must lie in (0,1] or equal 2");
    const double lo = iv.center - iv.radius;
    const double hi = iv.center + iv.radius;
    if (lo < 0.0) throw ValidationError("interval extends below 0");
    if (lo >= 1.0) continue; // empty after clipping to (0,1]
    if (lo < prev_hi) throw ValidationError("intervals overlap");
    if (hi >= 1.0) ++touching_one;
    prev_hi = hi;
    gaps.push_back({lo, std::min(hi, 1.0)});
    if (!suppressed) atoms.push_back({iv.center, iv.radius});
  }
  if (touching_one > 1) throw ValidationError("more than one interval reaches 1");
  return UnivariateSolution::from_parts(std::move(gaps), std::move(atoms));
}

/** max |int_{[0,t]} s mu(ds) - mu([0,t])^2| over the grid and all breakpoints (MBBT scale). */
inline double check_rde_residual(const UnivariateSolution &mu, const std::vector<double> &grid) {
  const UnivariateSolution m = mu.with_scale(Scale::mbbt);
  double worst = 0.0;
  auto probe = [&](double t) {
    if (t < 0.0 || t > 1.0) return;
    const double f = m.cdf(t);
    worst = std::max(worst, std::abs(m.first_moment(t) - f * f));
  };
  for (double t : grid) probe(t);
  for (double t : m.breakpoints()) probe(t);
  return worst;
}

inline UnivariateSolution pushforward_h(const UnivariateSolution &mu) {
  if (mu.scale() != Scale::mbbt) throw ValidationError("pushforward_h expects an MBBT-scale measure");
  return mu.with_scale(Scale::binary);
}

/** CDF sampled on a uniform grid of [0,1]. */
struct CdfGrid {
  std::vector<double> t;
  std::vector<double> F;

  static CdfGrid uniform(std::size_t n) {
    if (n < 2) throw ValidationError("grid needs at least 2 points");
    CdfGrid g;
    g.t.resize(n);
    g.F.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) g.t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
  }

  static CdfGrid of(const UnivariateSolution &mu, std::size_t n = 1024) {
    CdfGrid g = uniform(n);
    for (std::size_t i = 0; i < n; ++i) g.F[i] = mu.cdf(g.t[i]);
    return g;
  }
};

namespace detail {

inline void require_cdf(const CdfGrid &g) {
  if (g.t.size() != g.F.size() || g.t.size() < 2) throw ValidationError("malformed CDF grid");
  if (g.F.front() < 0.0 || g.F.back() > 1.0 + 1e-12) throw ValidationError("CDF outside [0,1]");
  for (std::size_t i = 1; i < g.F.size(); ++i)
    if (g.F[i] < g.F[i - 1] - 1e-12) throw ValidationError("CDF not monotone");
}

/** Cumulative trapezoid integral of y over the grid t. */
inline std::vector<double> cumulative_trapezoid(const std::vector<double> &t, const std::vector<double> &y) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

} // namespace detail

/** CDF of the MBBT-side map applied to F: tF/2 - (1/2) int F + F - F^2/2. */
inline CdfGrid apply_T_y(const CdfGrid &in) {
  detail::require_cdf(in);
  const auto integral = detail::cumulative_trapezoid(in.t, in.F);
  CdfGrid out = in;
  for (std::size_t i = 0; i < in.t.size(); ++i) {
    const double f = in.F[i];
    out.F[i] = 0.5 * in.t[i] * f - 0.5 * integral[i] + f - 0.5 * f * f;
  }
  return out;
}

struct TxResult {
  CdfGrid cdf;
  bool mass_below_half = false; ///< input put mass below 1/2, where no x-side solution lives
};

/** CDF of the binary-tree map: int_0^t (G(t) - G(s)) ds with G = 1 - (1-F)^2. */
inline TxResult apply_T_x(const CdfGrid &in) {
  detail::require_cdf(in);
  TxResult res{in, false};
  std::vector<double> G(in.F.size());
  for (std::size_t i = 0; i < in.F.size(); ++i) {
    G[i] = 1.0 - (1.0 - in.F[i]) * (1.0 - in.F[i]);
    if (in.t[i] < 0.5 && in.F[i] > 1e-12) res.mass_below_half = true;
  }
  const auto integral = detail::cumulative_trapezoid(in.t, G);
  for (std::size_t i = 0; i < in.t.size(); ++i) res.cdf.F[i] = in.t[i] * G[i] - integral[i];
  return res;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_UNIVARIATE_HPP
