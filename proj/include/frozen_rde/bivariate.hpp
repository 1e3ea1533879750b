#ifndef FROZEN_RDE_BIVARIATE_HPP
#define FROZEN_RDE_BIVARIATE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "node_maps.hpp"
#include "parallel.hpp"
#include "univariate.hpp"

namespace frozen_rde {

class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * Union CDF F(r,s) = mu({[0,r] x I} u {I x [0,s]}) of a pair of MBBT-scale times,
 * sampled at r_i = i/(n-1), s_j = j/(n-1).
 */
class BivariateUnionCdf {
public:
  explicit BivariateUnionCdf(std::size_t n) : n_(n), v_(n * n, 0.0) {
    if (n < 2) throw ValidationError("bivariate grid needs at least 2 points per axis");
  }

  static BivariateUnionCdf from_function(std::size_t n, const std::function<double(double, double)> &f) {
    BivariateUnionCdf g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) = f(g.coord(i), g.coord(j));
    return g;
  }

  /** Two independent rho coordinates. */
  static BivariateUnionCdf product(std::size_t n) {
    return from_function(n, [](double r, double s) { return 0.5 * r + 0.5 * s - 0.25 * r * s; });
  }

  /** Both coordinates equal, law rho. */
  static BivariateUnionCdf trivial(std::size_t n) {
    return from_function(n, [](double r, double s) { return 0.5 * std::max(r, s); });
  }

  std::size_t n() const { return n_; }
  double coord(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n_ - 1); }
  double &operator()(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }
  const std::vector<double> &values() const { return v_; }

  /** Bilinear interpolation at (r,s) in [0,1]^2. */
  double at(double r, double s) const {
    const double h = static_cast<double>(n_ - 1);
    const double x = std::clamp(r, 0.0, 1.0) * h;
    const double y = std::clamp(s, 0.0, 1.0) * h;
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x), n_ - 2);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(y), n_ - 2);
    const double a = x - static_cast<double>(i);
    const double b = y - static_cast<double>(j);
    const auto &F = *this;
    return (1 - a) * (1 - b) * F(i, j) + a * (1 - b) * F(i + 1, j) + (1 - a) * b * F(i, j + 1) +
           a * b * F(i + 1, j + 1);
  }

  /** Rectangle mass mu([0,r] x [0,s]) = r/2 + s/2 - F(r,s). */
  double rectangle_mass(double r, double s) const { return 0.5 * r + 0.5 * s - at(r, s); }

  /** Throws ValidationError unless symmetric, pinned to rho marginals, monotone, F(1,1) <= 1. */
  void validate(double tol = 1e-9) const {
    const auto &F = *this;
    for (std::size_t i = 0; i < n_; ++i) {
      if (std::abs(F(0, i) - 0.5 * coord(i)) > tol || std::abs(F(i, 0) - 0.5 * coord(i)) > tol)
        throw ValidationError("marginals are not pinned to rho");
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(F(i, j) - F(j, i)) > tol) throw ValidationError("union CDF is not symmetric");
        if (i > 0 && F(i, j) < F(i - 1, j) - tol) throw ValidationError("union CDF is not monotone");
        if (j > 0 && F(i, j) < F(i, j - 1) - tol) throw ValidationError("union CDF is not monotone");
      }
    }
    if (F(n_ - 1, n_ - 1) > 1.0 + tol) throw ValidationError("F(1,1) exceeds 1");
  }

  friend double sup_distance(const BivariateUnionCdf &a, const BivariateUnionCdf &b) {
    if (a.n_ != b.n_) throw ValidationError("grid sizes differ");
    double d = 0.0;
    for (std::size_t k = 0; k < a.v_.size(); ++k) d = std::max(d, std::abs(a.v_[k] - b.v_[k]));
    return d;
  }

private:
  std::size_t n_;
  std::vector<double> v_;
};

/**
 * One step of the bivariate map in union-CDF form:
 *   F - F^2/2 + r^2/8 + s^2/8 + (1/2) int_0^{r^s} (F(r,s) - F(t,s) - F(r,t) + F(t,t)) dt,
 * trapezoid rule along the grid, then averaged with its transpose. O(n^2) via prefix sums.
 */
inline BivariateUnionCdf bivariate_apply(const BivariateUnionCdf &F, unsigned threads = 1, bool check = true) {
  if (check) F.validate();
  const std::size_t n = F.n();
  const double h = 1.0 / static_cast<double>(n - 1);

  // along_r(m, j) = int_0^{r_m} F(t, s_j) dt ; along_s(i, m) = int_0^{s_m} F(r_i, t) dt
  BivariateUnionCdf along_r(n), along_s(n);
  std::vector<double> diag(n, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t j = 0; j < n; ++j) along_r(m, j) = along_r(m - 1, j) + 0.5 * h * (F(m - 1, j) + F(m, j));
    diag[m] = diag[m - 1] + 0.5 * h * (F(m - 1, m - 1) + F(m, m));
  }
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t m = 1; m < n; ++m) along_s(i, m) = along_s(i, m - 1) + 0.5 * h * (F(i, m - 1) + F(i, m));
  });

  BivariateUnionCdf out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const double r = F.coord(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double s = F.coord(j);
      const std::size_t m = std::min(i, j);
      const double f = F(i, j);
      const double integral = F.coord(m) * f - along_r(m, j) - along_s(i, m) + diag[m];
      out(i, j) = f - 0.5 * f * f + 0.125 * r * r + 0.125 * s * s + 0.5 * integral;
    }
  });
  BivariateUnionCdf sym(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (out(i, j) + out(j, i));
  return sym;
}

struct IterationResult {
  BivariateUnionCdf grid;
  int iterations = 0;
  double last_step = 0.0; ///< sup-norm difference of the last two iterates
  bool converged = false;
};

/** Called after each step with (iteration count, current grid, step size). */
using IterationObserver = std::function<void(int, const BivariateUnionCdf &, double)>;

/**
 * Applies bivariate_apply until the sup-norm step drops below tol or n_iter steps are done.
 * Ten consecutive growing steps raise NumericError.
 */
inline IterationResult iterate_bivariate(const BivariateUnionCdf &F0, int n_iter, double tol, unsigned threads = 1,
                                         const IterationObserver &observe = {}) {
  F0.validate();
  IterationResult res{F0, 0, 0.0, false};
  double prev_step = -1.0;
  int growth_run = 0;
  for (int k = 1; k <= n_iter; ++k) {
    BivariateUnionCdf next = bivariate_apply(res.grid, threads, false);
    const double step = sup_distance(next, res.grid);
    if (!std::isfinite(step)) throw NumericError("bivariate iteration produced non-finite values");
    growth_run = (prev_step >= 0.0 && step > prev_step) ? growth_run + 1 : 0;
    if (growth_run >= 10) throw NumericError("bivariate iteration diverging");
    prev_step = step;
    res.grid = std::move(next);
    res.iterations = k;
    res.last_step = step;
    if (observe) observe(k, res.grid, step);
    if (step < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/** f(r) = F(r,1) sampled on the grid. */
inline std::vector<double> profile_from_F(const BivariateUnionCdf &F) {
  std::vector<double> f(F.n());
  for (std::size_t i = 0; i < F.n(); ++i) f[i] = F(i, F.n() - 1);
  return f;
}

/** sup over grid nodes (r,s) and scale factors t of |F(tr,ts) - t F(r,s)|. */
inline double scale_invariance_defect(const BivariateUnionCdf &F,
                                      const std::vector<double> &factors = {0.125, 0.25, 0.375, 0.5, 0.625,
                                                                            0.75, 0.875}) {
  double worst = 0.0;
  for (double t : factors)
    for (std::size_t i = 0; i < F.n(); ++i)
      for (std::size_t j = 0; j < F.n(); ++j)
        worst = std::max(worst, std::abs(F.at(t * F.coord(i), t * F.coord(j)) - t * F(i, j)));
  return worst;
}

struct BivariateComponents {
  std::size_t n = 0;
  std::vector<double> density;  ///< row-major n x n, -d^2F/drds
  std::vector<double> inf_line; ///< density of mass on [0,1] x {inf}
  double inf_atom = 0.0;        ///< mass at (inf, inf)
  /** Rectangle mass of [0,1]^2 not captured by the density grid, e.g. singular mass on the diagonal. */
  double unresolved_mass = 0.0;

  double density_at(std::size_t i, std::size_t j) const { return density[i * n + j]; }
};

class InvalidMeasureError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

inline BivariateComponents components_from_F(const BivariateUnionCdf &F) {
  const std::size_t n = F.n();
  const double h = 1.0 / static_cast<double>(n - 1);
  auto rect = [&](std::size_t i, std::size_t j) { return 0.5 * F.coord(i) + 0.5 * F.coord(j) - F(i, j); };
  BivariateComponents c;
  c.n = n;
  c.density.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i0 = i == 0 ? 0 : i - 1, i1 = i + 1 == n ? i : i + 1;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t j0 = j == 0 ? 0 : j - 1, j1 = j + 1 == n ? j : j + 1;
      const double mixed = rect(i1, j1) - rect(i1, j0) - rect(i0, j1) + rect(i0, j0);
      const double g = mixed / (static_cast<double>(i1 - i0) * h * static_cast<double>(j1 - j0) * h);
      if (g < -1e-6) throw InvalidMeasureError("negative density in bivariate measure");
      c.density[i * n + j] = std::max(g, 0.0);
    }
  }
  c.inf_line.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i0 = i == 0 ? 0 : i - 1, i1 = i + 1 == n ? i : i + 1;
    c.inf_line[i] = (F(i1, n - 1) - F(i0, n - 1)) / (static_cast<double>(i1 - i0) * h);
  }
  c.inf_atom = 1.0 - F(n - 1, n - 1);
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double wi = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
      const double wj = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      integral += wi * wj * c.density[i * n + j] * h * h;
    }
  c.unresolved_mass = rect(n - 1, n - 1) - integral;
  return c;
}

/** Union CDF of (h_map(Y), h_map(Y')) sampled on a uniform grid of [1/2,1]. */
class XSideUnionCdf {
public:
  explicit XSideUnionCdf(std::size_t n) : n_(n), v_(n * n, 0.0) {}

  std::size_t n() const { return n_; }
  double coord(std::size_t i) const { return 0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(n_ - 1); }
  double &operator()(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }

  /** nu([0,u]) for the binary-scale marginal. */
  static double marginal(double u) { return u <= 0.5 ? 0.0 : std::min(1.0, 1.0 - 0.5 / u); }

  double rectangle_mass(std::size_t i, std::size_t j) const {
    return marginal(coord(i)) + marginal(coord(j)) - (*this)(i, j);
  }

private:
  std::size_t n_;
  std::vector<double> v_;
};

inline XSideUnionCdf pushforward_h2(const BivariateUnionCdf &F, std::size_t n_out = 0) {
  if (n_out == 0) n_out = F.n();
  XSideUnionCdf x(n_out);
  for (std::size_t i = 0; i < n_out; ++i)
    for (std::size_t j = 0; j < n_out; ++j) x(i, j) = F.at(h_inv(x.coord(i)), h_inv(x.coord(j)));
  return x;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_BIVARIATE_HPP
