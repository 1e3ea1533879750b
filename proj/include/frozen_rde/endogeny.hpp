#ifndef FROZEN_RDE_ENDOGENY_HPP
#define FROZEN_RDE_ENDOGENY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bivariate.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "univariate.hpp"

namespace frozen_rde {

class BudgetExceededError : public NumericError {
public:
  using NumericError::NumericError;
};

/**
 * Root value of a depth-n y-side tree, evaluated on demand from keyed randomness.
 * eval(key, level, lo, hi) is exact when the true value lies in (lo, hi); otherwise it only
 * guarantees a result <= lo or >= hi on the same side as the true value. Subtrees that cannot
 * change the answer are skipped, which gives the same root value as the full recursion.
 */
class LazyYEvaluator {
public:
  static constexpr double inf = std::numeric_limits<double>::infinity();

  LazyYEvaluator(const UnivariateSolution &mu, int depth, std::uint64_t seed, std::uint64_t tree,
                 std::uint64_t boundary_stream, std::uint64_t budget)
      : mu_(mu), rho_(mu.gaps().empty() && mu.atoms().empty() && mu.density() == 0.5), rng_(seed, tree), depth_(depth),
        stream_(boundary_stream), budget_(budget) {}

  double root() { return eval(NodeKey::root(), 0, -inf, inf); }

  std::uint64_t visits() const { return visits_; }

private:
  double boundary(NodeKey key) const {
    const double u = rng_.uniform(key, Stream::boundary, stream_);
    if (rho_) return u < 0.5 ? 2.0 * u : inf;
    return mu_.quantile(u).value_or(inf);
  }

  double eval(NodeKey key, int lvl, double lo, double hi) {
    if (++visits_ > budget_) throw BudgetExceededError("lazy evaluation exceeded its node-visit budget");
    if (lvl == depth_) return boundary(key);
    if (rng_.uniform(key, Stream::kappa) >= 0.5) {
      const double a = eval(key.child(1), lvl + 1, lo, hi);
      if (a <= lo) return a;
      const double b = eval(key.child(2), lvl + 1, lo, std::min(hi, a));
      return std::min(a, b);
    }
    const double tau = rng_.uniform(key, Stream::tau);
    if (tau >= hi) return inf;
    const double v = eval(key.child(1), lvl + 1, tau, hi);
    return v <= tau ? inf : v;
  }

  const UnivariateSolution &mu_;
  bool rho_;
  KeyedRng rng_;
  int depth_;
  std::uint64_t stream_;
  std::uint64_t budget_;
  std::uint64_t visits_ = 0;
};

/** Root value of the depth-n y-side tree with boundary law mu, same keys as sample_rtp. */
inline ExtTime lazy_root_value(const UnivariateSolution &mu, int depth, std::uint64_t seed, std::uint64_t tree,
                               std::uint64_t boundary_stream = 0,
                               std::uint64_t budget = std::numeric_limits<std::uint64_t>::max()) {
  LazyYEvaluator ev(mu, depth, seed, tree, boundary_stream, budget);
  const double v = ev.root();
  return std::isinf(v) ? kInfinity : ExtTime::finite(v);
}

struct EndogenyGapResult {
  int depth = 0;
  std::uint64_t samples = 0;
  std::vector<double> r; ///< probe abscissae
  std::vector<double> s; ///< probe ordinates
  std::vector<std::uint64_t> rect_counts; ///< #{Y <= r_a, Y' <= s_b}, index a * s.size() + b
  std::uint64_t equal = 0;         ///< #{Y = Y'}
  std::uint64_t both_infinite = 0; ///< #{Y = Y' = inf}
  std::uint64_t visits = 0;

  Estimate rectangle(std::size_t a, std::size_t b) const {
    return binomial_estimate(rect_counts[a * s.size() + b], samples);
  }
  Estimate p_equal() const { return binomial_estimate(equal, samples); }
  Estimate p_differ() const { return binomial_estimate(samples - equal, samples); }
};

inline const std::vector<double> &default_probes() {
  static const std::vector<double> p{0.2, 0.4, 0.6, 0.8, 1.0};
  return p;
}

/**
 * Shares (tau, kappa) across two evaluations of a depth-n tree whose boundaries are independent
 * rho draws, and tabulates the joint law of the two root values.
 */
inline EndogenyGapResult endogeny_gap_mc(int depth, std::uint64_t samples, std::uint64_t seed,
                                         const std::vector<double> &r = default_probes(),
                                         const std::vector<double> &s = default_probes(), unsigned threads = 0,
                                         std::uint64_t budget_per_sample = 50'000'000) {
  if (depth < 0) throw DomainError("endogeny_gap_mc: negative depth");
  const UnivariateSolution rho = UnivariateSolution::rho();
  EndogenyGapResult res;
  res.depth = depth;
  res.samples = samples;
  res.r = r;
  res.s = s;
  res.rect_counts.assign(r.size() * s.size(), 0);
  const auto blocks = map_blocks(samples, 1024, threads, [&](std::size_t begin, std::size_t end) {
    EndogenyGapResult part;
    part.rect_counts.assign(r.size() * s.size(), 0);
    for (std::size_t k = begin; k < end; ++k) {
      LazyYEvaluator first(rho, depth, seed, k, 0, budget_per_sample);
      LazyYEvaluator second(rho, depth, seed, k, 1, budget_per_sample);
      const double y1 = first.root();
      const double y2 = second.root();
      part.visits += first.visits() + second.visits();
      if (y1 == y2) {
        ++part.equal;
        if (std::isinf(y1)) ++part.both_infinite;
      }
      for (std::size_t a = 0; a < r.size(); ++a) {
        if (!(y1 <= r[a])) continue;
        for (std::size_t b = 0; b < s.size(); ++b)
          if (y2 <= s[b]) ++part.rect_counts[a * s.size() + b];
      }
    }
    return part;
  });
  for (const auto &p : blocks) {
    res.equal += p.equal;
    res.both_infinite += p.both_infinite;
    res.visits += p.visits;
    for (std::size_t k = 0; k < res.rect_counts.size(); ++k) res.rect_counts[k] += p.rect_counts[k];
  }
  return res;
}

struct DepthFit {
  double limit = 0.0;
  double std_err = 0.0;
  std::vector<double> coefficients; ///< a, b, c of a + b/n + c/n^2
};

/**
 * Weighted least squares fit of a + b/n + c/n^2 to per-depth values; `std_errs` empty means
 * unit weights (and std_err reported as 0).
 */
inline DepthFit fit_inverse_depth(const std::vector<int> &depths, const std::vector<double> &values,
                                  const std::vector<double> &std_errs = {}) {
  const auto m = static_cast<Eigen::Index>(depths.size());
  if (m < 3 || values.size() != depths.size()) throw ValidationError("fit_inverse_depth needs >= 3 depths");
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd y(m), w(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double n = depths[static_cast<std::size_t>(k)];
    if (n <= 0) throw ValidationError("fit_inverse_depth: depths must be positive");
    X(k, 0) = 1.0;
    X(k, 1) = 1.0 / n;
    X(k, 2) = 1.0 / (n * n);
    y(k) = values[static_cast<std::size_t>(k)];
    w(k) = std_errs.empty() ? 1.0 : 1.0 / (std_errs[static_cast<std::size_t>(k)] * std_errs[static_cast<std::size_t>(k)]);
  }
  const Eigen::MatrixXd normal = X.transpose() * w.asDiagonal() * X;
  const Eigen::MatrixXd cov = normal.inverse();
  const Eigen::VectorXd beta = cov * (X.transpose() * w.asDiagonal() * y);
  DepthFit fit;
  fit.limit = beta(0);
  fit.std_err = std_errs.empty() ? 0.0 : std::sqrt(cov(0, 0));
  fit.coefficients = {beta(0), beta(1), beta(2)};
  return fit;
}

struct NonendogenyEstimate {
  std::vector<int> depths;
  std::vector<Estimate> p_differ; ///< per depth
  DepthFit limit;
};

/** P[Y != Y'] at several depths and its extrapolation to infinite depth. */
inline NonendogenyEstimate nonendogeny_limit_estimate(const std::vector<int> &depths, std::uint64_t samples,
                                                      std::uint64_t seed, unsigned threads = 0) {
  NonendogenyEstimate out;
  out.depths = depths;
  std::vector<double> values, errs;
  for (std::size_t k = 0; k < depths.size(); ++k) {
    const auto res = endogeny_gap_mc(depths[k], samples, seed + 7919 * (k + 1), {}, {}, threads);
    out.p_differ.push_back(res.p_differ());
    values.push_back(res.p_differ().mean);
    errs.push_back(res.p_differ().std_err);
  }
  out.limit = fit_inverse_depth(depths, values, errs);
  return out;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_ENDOGENY_HPP
