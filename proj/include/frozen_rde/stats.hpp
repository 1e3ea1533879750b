#ifndef FROZEN_RDE_STATS_HPP
#define FROZEN_RDE_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace frozen_rde {

struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
};

inline Estimate binomial_estimate(std::uint64_t hits, std::uint64_t trials) {
  if (trials == 0) return {0.0, 0.0};
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

/** P[K > lambda] for the Kolmogorov distribution. */
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/** Asymptotic p-value with Stephens' correction for effective sample size n. */
inline double ks_p_value(double d, double n) {
  const double rn = std::sqrt(n);
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

/**
 * One-sample KS against a CDF continuous on the finite line. Infinite samples count toward
 * an atom at +inf of mass 1 - finite_mass.
 */
inline KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)> &cdf,
                              double finite_mass = 1.0) {
  if (samples.empty()) throw std::invalid_argument("ks_one_sample: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  for (; i < samples.size() && std::isfinite(samples[i]); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  d = std::max(d, std::abs(static_cast<double>(i) / n - finite_mass));
  return {d, ks_p_value(d, n)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p_value(d, na * nb / (na + nb))};
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/** Pearson goodness of fit; categories with zero expected probability must have zero counts. */
inline ChiSquareResult chi_square_test(const std::vector<std::uint64_t> &observed, const std::vector<double> &probs) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi_square_test: size mismatch");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  if (total <= 0.0) throw std::invalid_argument("chi_square_test: no observations");
  ChiSquareResult res;
  int used = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double expected = probs[k] * total;
    if (expected <= 0.0) {
      if (observed[k] > 0) res.statistic = std::numeric_limits<double>::infinity();
      continue;
    }
    const double diff = static_cast<double>(observed[k]) - expected;
    res.statistic += diff * diff / expected;
    ++used;
  }
  res.dof = std::max(1, used - 1);
  if (std::isinf(res.statistic)) {
    res.p_value = 0.0;
  } else {
    res.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(res.dof), res.statistic));
  }
  return res;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_STATS_HPP
