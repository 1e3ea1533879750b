#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "frozen_rde/frozen_rde.hpp"

using namespace frozen_rde;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExtTime F(double v) { return ExtTime::finite(v); }

double to_double(ExtTime x) { return x.value_or(kInf); }

/** Full binary x-side tree of the given depth with explicit tau and boundary values. */
TruncatedTreeSample x_tree(int depth, const std::vector<double> &tau, const std::vector<ExtTime> &boundary) {
  TruncatedTreeSample t;
  t.side = Side::x;
  t.depth = depth;
  const std::size_t interior = (std::size_t{1} << depth) - 1;
  const std::size_t total = 2 * interior + 1;
  t.tau.assign(total, std::numeric_limits<double>::quiet_NaN());
  t.child1.assign(total, TruncatedTreeSample::none);
  t.child2.assign(total, TruncatedTreeSample::none);
  t.level.assign(total, 0);
  t.value.assign(total, kInfinity);
  t.frozen.assign(total, 0);
  for (std::size_t i = 1; i < total; ++i) t.level[i] = t.level[(i - 1) / 2] + 1;
  for (std::size_t i = 0; i < interior; ++i) {
    t.tau[i] = tau[i];
    t.child1[i] = static_cast<std::int32_t>(2 * i + 1);
    t.child2[i] = static_cast<std::int32_t>(2 * i + 2);
  }
  for (std::size_t k = 0; k < boundary.size(); ++k) t.value[interior + k] = boundary[k];
  t.evaluate();
  return t;
}

/** Percolation time by listing every root-to-boundary path of a full x-side tree. */
double brute_force_percolation(const TruncatedTreeSample &t) {
  double best = kInf;
  const std::size_t paths = std::size_t{1} << t.depth;
  for (std::size_t p = 0; p < paths; ++p) {
    std::size_t node = 0;
    double worst = 0.0;
    for (int l = 0; l < t.depth; ++l) {
      worst = std::max(worst, t.frozen[node] ? kInf : t.tau[node]);
      node = 2 * node + 1 + ((p >> l) & 1);
    }
    best = std::min(best, worst);
  }
  return best;
}

/** y-tree by hand: nodes in level order, `kinds` gives 1/2 per interior node. */
TruncatedTreeSample y_tree(int depth, const std::vector<int> &kinds, const std::vector<double> &tau,
                           const std::vector<ExtTime> &boundary) {
  TruncatedTreeSample t;
  t.side = Side::y;
  t.depth = depth;
  std::vector<int> lvl{0};
  std::size_t next_kind = 0, next_boundary = 0;
  for (std::size_t k = 0; k < lvl.size(); ++k) {
    t.level.push_back(lvl[k]);
    if (lvl[k] == depth) {
      t.tau.push_back(std::numeric_limits<double>::quiet_NaN());
      t.kappa.push_back(Kappa::branching);
      t.child1.push_back(TruncatedTreeSample::none);
      t.child2.push_back(TruncatedTreeSample::none);
      t.value.push_back(boundary[next_boundary++]);
      continue;
    }
    const Kappa kap = kappa_from_int(kinds[next_kind]);
    t.tau.push_back(tau[next_kind++]);
    t.kappa.push_back(kap);
    t.value.push_back(kInfinity);
    t.child1.push_back(static_cast<std::int32_t>(lvl.size()));
    lvl.push_back(lvl[k] + 1);
    if (kap == Kappa::branching) {
      t.child2.push_back(static_cast<std::int32_t>(lvl.size()));
      lvl.push_back(lvl[k] + 1);
    } else {
      t.child2.push_back(TruncatedTreeSample::none);
    }
  }
  t.frozen.assign(t.size(), 0);
  t.evaluate();
  return t;
}

std::vector<double> root_values(int depth, const UnivariateSolution &mu, Side side, std::uint64_t seed, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(to_double(sample_rtp(depth, mu, side, seed, k).value[0]));
  return out;
}

double se(double p, double n) { return std::sqrt(p * (1 - p) / n); }

} // namespace

TEST(RtpTree, HandBuiltDepthOne) {
  const auto t = x_tree(1, {0.6}, {F(0.7), F(0.9)});
  EXPECT_EQ(t.value[0], F(0.7));
  EXPECT_FALSE(t.frozen[0]);
  EXPECT_EQ(percolation_time_depth_n(t), F(0.6));
  const auto f = x_tree(1, {0.8}, {F(0.7), F(0.9)});
  EXPECT_EQ(f.value[0], kInfinity);
  EXPECT_TRUE(f.frozen[0]);
  EXPECT_EQ(percolation_time_depth_n(f), kInfinity);
  EXPECT_EQ(percolation_time_depth_n(x_tree(1, {0.3}, {kInfinity, kInfinity})), F(0.3));
}

TEST(RtpTree, HandBuiltDepthTwo) {
  // left child freezes (0.7 >= 0.6), right child passes 0.8 up; the only open route runs right
  const auto t = x_tree(2, {0.5, 0.7, 0.2}, {F(0.6), F(0.9), F(0.8), kInfinity});
  EXPECT_TRUE(t.frozen[1]);
  EXPECT_FALSE(t.frozen[2]);
  EXPECT_EQ(t.value[1], kInfinity);
  EXPECT_EQ(t.value[2], F(0.8));
  EXPECT_EQ(t.value[0], F(0.8));
  EXPECT_EQ(percolation_time_depth_n(t), F(0.5));
  EXPECT_EQ(brute_force_percolation(t), 0.5);
}

TEST(RtpTree, BottleneckMatchesPathEnumeration) {
  const auto nu = UnivariateSolution::nu();
  for (int k = 0; k < 300; ++k) {
    const auto t = sample_rtp(1 + k % 9, nu, Side::x, 5, k);
    EXPECT_EQ(to_double(percolation_time_depth_n(t)), brute_force_percolation(t));
  }
}

TEST(RtpTree, YSideHandBuilt) {
  // root blocking at 0.4 over a branch point with boundary values 0.3 and 0.9
  const auto t = y_tree(2, {1, 2}, {0.4, 0.0}, {F(0.3), F(0.9)});
  EXPECT_EQ(t.value[1], F(0.3));
  EXPECT_EQ(t.value[0], kInfinity);
  EXPECT_TRUE(t.frozen[0]);
  EXPECT_EQ(percolation_time_depth_n(t), kInfinity);
  const auto open = y_tree(2, {1, 2}, {0.2, 0.0}, {F(0.3), F(0.9)});
  EXPECT_EQ(open.value[0], F(0.3));
  EXPECT_EQ(percolation_time_depth_n(open), F(0.2));
}

TEST(RtpTree, DepthZeroIsABoundaryDraw) {
  const auto rho = UnivariateSolution::rho();
  const auto t = sample_rtp(0, rho, Side::y, 9, 3);
  EXPECT_EQ(t.size(), 1u);
  const KeyedRng rng(9, 3);
  EXPECT_EQ(t.value[0], rho.quantile(rng.uniform(NodeKey::root(), Stream::boundary)));
}

TEST(RtpTree, SideMismatchRejected) {
  EXPECT_THROW(sample_rtp(3, UnivariateSolution::rho(), Side::x, 1), ValidationError);
  EXPECT_THROW(sample_rtp(3, UnivariateSolution::nu(), Side::y, 1), ValidationError);
  EXPECT_THROW(sample_rtp(-1, UnivariateSolution::nu(), Side::x, 1), DomainError);
}

TEST(RtpTree, RecursionExactAndFrozenFlags) {
  const auto nu = UnivariateSolution::nu();
  const auto mu = make_general_solution({{0.5, 0.25}});
  for (int k = 0; k < 50; ++k) {
    const auto x = sample_rtp(8, nu, Side::x, 11, k);
    EXPECT_TRUE(satisfies_recursion(x));
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x.is_boundary(i)) continue;
      const ExtTime m = min(x.value[2 * i + 1], x.value[2 * i + 2]);
      EXPECT_EQ(static_cast<bool>(x.frozen[i]), !exceeds(m, x.tau[i]));
      if (x.value[i].is_finite()) { EXPECT_GT(x.value[i].value(), x.tau[i]); }
    }
    const auto y = sample_rtp(10, mu, Side::y, 12, k);
    EXPECT_TRUE(satisfies_recursion(y));
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.is_boundary(i)) continue;
      const bool want = y.kappa[i] == Kappa::blocking && !exceeds(y.value[static_cast<std::size_t>(y.child1[i])], y.tau[i]);
      EXPECT_EQ(static_cast<bool>(y.frozen[i]), want);
    }
  }
}

TEST(RtpTree, PercolationTimeBelowBurningTime) {
  const auto nu = UnivariateSolution::nu();
  const auto rho = UnivariateSolution::rho();
  for (int k = 0; k < 500; ++k) {
    const auto x = sample_rtp(7, nu, Side::x, 13, k);
    if (x.value[0].is_finite()) { EXPECT_LE(percolation_time_depth_n(x), x.value[0]); }
    const auto y = sample_rtp(12, rho, Side::y, 14, k);
    if (y.value[0].is_finite()) { EXPECT_LE(percolation_time_depth_n(y), y.value[0]); }
  }
}

TEST(RtpTree, RootLawIsStationary) {
  const int n = 20000;
  const auto nu = UnivariateSolution::nu();
  const auto x = ks_one_sample(root_values(8, nu, Side::x, 21, n), [](double u) { return XSideUnionCdf::marginal(u); }, 0.5);
  EXPECT_GT(x.p_value, 0.01);
  EXPECT_LT(x.statistic, 1.63 / std::sqrt(double(n)));

  const auto rho = UnivariateSolution::rho();
  const auto y = ks_one_sample(root_values(12, rho, Side::y, 22, n), [](double t) { return 0.5 * t; }, 0.5);
  EXPECT_GT(y.p_value, 0.01);

  // a general solution has atoms, so compare the CDF at a few points instead
  const auto mu = make_general_solution({{0.5, 0.25}});
  const auto vals = root_values(12, mu, Side::y, 23, n);
  for (double t : {0.2, 0.49, 0.5, 0.8, 1.0}) {
    double hits = 0;
    for (double v : vals) hits += v <= t ? 1 : 0;
    EXPECT_NEAR(hits / n, mu.cdf(t), 4 * se(mu.cdf(t), n)) << t;
  }
}

TEST(RtpTree, UpperLevelsSharedAcrossDepths) {
  const auto rho = UnivariateSolution::rho();
  const auto a = sample_rtp(4, rho, Side::y, 31, 7);
  const auto b = sample_rtp(9, rho, Side::y, 31, 7);
  for (std::size_t i = 0; i < a.size() && a.level[i] < 4; ++i) {
    EXPECT_EQ(a.tau[i], b.tau[i]);
    EXPECT_EQ(a.kappa[i], b.kappa[i]);
  }
}

TEST(Percolation, ExactLawDecreasesInDepthTowardLimit) {
  const auto rho = UnivariateSolution::rho();
  const auto mu = make_general_solution({{0.5, 0.25}});
  for (double t : {0.25, 0.45, 0.75}) {
    for (const auto *m : {&rho, &mu}) {
      double prev = 1.0;
      for (int n = 0; n <= 400; ++n) {
        const double v = percolation_cdf_exact(*m, n, t);
        EXPECT_LE(v, prev + 1e-15);
        EXPECT_GE(v, percolation_cdf_limit(*m, t) - 1e-12);
        prev = v;
      }
      // critical offspring law whenever F = t - F, so only O(1/n) convergence
      EXPECT_NEAR(prev, percolation_cdf_limit(*m, t), 1e-2);
    }
  }
  EXPECT_NEAR(percolation_cdf_limit(mu, 0.45), 0.325, 1e-15);
  EXPECT_NEAR(mu.cdf(0.45), 0.125, 1e-15);
  // t = 0 gives a critical binary law, so the value vanishes only as n grows
  EXPECT_NEAR(percolation_cdf_exact(rho, 10, 0.0), galton_watson_survival({0.5, 0.0, 0.5}, 10), 1e-15);
  EXPECT_LT(percolation_cdf_exact(rho, 100000, 0.0), 1e-4);
}

TEST(Percolation, MonteCarloMatchesExactDepthLaw) {
  const auto rho = UnivariateSolution::rho();
  const auto mu = make_general_solution({{0.5, 0.25}});
  const std::uint64_t n = 20000;
  for (const auto *m : {&rho, &mu}) {
    const auto rows = percolation_cdf_estimate(*m, 8, n, {0.0, 0.25, 0.45, 0.6, 0.75}, 41, 0);
    for (const auto &row : rows) {
      EXPECT_NEAR(row.estimate.mean, row.exact_depth_n, 4 * std::max(row.estimate.std_err, 1e-4)) << row.t;
    }
  }
}

TEST(Mbbt, StructureAndFieldLaws) {
  double lifetimes = 0, nodes = 0, branching = 0;
  std::vector<double> pop(7, 0.0);
  const int trees = 2000;
  for (int k = 0; k < trees; ++k) {
    const auto m = sample_mbbt(6, 51, k);
    for (std::size_t i = 0; i < m.size(); ++i) {
      pop[static_cast<std::size_t>(m.generation[i])] += 1;
      if (m.parent[i] != MbbtSample::none) {
        EXPECT_EQ(m.birth[i], m.death[static_cast<std::size_t>(m.parent[i])]);
        EXPECT_EQ(m.generation[i], m.generation[static_cast<std::size_t>(m.parent[i])] + 1);
      }
      EXPECT_EQ(m.death[i], m.birth[i] + m.lifetime[i]);
      if (m.generation[i] < 6) {
        EXPECT_EQ(m.child2[i] != MbbtSample::none, m.kappa[i] == Kappa::branching);
        lifetimes += m.lifetime[i];
        branching += m.kappa[i] == Kappa::branching ? 1 : 0;
        nodes += 1;
      }
    }
  }
  EXPECT_NEAR(lifetimes / nodes, 0.5, 4 * 0.5 / std::sqrt(nodes));
  EXPECT_NEAR(branching / nodes, 0.5, 4 * 0.5 / std::sqrt(nodes));
  // offspring 1 or 2 with equal odds: mean 1.5, variance 1/4
  const double var6 = 0.25 * std::pow(1.5, 5) * (std::pow(1.5, 6) - 1) / 0.5;
  EXPECT_NEAR(pop[6] / trees, std::pow(1.5, 6), 4 * std::sqrt(var6 / trees));
}

TEST(Mbbt, SurvivalProbability) {
  EXPECT_EQ(survival_probability_estimate(1.0, 50, 2000, 61).mean, 1.0);
  EXPECT_LT(survival_probability_estimate(0.0, 200, 20000, 62).mean, 0.03);
  for (double t : {0.25, 0.5, 0.75}) {
    const auto est = survival_probability_estimate(t, 200, 20000, 63);
    EXPECT_NEAR(est.mean, t, 4 * est.std_err) << t;
  }
  EXPECT_THROW(survival_probability_estimate(1.5, 10, 10, 1), DomainError);
}

TEST(Mbbt, TruncationBiasShrinksWithDepth) {
  const auto shallow = survival_probability_estimate(0.5, 5, 40000, 64);
  const auto deep = survival_probability_estimate(0.5, 100, 40000, 64);
  EXPECT_GT(shallow.mean, deep.mean + 5 * shallow.std_err);
}

TEST(Mbbt, ScaleInvariance) {
  const auto res = scale_invariance_test(0.5, 20000, 71, 60, 0.5, 0);
  EXPECT_NEAR(res.survival.mean, 0.5, 4 * res.survival.std_err);
  EXPECT_GT(res.kept, 5000u);
  EXPECT_GT(res.branch_height.p_value, 0.001);
  EXPECT_GT(res.marks_below.p_value, 0.001);
  EXPECT_GT(res.mark_values.p_value, 0.001);
  const auto one = scale_invariance_test(1.0, 2000, 72, 40, 0.5, 0);
  EXPECT_EQ(one.survival.mean, 1.0);
}

TEST(Offspring, ConditionedLaw) {
  const auto rho = UnivariateSolution::rho();
  const auto law = unburnt_offspring_law(0.5, 0.25);
  EXPECT_NEAR(law[0], 0.375, 1e-15);
  EXPECT_NEAR(law[1], 0.25, 1e-15);
  EXPECT_NEAR(law[2], 0.375, 1e-15);
  const auto zero = unburnt_offspring_law(0.0, 0.0);
  EXPECT_EQ(zero, (std::vector<double>{0.5, 0.0, 0.5}));

  const auto res = open_component_offspring_test(0.5, rho, 20000, 81, 6, 0);
  EXPECT_EQ(res.counts[0] + res.counts[1] + res.counts[2], 20000u);
  EXPECT_GT(res.chi_square.p_value, 0.01);
  const double mean = (res.counts[1] + 2.0 * res.counts[2]) / 20000.0;
  EXPECT_NEAR(mean, 0.25 + 0.75, 0.03);

  const auto at_zero = open_component_offspring_test(0.0, rho, 5000, 84, 6, 0);
  EXPECT_EQ(at_zero.counts[1], 0u);
  EXPECT_GT(at_zero.chi_square.p_value, 0.01);
  EXPECT_THROW(open_component_offspring_test(0.5, rho, 1000, 83, 6, 0, 100), InsufficientDataError);
}

TEST(Coupling, BlockingRunSetsActivationTime) {
  const auto y = y_tree(2, {1, 2}, {0.3, 0.0}, {F(0.6), F(0.9)});
  const std::vector<double> aux{-0.5};
  const auto x = couple_rtp_y_to_x(y, aux, 1);
  EXPECT_NEAR(x.tau[0], 1.0 / 1.7, 1e-15);
  EXPECT_EQ(x.value[1], h_map(F(0.6)));
  EXPECT_EQ(x.value[2], h_map(F(0.9)));
  EXPECT_EQ(x.value[0], h_map(y.value[0]));
  EXPECT_TRUE(satisfies_recursion(x));
}

TEST(Coupling, LongestRunMarkWins) {
  const auto y = y_tree(3, {1, 1, 2}, {0.3, 0.45, 0.0}, {F(0.6), F(0.9)});
  const auto x = couple_rtp_y_to_x(y, std::vector<double>{-0.5}, 1);
  EXPECT_NEAR(x.tau[0], 1.0 / 1.55, 1e-15);
  EXPECT_TRUE(satisfies_recursion(x));
}

TEST(Coupling, EmptyRunUsesAuxiliaryTime) {
  const auto y = y_tree(1, {2}, {0.0}, {F(0.6), F(0.9)});
  const auto x = couple_rtp_y_to_x(y, std::vector<double>{-0.4}, 1);
  EXPECT_NEAR(x.tau[0], 0.3, 1e-15);
  EXPECT_TRUE(satisfies_recursion(x));
}

TEST(Coupling, InsufficientDepth) {
  const auto y = y_tree(1, {1}, {0.3}, {F(0.6)});
  EXPECT_THROW(couple_rtp_y_to_x(y, std::vector<double>{-0.4}, 1), InsufficientDepthError);
  const auto x_side = sample_rtp(2, UnivariateSolution::nu(), Side::x, 1);
  EXPECT_THROW(couple_rtp_y_to_x(x_side, std::vector<double>{-0.4}, 1), ValidationError);
}

TEST(Coupling, StatisticalCheck) {
  const auto res = couple_check(5, 1000, 91, 0);
  EXPECT_TRUE(res.recursion_exact);
  EXPECT_EQ(res.tau_bar.size(), 1000u * 31u);
  const auto tau = ks_one_sample(res.tau_bar, [](double u) { return u; });
  EXPECT_GT(tau.p_value, 0.01);
  const auto root = ks_one_sample(res.root_values, [](double u) { return XSideUnionCdf::marginal(u); }, 0.5);
  EXPECT_GT(root.p_value, 0.01);
}

TEST(Endogeny, LazyEvaluatorMatchesFullRecursion) {
  const auto rho = UnivariateSolution::rho();
  const auto mu = make_general_solution({{0.3, 0.1}, {0.8, 0.15}});
  for (int k = 0; k < 300; ++k) {
    for (std::uint64_t stream : {0u, 1u}) {
      EXPECT_EQ(lazy_root_value(rho, 10, 101, k, stream), sample_rtp(10, rho, Side::y, 101, k, stream).value[0]);
      EXPECT_EQ(lazy_root_value(mu, 10, 102, k, stream), sample_rtp(10, mu, Side::y, 102, k, stream).value[0]);
    }
  }
}

TEST(Endogeny, DepthZeroAgreementIsQuarter) {
  const auto res = endogeny_gap_mc(0, 100000, 111, default_probes(), default_probes(), 0);
  EXPECT_NEAR(res.p_equal().mean, 0.25, 4 * res.p_equal().std_err);
  EXPECT_EQ(res.equal, res.both_infinite);
  // independent rho coordinates: rectangle mass r s / 4
  for (std::size_t a = 0; a < res.r.size(); ++a)
    for (std::size_t b = 0; b < res.s.size(); ++b) {
      const auto e = res.rectangle(a, b);
      EXPECT_NEAR(e.mean, 0.25 * res.r[a] * res.s[b], 4 * e.std_err);
    }
}

TEST(Endogeny, MatchesGridIterationAtFiniteDepth) {
  for (int depth : {3, 6}) {
    const auto mc = endogeny_gap_mc(depth, 100000, 121 + depth, default_probes(), default_probes(), 0);
    const auto grid = iterate_bivariate(BivariateUnionCdf::product(513), depth, 0.0, 0).grid;
    for (std::size_t a = 0; a < mc.r.size(); ++a)
      for (std::size_t b = 0; b < mc.s.size(); ++b) {
        const auto e = mc.rectangle(a, b);
        EXPECT_NEAR(e.mean, grid.rectangle_mass(mc.r[a], mc.s[b]), 4 * e.std_err) << depth << " " << a << " " << b;
      }
  }
}

TEST(Endogeny, ThreadCountDoesNotChangeCounts) {
  const auto a = endogeny_gap_mc(10, 5000, 131, default_probes(), default_probes(), 1);
  const auto b = endogeny_gap_mc(10, 5000, 131, default_probes(), default_probes(), 6);
  EXPECT_EQ(a.rect_counts, b.rect_counts);
  EXPECT_EQ(a.equal, b.equal);
  EXPECT_EQ(a.visits, b.visits);
  const auto rho = UnivariateSolution::rho();
  const auto p1 = percolation_cdf_estimate(rho, 6, 3000, {0.3, 0.7}, 5, 1);
  const auto p2 = percolation_cdf_estimate(rho, 6, 3000, {0.3, 0.7}, 5, 5);
  for (std::size_t k = 0; k < p1.size(); ++k) EXPECT_EQ(p1[k].estimate.mean, p2[k].estimate.mean);
}

TEST(Endogeny, BudgetExceeded) {
  EXPECT_THROW(endogeny_gap_mc(40, 10, 141, default_probes(), default_probes(), 1, 100), BudgetExceededError);
}

TEST(Endogeny, InverseDepthFitRecoversLimit) {
  const std::vector<int> depths{6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<double> v, e;
  for (int n : depths) {
    v.push_back(0.56 + 0.3 / n - 0.8 / (n * n));
    e.push_back(0.001);
  }
  const auto fit = fit_inverse_depth(depths, v, e);
  EXPECT_NEAR(fit.limit, 0.56, 1e-12);
  EXPECT_NEAR(fit.coefficients[1], 0.3, 1e-10);
  EXPECT_GT(fit.std_err, 0.0);
  EXPECT_THROW(fit_inverse_depth({4, 5}, {0.1, 0.2}), ValidationError);
}

TEST(Skeletal, FlowsAgree) {
  for (double t : {0.3, 0.5, 1.0}) EXPECT_LT(skeletal_ode_check(t, 10.0, 0.3), 1e-8) << t;
  EXPECT_LT(skeletal_ode_check(1.0, 10.0, 0.7), 1e-10);
  EXPECT_EQ(skeletal_ode_check(0.5, 10.0, 0.0), 0.0);
  EXPECT_THROW(skeletal_ode_check(0.0, 1.0, 0.5), DomainError);
}

TEST(Rng, KeyedDrawsAreStableAndDistinct) {
  const KeyedRng a(1, 2), b(1, 3);
  EXPECT_EQ(a.bits(NodeKey::root(), 1), KeyedRng(1, 2).bits(NodeKey::root(), 1));
  EXPECT_NE(a.bits(NodeKey::root(), 1), b.bits(NodeKey::root(), 1));
  EXPECT_NE(a.bits(NodeKey::root().child(1), 1), a.bits(NodeKey::root().child(2), 1));
  double sum = 0;
  NodeKey key = NodeKey::root();
  for (int k = 0; k < 100000; ++k) {
    const double u = a.uniform(key, Stream::tau);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    key = key.child(k % 2 + 1);
  }
  EXPECT_NEAR(sum / 100000, 0.5, 4 * std::sqrt(1.0 / 12 / 100000));
}

TEST(Endogeny, InverseDepthFitOnGridValues) {
  std::vector<int> depths;
  std::vector<double> values;
  iterate_bivariate(BivariateUnionCdf::product(513), 20, 0.0, 0, [&](int k, const BivariateUnionCdf &g, double) {
    if (k >= 6 && k % 2 == 0) {
      depths.push_back(k);
      values.push_back(g(g.n() - 1, g.n() - 1));
    }
  });
  const auto fit = fit_inverse_depth(depths, values);
  EXPECT_NEAR(fit.limit, fc_at_one(c2()), 2e-4);
}

// Pathwise monotonicity under extension fails (fresh boundaries refreeze old levels); the law is monotone.
TEST(Percolation, TruncationMonotoneInLawNotPathwise) {
  const auto rho = UnivariateSolution::rho();
  const int trees = 20000;
  int violations = 0;
  double hits_n = 0, hits_n1 = 0;
  for (int k = 0; k < trees; ++k) {
    const auto a = percolation_time_depth_n(sample_rtp(6, rho, Side::y, 151, k));
    const auto b = percolation_time_depth_n(sample_rtp(7, rho, Side::y, 151, k));
    if (b < a) ++violations;
    hits_n += exceeds(a, 0.5) ? 0 : 1;
    hits_n1 += exceeds(b, 0.5) ? 0 : 1;
  }
  RecordProperty("pathwise_violation_rate", std::to_string(violations / double(trees)));
  EXPECT_GT(violations, 0);
  const double pa = hits_n / trees, pb = hits_n1 / trees;
  EXPECT_NEAR(pa, percolation_cdf_exact(rho, 6, 0.5), 4 * se(pa, trees));
  EXPECT_NEAR(pb, percolation_cdf_exact(rho, 7, 0.5), 4 * se(pb, trees));
  EXPECT_LT(percolation_cdf_exact(rho, 7, 0.5), percolation_cdf_exact(rho, 6, 0.5));
}
