#ifndef FROZEN_RDE_RTP_TREE_HPP
#define FROZEN_RDE_RTP_TREE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ext_time.hpp"
#include "node_maps.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "univariate.hpp"

namespace frozen_rde {

/** x: binary tree with map gamma; y: MBBT encoding with map chi. */
enum class Side { x, y };

/**
 * Depth-n tree in breadth-first order (parents precede children). x-side trees are full
 * binary trees, so node i has children 2i+1, 2i+2. y-side trees hold only the realized
 * subtree: a blocking node has a single child. Nodes at level `depth` are boundary nodes.
 */
struct TruncatedTreeSample {
  static constexpr std::int32_t none = -1;

  Side side = Side::x;
  int depth = 0;
  std::vector<double> tau; ///< NaN on boundary nodes
  std::vector<Kappa> kappa; ///< y-side only
  std::vector<std::int32_t> child1;
  std::vector<std::int32_t> child2;
  std::vector<int> level;
  std::vector<ExtTime> value;
  std::vector<unsigned char> frozen;

  std::size_t size() const { return value.size(); }
  bool is_boundary(std::size_t i) const { return level[i] == depth; }

  /** Node map applied to the stored child values. */
  ExtTime recompute(std::size_t i) const {
    const ExtTime a = value[static_cast<std::size_t>(child1[i])];
    if (side == Side::x) return gamma(tau[i], a, value[static_cast<std::size_t>(child2[i])]);
    const ExtTime b = child2[i] == none ? kInfinity : value[static_cast<std::size_t>(child2[i])];
    return chi(tau[i], kappa[i], a, b);
  }

  bool compute_frozen(std::size_t i) const {
    if (is_boundary(i)) return false;
    const ExtTime a = value[static_cast<std::size_t>(child1[i])];
    if (side == Side::x) {
      const ExtTime m = min(a, value[static_cast<std::size_t>(child2[i])]);
      return !exceeds(m, tau[i]);
    }
    return kappa[i] == Kappa::blocking && !exceeds(a, tau[i]);
  }

  /** Fills values and frozen flags bottom-up from the boundary values. */
  void evaluate() {
    for (std::size_t k = size(); k-- > 0;) {
      if (is_boundary(k)) continue;
      value[k] = recompute(k);
      frozen[k] = compute_frozen(k) ? 1 : 0;
    }
  }
};

inline void check_side(const UnivariateSolution &mu, Side side) {
  const Scale want = side == Side::x ? Scale::binary : Scale::mbbt;
  if (mu.scale() != want) throw ValidationError("measure scale does not match the tree side");
}

/**
 * Samples a depth-n RTP: node randomness and boundary draws are keyed by (seed, tree_id,
 * node key), so trees of different depths with the same seed share their upper levels.
 * `boundary_stream` selects an independent family of boundary draws.
 */
inline TruncatedTreeSample sample_rtp(int depth, const UnivariateSolution &mu, Side side, std::uint64_t seed,
                                      std::uint64_t tree_id = 0, std::uint64_t boundary_stream = 0) {
  if (depth < 0) throw DomainError("sample_rtp: negative depth");
  check_side(mu, side);
  const KeyedRng rng(seed, tree_id);
  TruncatedTreeSample t;
  t.side = side;
  t.depth = depth;
  std::vector<NodeKey> keys{NodeKey::root()};
  t.level.push_back(0);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const NodeKey key = keys[k];
    const int lvl = t.level[k];
    if (lvl == depth) {
      t.tau.push_back(std::numeric_limits<double>::quiet_NaN());
      if (side == Side::y) t.kappa.push_back(Kappa::branching);
      t.child1.push_back(TruncatedTreeSample::none);
      t.child2.push_back(TruncatedTreeSample::none);
      t.value.push_back(mu.quantile(rng.uniform(key, Stream::boundary, boundary_stream)));
      continue;
    }
    t.tau.push_back(rng.uniform(key, Stream::tau));
    bool two = true;
    if (side == Side::y) {
      two = rng.uniform(key, Stream::kappa) >= 0.5;
      t.kappa.push_back(two ? Kappa::branching : Kappa::blocking);
    }
    t.value.push_back(kInfinity);
    t.child1.push_back(static_cast<std::int32_t>(keys.size()));
    keys.push_back(key.child(1));
    t.level.push_back(lvl + 1);
    if (two) {
      t.child2.push_back(static_cast<std::int32_t>(keys.size()));
      keys.push_back(key.child(2));
      t.level.push_back(lvl + 1);
    } else {
      t.child2.push_back(TruncatedTreeSample::none);
    }
  }
  t.frozen.assign(t.size(), 0);
  t.evaluate();
  return t;
}

/**
 * Depth-n percolation time: min over root-to-boundary paths of the max effective time along
 * the path. Frozen nodes count as infinity, y-side branch points as 0, other nodes as tau.
 */
inline ExtTime percolation_time_depth_n(const TruncatedTreeSample &t) {
  std::vector<ExtTime> best(t.size(), ExtTime::finite(0.0));
  for (std::size_t k = t.size(); k-- > 0;) {
    if (t.is_boundary(k)) continue;
    ExtTime own;
    if (t.frozen[k]) {
      own = kInfinity;
    } else if (t.side == Side::y && t.kappa[k] == Kappa::branching) {
      own = ExtTime::finite(0.0);
    } else {
      own = ExtTime::finite(t.tau[k]);
    }
    ExtTime below = best[static_cast<std::size_t>(t.child1[k])];
    if (t.child2[k] != TruncatedTreeSample::none) below = min(below, best[static_cast<std::size_t>(t.child2[k])]);
    best[k] = max(own, below);
  }
  return best[0];
}

/** Offspring law of an unburnt node in the open cluster at time t: P[0], P[1], P[2]. */
inline std::vector<double> unburnt_offspring_law(double t, double F) {
  return {0.5 * (1.0 - t + F), 0.5 * t, 0.5 * (1.0 - F)};
}

/** P[a Galton-Watson process with the given offspring law has generation-n individuals]. */
inline double galton_watson_survival(const std::vector<double> &law, int generations) {
  double s = 1.0;
  for (int k = 0; k < generations; ++k) {
    const double q = 1.0 - s;
    s = 1.0 - (law[0] + law[1] * q + law[2] * q * q);
  }
  return s;
}

/** Exact P[Y_up_n <= t] for the depth-n tree: F(t) + (1 - F(t)) s_n(t). */
inline double percolation_cdf_exact(const UnivariateSolution &mu, int depth, double t) {
  const double F = mu.cdf(t);
  return F + (1.0 - F) * galton_watson_survival(unburnt_offspring_law(t, F), depth);
}

/** Depth-infinity limit F(t) v (t - F(t)). */
inline double percolation_cdf_limit(const UnivariateSolution &mu, double t) {
  const double F = mu.cdf(t);
  return std::max(F, t - F);
}

struct PercolationRow {
  double t;
  Estimate estimate;
  double exact_depth_n;
  double target;
};

/** Monte Carlo P[Y_up_n <= t] over independent y-side trees. */
inline std::vector<PercolationRow> percolation_cdf_estimate(const UnivariateSolution &mu, int depth,
                                                            std::uint64_t samples, const std::vector<double> &t_grid,
                                                            std::uint64_t seed, unsigned threads = 0) {
  check_side(mu, Side::y);
  using Counts = std::vector<std::uint64_t>;
  const auto blocks = map_blocks(samples, 256, threads, [&](std::size_t begin, std::size_t end) {
    Counts c(t_grid.size(), 0);
    for (std::size_t s = begin; s < end; ++s) {
      const auto tree = sample_rtp(depth, mu, Side::y, seed, s);
      const ExtTime up = percolation_time_depth_n(tree);
      for (std::size_t k = 0; k < t_grid.size(); ++k)
        if (!exceeds(up, t_grid[k])) ++c[k];
    }
    return c;
  });
  Counts total(t_grid.size(), 0);
  for (const auto &b : blocks)
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += b[k];
  std::vector<PercolationRow> rows;
  for (std::size_t k = 0; k < t_grid.size(); ++k)
    rows.push_back({t_grid[k], binomial_estimate(total[k], samples), percolation_cdf_exact(mu, depth, t_grid[k]),
                    percolation_cdf_limit(mu, t_grid[k])});
  return rows;
}

class InsufficientDataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct OffspringTestResult {
  std::vector<std::uint64_t> counts; ///< offspring 0, 1, 2
  std::vector<double> expected;      ///< probabilities
  std::uint64_t trees_drawn = 0;
  ChiSquareResult chi_square;
};

/**
 * Offspring of the root in the open cluster at time t, conditioned on the root being
 * unburnt (Y > t), from y-side trees of the given depth. Uses the first `samples`
 * conditioned trees in tree-id order.
 */
inline OffspringTestResult open_component_offspring_test(double t, const UnivariateSolution &mu, std::uint64_t samples,
                                                         std::uint64_t seed, int depth = 6, unsigned threads = 0,
                                                         std::uint64_t max_trees = 0) {
  check_side(mu, Side::y);
  if (max_trees == 0) max_trees = 100 * samples + 1000;
  OffspringTestResult res;
  res.counts.assign(3, 0);
  res.expected = unburnt_offspring_law(t, mu.cdf(t));
  std::uint64_t conditioned = 0;
  std::uint64_t next = 0;
  const std::uint64_t batch = 1u << 14;
  while (conditioned < samples) {
    if (next >= max_trees) throw InsufficientDataError("too few trees with an unburnt root");
    const std::uint64_t n = std::min(batch, max_trees - next);
    // -1 when the root is burnt by time t, else its offspring count
    const auto blocks = map_blocks(n, 512, threads, [&](std::size_t begin, std::size_t end) {
      std::vector<signed char> out;
      for (std::size_t s = begin; s < end; ++s) {
        const auto tree = sample_rtp(depth, mu, Side::y, seed, next + s);
        if (!exceeds(tree.value[0], t) || depth == 0) {
          out.push_back(-1);
          continue;
        }
        if (tree.kappa[0] == Kappa::branching) {
          out.push_back(2);
        } else {
          const ExtTime child = tree.value[static_cast<std::size_t>(tree.child1[0])];
          out.push_back(tree.tau[0] <= t && exceeds(child, t) ? 1 : 0);
        }
      }
      return out;
    });
    for (const auto &b : blocks)
      for (signed char o : b) {
        if (o < 0 || conditioned >= samples) continue;
        ++res.counts[static_cast<std::size_t>(o)];
        ++conditioned;
      }
    next += n;
  }
  res.trees_drawn = next;
  res.chi_square = chi_square_test(res.counts, res.expected);
  return res;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_RTP_TREE_HPP
