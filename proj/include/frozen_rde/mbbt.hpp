#ifndef FROZEN_RDE_MBBT_HPP
#define FROZEN_RDE_MBBT_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "node_maps.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace frozen_rde {

/** Realized subtree of a marked binary branching tree, cut at a generation, breadth-first. */
struct MbbtSample {
  static constexpr std::int32_t none = -1;

  int max_generation = 0;
  std::vector<double> lifetime; ///< exponential, mean 1/2
  std::vector<double> mark;     ///< uniform on [0,1]
  std::vector<Kappa> kappa;
  std::vector<double> birth;
  std::vector<double> death;
  std::vector<int> generation;
  std::vector<std::int32_t> parent;
  std::vector<std::int32_t> child1;
  std::vector<std::int32_t> child2;

  std::size_t size() const { return lifetime.size(); }
};

namespace detail {

struct MbbtNode {
  double lifetime;
  double mark;
  Kappa kappa;
};

inline MbbtNode mbbt_node(const KeyedRng &rng, NodeKey key) {
  return {-0.5 * std::log(rng.uniform(key, Stream::lifetime)), rng.uniform(key, Stream::tau),
          rng.uniform(key, Stream::kappa) < 0.5 ? Kappa::blocking : Kappa::branching};
}

} // namespace detail

inline MbbtSample sample_mbbt(int max_generation, std::uint64_t seed, std::uint64_t tree_id = 0) {
  if (max_generation < 0) throw DomainError("sample_mbbt: negative generation");
  const KeyedRng rng(seed, tree_id);
  MbbtSample m;
  m.max_generation = max_generation;
  std::vector<NodeKey> keys{NodeKey::root()};
  auto push = [&](NodeKey key, std::int32_t parent, int gen, double birth) {
    const auto node = detail::mbbt_node(rng, key);
    m.lifetime.push_back(node.lifetime);
    m.mark.push_back(node.mark);
    m.kappa.push_back(node.kappa);
    m.birth.push_back(birth);
    m.death.push_back(birth + node.lifetime);
    m.generation.push_back(gen);
    m.parent.push_back(parent);
    m.child1.push_back(MbbtSample::none);
    m.child2.push_back(MbbtSample::none);
  };
  push(keys[0], MbbtSample::none, 0, 0.0);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (m.generation[k] == max_generation) continue;
    const auto self = static_cast<std::int32_t>(k);
    const int gen = m.generation[k] + 1;
    const double d = m.death[k];
    m.child1[k] = static_cast<std::int32_t>(keys.size());
    keys.push_back(keys[k].child(1));
    push(keys.back(), self, gen, d);
    if (m.kappa[k] == Kappa::branching) {
      m.child2[k] = static_cast<std::int32_t>(keys.size());
      keys.push_back(keys[k].child(2));
      push(keys.back(), self, gen, d);
    }
  }
  return m;
}

/**
 * Whether the individual at `key` has a line of descent reaching generation `target` through
 * branch points and blocking points with mark <= t. Depth-first with early exit.
 */
inline bool survives(const KeyedRng &rng, NodeKey key, int gen, int target, double t) {
  if (gen == target) return true;
  const bool branching = rng.uniform(key, Stream::kappa) >= 0.5;
  if (!branching) {
    if (rng.uniform(key, Stream::tau) > t) return false;
    return survives(rng, key.child(1), gen + 1, target, t);
  }
  return survives(rng, key.child(1), gen + 1, target, t) || survives(rng, key.child(2), gen + 1, target, t);
}

/** Fraction of trees whose root survives to `max_generation`; biased upward at finite depth. */
inline Estimate survival_probability_estimate(double t, int max_generation, std::uint64_t samples,
                                              std::uint64_t seed, unsigned threads = 0) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("survival: t outside [0,1]");
  const auto blocks = map_blocks(samples, 1024, threads, [&](std::size_t begin, std::size_t end) {
    std::uint64_t hits = 0;
    for (std::size_t s = begin; s < end; ++s)
      if (survives(KeyedRng(seed, s), NodeKey::root(), 0, max_generation, t)) ++hits;
    return hits;
  });
  std::uint64_t hits = 0;
  for (auto h : blocks) hits += h;
  return binomial_estimate(hits, samples);
}

/** First branch point along a trunk and the marks met before it. */
struct TrunkStats {
  bool valid = false;
  double branch_height = 0.0;
  std::vector<double> mark_heights;
  std::vector<double> marks;
};

/** Trunk of a fresh tree: the chain of blocking points down to the first branch point. */
inline TrunkStats fresh_trunk(const KeyedRng &rng, int max_generation) {
  TrunkStats s;
  NodeKey key = NodeKey::root();
  double height = 0.0;
  for (int gen = 0; gen < max_generation; ++gen) {
    const auto node = detail::mbbt_node(rng, key);
    height += node.lifetime;
    if (node.kappa == Kappa::branching) {
      s.valid = true;
      s.branch_height = height;
      return s;
    }
    s.mark_heights.push_back(height);
    s.marks.push_back(node.mark);
    key = key.child(1);
  }
  return s;
}

/**
 * Trunk of the subtree of points with an open line of descent to generation `max_generation`
 * at time t, assuming the root survives. Branch points with one dead side are passed through.
 */
inline TrunkStats open_trunk(const KeyedRng &rng, int max_generation, double t) {
  TrunkStats s;
  NodeKey key = NodeKey::root();
  double height = 0.0;
  for (int gen = 0; gen < max_generation; ++gen) {
    const auto node = detail::mbbt_node(rng, key);
    height += node.lifetime;
    if (node.kappa == Kappa::blocking) {
      s.mark_heights.push_back(height);
      s.marks.push_back(node.mark);
      key = key.child(1);
      continue;
    }
    const bool left = survives(rng, key.child(1), gen + 1, max_generation, t);
    const bool right = survives(rng, key.child(2), gen + 1, max_generation, t);
    if (left && right) {
      s.valid = true;
      s.branch_height = height;
      return s;
    }
    key = key.child(left ? 1 : 2);
  }
  return s;
}

struct ScaleCheckResult {
  Estimate survival;       ///< P[open subtree nonempty], target t
  std::uint64_t kept = 0;  ///< surviving trees with a resolved first branch point
  KsResult branch_height;  ///< t * height vs fresh height
  KsResult marks_below;    ///< trunk marks below height h/t vs fresh trunk marks below h
  KsResult mark_values;    ///< trunk marks / t vs fresh trunk marks
};

inline ScaleCheckResult scale_invariance_test(double t, std::uint64_t samples, std::uint64_t seed,
                                              int max_generation = 100, double h = 0.5, unsigned threads = 0) {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("scale_invariance_test: t must lie in (0,1]");
  struct Part {
    std::uint64_t survived = 0;
    std::vector<double> heights, counts, marks, fresh_heights, fresh_counts, fresh_marks;
  };
  const std::uint64_t fresh_seed = mix64(seed ^ 0x5ca1eULL);
  const auto blocks = map_blocks(samples, 512, threads, [&](std::size_t begin, std::size_t end) {
    Part p;
    for (std::size_t k = begin; k < end; ++k) {
      const KeyedRng fresh(fresh_seed, k);
      const auto f = fresh_trunk(fresh, max_generation);
      if (f.valid) {
        p.fresh_heights.push_back(f.branch_height);
        double below = 0;
        for (double y : f.mark_heights) below += y <= h ? 1 : 0;
        p.fresh_counts.push_back(below);
        p.fresh_marks.insert(p.fresh_marks.end(), f.marks.begin(), f.marks.end());
      }
      const KeyedRng rng(seed, k);
      if (!survives(rng, NodeKey::root(), 0, max_generation, t)) continue;
      ++p.survived;
      const auto s = open_trunk(rng, max_generation, t);
      if (!s.valid) continue;
      p.heights.push_back(t * s.branch_height);
      double below = 0;
      for (double y : s.mark_heights) below += y <= h / t ? 1 : 0;
      p.counts.push_back(below);
      for (double m : s.marks) p.marks.push_back(m / t);
    }
    return p;
  });
  Part all;
  for (const auto &p : blocks) {
    all.survived += p.survived;
    auto append = [](std::vector<double> &dst, const std::vector<double> &src) {
      dst.insert(dst.end(), src.begin(), src.end());
    };
    append(all.heights, p.heights);
    append(all.counts, p.counts);
    append(all.marks, p.marks);
    append(all.fresh_heights, p.fresh_heights);
    append(all.fresh_counts, p.fresh_counts);
    append(all.fresh_marks, p.fresh_marks);
  }
  ScaleCheckResult res;
  res.survival = binomial_estimate(all.survived, samples);
  res.kept = all.heights.size();
  res.branch_height = ks_two_sample(all.heights, all.fresh_heights);
  res.marks_below = ks_two_sample(all.counts, all.fresh_counts);
  res.mark_values = ks_two_sample(all.marks, all.fresh_marks);
  return res;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_MBBT_HPP
