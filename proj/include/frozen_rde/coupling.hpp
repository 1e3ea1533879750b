#ifndef FROZEN_RDE_COUPLING_HPP
#define FROZEN_RDE_COUPLING_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "node_maps.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "rtp_tree.hpp"

namespace frozen_rde {

class InsufficientDepthError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * Builds a depth_x binary-tree RTP from a y-side tree. Binary node i maps to the MBBT node
 * psi(i): the root to the root, and the children of i to the children of the first branch
 * point at or below psi(i). The activation time of i is h_ext of the largest mark on the
 * blocking run from psi(i) to that branch point, or of tilde_tau[i] if the run is empty.
 * Values are h_map(Y) at psi(i). tilde_tau is indexed in level order, size >= 2^depth_x - 1.
 */
inline TruncatedTreeSample couple_rtp_y_to_x(const TruncatedTreeSample &y, std::span<const double> tilde_tau,
                                             int depth_x) {
  if (y.side != Side::y) throw ValidationError("couple_rtp_y_to_x needs a y-side tree");
  if (depth_x < 0 || depth_x > 24) throw DomainError("couple_rtp_y_to_x: depth_x out of range");
  const std::size_t interior = (std::size_t{1} << depth_x) - 1;
  const std::size_t total = (std::size_t{1} << (depth_x + 1)) - 1;
  if (tilde_tau.size() < interior) throw ValidationError("not enough auxiliary uniforms");

  TruncatedTreeSample x;
  x.side = Side::x;
  x.depth = depth_x;
  x.tau.assign(total, std::numeric_limits<double>::quiet_NaN());
  x.child1.assign(total, TruncatedTreeSample::none);
  x.child2.assign(total, TruncatedTreeSample::none);
  x.level.assign(total, 0);
  x.value.assign(total, kInfinity);
  x.frozen.assign(total, 0);

  std::vector<std::int32_t> psi(total, TruncatedTreeSample::none);
  psi[0] = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (i > 0) x.level[i] = x.level[(i - 1) / 2] + 1;
    const auto p = static_cast<std::size_t>(psi[i]);
    x.value[i] = h_map(y.value[p]);
    if (i >= interior) continue;
    std::size_t q = p;
    int run = 0;
    double sigma = 0.0;
    while (true) {
      if (y.is_boundary(q)) throw InsufficientDepthError("y-tree truncated inside a blocking run");
      if (y.kappa[q] == Kappa::branching) break;
      sigma = run == 0 ? y.tau[q] : std::max(sigma, y.tau[q]);
      ++run;
      q = static_cast<std::size_t>(y.child1[q]);
    }
    if (run == 0) sigma = tilde_tau[i];
    x.tau[i] = h_ext(sigma);
    x.child1[i] = static_cast<std::int32_t>(2 * i + 1);
    x.child2[i] = static_cast<std::int32_t>(2 * i + 2);
    psi[2 * i + 1] = y.child1[q];
    psi[2 * i + 2] = y.child2[q];
  }
  for (std::size_t i = 0; i < interior; ++i) x.frozen[i] = x.compute_frozen(i) ? 1 : 0;
  return x;
}

/** Whether every interior node's stored value equals the node map of its children's values. */
inline bool satisfies_recursion(const TruncatedTreeSample &t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.is_boundary(i)) continue;
    if (!(t.recompute(i) == t.value[i])) return false;
  }
  return true;
}

struct CouplingCheck {
  std::uint64_t trees = 0;
  std::uint64_t retries = 0; ///< trees that needed a deeper y-tree
  bool recursion_exact = true;
  std::vector<double> tau_bar;     ///< activation times of all interior binary nodes
  std::vector<double> root_values; ///< +inf for infinity
};

/**
 * Couples `trees` independent y-side rho trees of depth 4*depth_x to binary trees. A tree whose
 * blocking run hits the truncation is rebuilt from the same keys four levels deeper.
 */
inline CouplingCheck couple_check(int depth_x, std::uint64_t trees, std::uint64_t seed, unsigned threads = 0) {
  const UnivariateSolution rho = UnivariateSolution::rho();
  const std::size_t interior = (std::size_t{1} << depth_x) - 1;
  struct Part {
    std::uint64_t retries = 0;
    bool exact = true;
    std::vector<double> tau_bar, roots;
  };
  const auto blocks = map_blocks(trees, 64, threads, [&](std::size_t begin, std::size_t end) {
    Part p;
    for (std::size_t k = begin; k < end; ++k) {
      const KeyedRng rng(seed, k);
      std::vector<double> aux(interior);
      for (std::size_t i = 0; i < interior; ++i) aux[i] = -rng.uniform(NodeKey{i + 1}, Stream::tilde_tau);
      int depth_y = 4 * depth_x;
      while (true) {
        try {
          const auto y = sample_rtp(depth_y, rho, Side::y, seed, k);
          const auto x = couple_rtp_y_to_x(y, aux, depth_x);
          p.exact = p.exact && satisfies_recursion(x);
          for (std::size_t i = 0; i < interior; ++i) p.tau_bar.push_back(x.tau[i]);
          p.roots.push_back(x.value[0].value_or(std::numeric_limits<double>::infinity()));
          break;
        } catch (const InsufficientDepthError &) {
          ++p.retries;
          depth_y += 4;
        }
      }
    }
    return p;
  });
  CouplingCheck out;
  out.trees = trees;
  for (const auto &p : blocks) {
    out.retries += p.retries;
    out.recursion_exact = out.recursion_exact && p.exact;
    out.tau_bar.insert(out.tau_bar.end(), p.tau_bar.begin(), p.tau_bar.end());
    out.root_values.insert(out.root_values.end(), p.roots.begin(), p.roots.end());
  }
  return out;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_COUPLING_HPP
