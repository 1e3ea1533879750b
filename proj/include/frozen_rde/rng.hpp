#ifndef FROZEN_RDE_RNG_HPP
#define FROZEN_RDE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace frozen_rde {

/** splitmix64 finalizer. */
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Stream : std::uint64_t {
  tau = 1,
  kappa = 2,
  lifetime = 3,
  tilde_tau = 4,
  boundary = 16, ///< boundary draw k uses boundary + k
};

inline constexpr std::uint64_t stream_tag(Stream s, std::uint64_t offset = 0) {
  return static_cast<std::uint64_t>(s) + offset;
}

/** Address of a node inside an (unbounded) binary tree; children hash the parent key. */
struct NodeKey {
  std::uint64_t value = 1;

  static constexpr NodeKey root() { return NodeKey{1}; }
  constexpr NodeKey child(int j) const { return NodeKey{mix64(2 * value + static_cast<std::uint64_t>(j))}; }
};

/**
 * Counter-based randomness: every draw is a pure function of (seed, tree, node, stream),
 * so results do not depend on evaluation order or thread count.
 */
class KeyedRng {
public:
  constexpr KeyedRng(std::uint64_t seed, std::uint64_t tree) : base_(mix64(mix64(seed) ^ tree)) {}

  constexpr std::uint64_t bits(NodeKey node, std::uint64_t tag) const { return mix64(mix64(base_ ^ node.value) ^ tag); }

  /** Uniform on (0,1). */
  constexpr double uniform(NodeKey node, std::uint64_t tag) const {
    return (static_cast<double>(bits(node, tag) >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(NodeKey node, Stream s, std::uint64_t offset = 0) const { return uniform(node, stream_tag(s, offset)); }

private:
  std::uint64_t base_;
};

} // namespace frozen_rde

#endif // FROZEN_RDE_RNG_HPP
