#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace auxabc {

// Purpose tags keep the key spaces of different random consumers disjoint.
enum class StreamTag : std::uint64_t {
  observed = 1,    // synthetic "real-world" data
  proposal = 2,    // prior draws, resampling and perturbation
  simulation = 3,  // trajectories simulated for a particle
  predictive = 4,  // posterior predictive draws
  reference = 5,   // true-model predictive draws
};

/// Hashes a master seed and a path of indices into a stream key.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Counter-based random stream.
///
/// The n-th output is a pure function of (key, n), so sub-streams can be
/// handed out by index and evaluated in any order or on any thread. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double low, double high) { return low + (high - low) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Independent child stream addressed by `path`.
  RandomStream substream(std::initializer_list<std::uint64_t> path) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline RandomStream make_stream(std::uint64_t seed, StreamTag tag,
                                std::initializer_list<std::uint64_t> path = {}) {
  RandomStream root(derive_key(seed, {static_cast<std::uint64_t>(tag)}));
  return path.size() == 0 ? root : root.substream(path);
}

}  // namespace auxabc
