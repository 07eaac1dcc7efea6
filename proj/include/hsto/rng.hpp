#pragma once

#include <cstdint>
#include <vector>

namespace hsto {

/// Counter-based Gaussian stream: every draw is a pure function of
/// (master seed, path index, step index, draw index), so any Brownian
/// increment can be replayed without storing generator state. Paths never
/// share a stream, and identical (seed, path) give identical draws across
/// experiments, which the continuous-dependence runs rely on.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t path() const { return path_; }
  /// Derived per-path seed, echoed in run outputs.
  std::uint64_t stream_id() const { return base_; }

  /// Standard normal draw, deterministic in (step, idx).
  double normal(std::uint64_t step, std::uint64_t idx) const;

  /// Uniform in (0,1].
  double uniform(std::uint64_t step, std::uint64_t idx) const;

 private:
  std::uint64_t seed_, path_, base_;
};

/// One Euler step's worth of Brownian increments dW_n ~ N(0, dt), n < N.
struct BrownianIncrements {
  std::vector<double> dW;
  double dt = 0.0;
};

/// Samples N i.i.d. increments for the given step. Throws if dt <= 0.
BrownianIncrements sample_increments(const PathStream& stream, std::uint64_t step, int n,
                                     double dt);

/// SplitMix64 finalizer, also used to derive seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace hsto
