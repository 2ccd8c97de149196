#pragma once

#include <cstdint>
#include <random>

#include "psgla/types.h"

namespace psgla {

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed for chain (or replicate) `index` of a run with master seed `master`:
// mix64(mix64(master) ^ index). Depends only on the pair, so chain i sees the same
// stream regardless of how many chains run or in which order.
std::uint64_t chain_seed(std::uint64_t master, std::uint64_t index);

// Independent sub-stream of a master seed, used to separate purposes inside one
// experiment (ground truth, bootstrap, checkpoint k, ...).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Named sub-streams.
namespace streams {
inline constexpr std::uint64_t kGroundTruth = 1;
inline constexpr std::uint64_t kBootstrap = 2;
inline constexpr std::uint64_t kCheckpointBase = 100;
inline constexpr std::uint64_t kCoupling = 3;
inline constexpr std::uint64_t kSubsample = 4;
inline constexpr std::uint64_t kDirections = 5;
inline constexpr std::uint64_t kInitial = 6;
inline constexpr std::uint64_t kNullBatch = 7;
}  // namespace streams

// A seeded stream of uniforms and standard normals owned by one chain.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(Eigen::Ref<Vector> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
  }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace psgla
