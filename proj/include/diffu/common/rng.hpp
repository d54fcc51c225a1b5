#pragma once

#include <array>
#include <cstdint>

namespace diffu {

/// Purpose tags keep streams for different uses of one seed disjoint.
enum class StreamTag : std::uint64_t {
  kSample = 1,
  kProbe = 2,
  kPairs = 3,
  kResidual = 4,
  kInit = 5,
  kBatch = 6,
  kShuffle = 7,
  kReverse = 8,
  kDataset = 9,
  kPermutation = 10,
  kUser = 100,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Philox4x32-10 counter-based generator. A stream is addressed by
/// (seed, tag, index); draws within it are a pure function of the position,
/// so the value used for sample i never depends on which thread computes it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t index);
  CounterRng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double rademacher() { return (next_u32() & 1U) ? 1.0 : -1.0; }
  /// Uniform integer in [0, n). Rejection sampling; unbiased.
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace diffu
