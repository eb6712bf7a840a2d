#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace hlt {

/// Identifier written into output metadata so a trace can be tied to the
/// exact bit generator that produced it.
inline constexpr std::string_view kRngAlgorithm = "philox4x32-10";

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Stream tags keep the substreams of unrelated consumers disjoint even when
/// they share a seed.
enum class StreamTag : std::uint32_t {
  kTraceSampling = 1,
  kPhaseRandomization = 2,
  kPhaseNoise = 3,
  kPhaseGeneration = 4,
  kTest = 15,
};

// Counter-based stream: key = seed, counter = (index, substream). Every
// (seed, tag, substream) triple gives an independent, reproducible sequence,
// which is what allows chunked parallel generation with fixed output.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t substream);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  double normal();

  /// Exact inversion for moderate means (one uniform per draw); bounded
  /// quantile search beyond that.
  std::int64_t poisson(double mean);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace hlt
