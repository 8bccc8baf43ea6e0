#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace gibbsnls {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::uint64_t key);

/// Tags separate independent uses of the same (seed, sample) key.
enum class StreamTag : std::uint32_t {
  kModeGaussian = 0,
  kAcceptance = 1,
  kResample = 2,
  kProbe = 3,
  kShuffle = 4,
};

/// Counter-based draws: the value depends only on (seed, sample, index, tag),
/// never on call order, so sampling parallelizes without coordination.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
  std::uint32_t index = 0;
  StreamTag tag = StreamTag::kModeGaussian;
};

/// Two uniforms in the open interval (0, 1) with 53-bit resolution.
std::array<double, 2> uniform_pair(const StreamKey& key);

/// Two independent standard normals (Box-Muller on uniform_pair).
std::array<double, 2> normal_pair(const StreamKey& key);

/// Normalized complex Gaussian g = (h + i l)/sqrt(2), E|g|^2 = 1.
std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t sample, std::uint32_t mode);

/// Sequential view over a counter stream; draw k uses index k.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t sample, StreamTag tag)
      : seed_(seed), sample_(sample), tag_(tag) {}

  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t sample_;
  StreamTag tag_;
  std::uint32_t index_ = 0;
  std::array<double, 2> cache_{};
  bool has_cached_ = false;
};

}  // namespace gibbsnls
