#include "gibbsnls/random_stream.hpp"

#include <cmath>
#include <numbers>

namespace gibbsnls {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::uint64_t key) {
  auto k0 = static_cast<std::uint32_t>(key);
  auto k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

std::array<double, 2> uniform_pair(const StreamKey& key) {
  const auto out = philox4x32({static_cast<std::uint32_t>(key.sample),
                               static_cast<std::uint32_t>(key.sample >> 32), key.index,
                               static_cast<std::uint32_t>(key.tag)},
                              key.seed);
  const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  return {to_open_unit(a), to_open_unit(b)};
}

std::array<double, 2> normal_pair(const StreamKey& key) {
  const auto [u1, u2] = uniform_pair(key);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t sample, std::uint32_t mode) {
  const auto [h, l] = normal_pair({seed, sample, mode, StreamTag::kModeGaussian});
  return {h * std::numbers::sqrt2 * 0.5, l * std::numbers::sqrt2 * 0.5};
}

double CounterStream::uniform() {
  if (has_cached_) {
    has_cached_ = false;
    return cache_[1];
  }
  cache_ = uniform_pair({seed_, sample_, index_++, tag_});
  has_cached_ = true;
  return cache_[0];
}

std::uint64_t CounterStream::below(std::uint64_t bound) {
  const auto u = uniform();
  const auto k = static_cast<std::uint64_t>(u * static_cast<double>(bound));
  return k < bound ? k : bound - 1;
}

}  // namespace gibbsnls
