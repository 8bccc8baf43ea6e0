#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>

#include "gibbsnls/random_stream.hpp"

using namespace gibbsnls;

TEST_CASE("philox4x32-10 known answers") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, 0) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, 0xffffffffffffffffULL) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, (std::uint64_t{0x299f31d0} << 32) | 0xa4093822) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("draws depend only on the key") {
  const StreamKey k{42, 7, 3, StreamTag::kModeGaussian};
  CHECK(uniform_pair(k) == uniform_pair(k));
  StreamKey other = k;
  other.tag = StreamTag::kAcceptance;
  CHECK(uniform_pair(k) != uniform_pair(other));
  CHECK(complex_gaussian(1, 2, 3) == complex_gaussian(1, 2, 3));
  CHECK(complex_gaussian(1, 2, 3) != complex_gaussian(1, 2, 4));
  CHECK(complex_gaussian(1, 2, 3) != complex_gaussian(2, 2, 3));
}

TEST_CASE("uniforms lie in the open unit interval") {
  for (std::uint64_t s = 0; s < 20000; ++s) {
    const auto u = uniform_pair({9, s, 0, StreamTag::kProbe});
    CHECK(u[0] > 0.0);
    CHECK(u[0] < 1.0);
    CHECK(u[1] > 0.0);
    CHECK(u[1] < 1.0);
  }
}

TEST_CASE("complex gaussian moments") {
  // E g = E g^2 = E|g|^2 g = 0, E|g|^2 = 1, E|g|^4 = 2, independence across modes.
  const int n = 200000;
  std::complex<double> m1 = 0, m2 = 0, m3 = 0, cross = 0;
  double p2 = 0, p4 = 0;
  for (int k = 0; k < n; ++k) {
    const auto g = complex_gaussian(5, static_cast<std::uint64_t>(k), 1);
    const auto h = complex_gaussian(5, static_cast<std::uint64_t>(k), 2);
    m1 += g;
    m2 += g * g;
    m3 += std::norm(g) * g;
    cross += g * std::conj(h);
    p2 += std::norm(g);
    p4 += std::norm(g) * std::norm(g);
  }
  const double tol = 5.0 / std::sqrt(n);
  CHECK(std::abs(m1) / n < tol);
  CHECK(std::abs(m2) / n < tol);
  CHECK(std::abs(m3) / n < 2 * tol);
  CHECK(std::abs(cross) / n < tol);
  CHECK(std::abs(p2 / n - 1.0) < tol);
  CHECK(std::abs(p4 / n - 2.0) < 5 * tol);
}

TEST_CASE("counter stream below stays in range and covers it") {
  CounterStream s(3, 0, StreamTag::kResample);
  std::set<std::uint64_t> seen;
  for (int k = 0; k < 1000; ++k) {
    const auto v = s.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CounterStream a(3, 1, StreamTag::kResample), b(3, 1, StreamTag::kResample);
  for (int k = 0; k < 10; ++k) CHECK(a.uniform() == b.uniform());
}
