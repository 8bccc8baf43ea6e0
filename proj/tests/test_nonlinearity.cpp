#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gibbsnls/nonlinearity.hpp"

using namespace gibbsnls;

namespace {

// Wirtinger derivatives by central differences on the real potential.
complex fd_dbar(const NonlinearityModel& m, complex z, double h = 1e-6) {
  const double vx = (m.potential(z + h) - m.potential(z - h)) / (2 * h);
  const double vy = (m.potential(z + complex(0, h)) - m.potential(z - complex(0, h))) / (2 * h);
  return {0.5 * vx, 0.5 * vy};
}

complex fd_second(const NonlinearityModel& m, complex z, int k1, double h = 1e-4) {
  auto v = [&](double dx, double dy) { return m.potential(z + complex(dx, dy)); };
  const double vxx = (v(h, 0) - 2 * v(0, 0) + v(-h, 0)) / (h * h);
  const double vyy = (v(0, h) - 2 * v(0, 0) + v(0, -h)) / (h * h);
  const double vxy = (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4 * h * h);
  if (k1 == 1) return 0.25 * (vxx + vyy);
  if (k1 == 2) return 0.25 * complex(vxx - vyy, -2 * vxy);
  return 0.25 * complex(vxx - vyy, 2 * vxy);
}

}  // namespace

TEST_CASE("closed forms") {
  const auto q = NonlinearityModel::pure_quartic();
  CHECK(q.potential(complex(0, 0)) == 0.0);
  CHECK(q.potential(complex(1, 1)) == doctest::Approx(2.0));
  CHECK(q.alpha() == 2.0);
  const auto s = NonlinearityModel::saturated(2.0);
  CHECK(s.potential(0.0) == doctest::Approx(0.5));
  CHECK(s.potential(complex(1, 0)) == doctest::Approx(2.0));
  const complex z(0.3, -1.2);
  CHECK(std::abs(q.force(z) - std::norm(z) * z) < 1e-15);
  CHECK(std::abs(s.force(z) - (1 + std::norm(z)) * z) < 1e-14);
}

TEST_CASE("force is the dbar derivative of V") {
  for (const auto& m : {NonlinearityModel::pure_quartic(), NonlinearityModel::saturated(1.3),
                        NonlinearityModel::saturated(3.5, 3.0)}) {
    for (complex z : {complex(0.2, 0.1), complex(-1.5, 0.7), complex(2.0, -3.0)}) {
      CHECK(std::abs(m.force(z) - fd_dbar(m, z)) < 1e-6 * (1 + std::abs(m.force(z))));
      CHECK(std::abs(m.wirtinger(z, 1, 0) - std::conj(m.force(z))) < 1e-15);
    }
  }
}

TEST_CASE("second wirtinger derivatives") {
  const auto m = NonlinearityModel::saturated(1.5);
  for (complex z : {complex(0.4, 0.3), complex(-1.0, 2.0)}) {
    for (auto [k1, k2] : {std::pair{1, 1}, std::pair{2, 0}, std::pair{0, 2}}) {
      const complex exact = m.wirtinger(z, k1, k2);
      CHECK(std::abs(exact - fd_second(m, z, k1)) < 1e-5 * (1 + std::abs(exact)));
    }
  }
  CHECK_THROWS_AS((void)m.wirtinger(1.0, 2, 1), std::domain_error);
}

TEST_CASE("custom complex-step model agrees with the built-in family") {
  const double alpha = 1.7;
  const auto builtin = NonlinearityModel::saturated(alpha);
  const auto custom = NonlinearityModel::custom(
      [alpha](complex x, complex y) { return (2.0 / (alpha + 2.0)) * std::pow(1.0 + x * x + y * y, 0.5 * (alpha + 2.0)); },
      alpha, 2.0, true);
  CHECK(custom.differentiable());
  for (complex z : {complex(0.5, 0.25), complex(-2.0, 1.0)}) {
    CHECK(custom.potential(z) == doctest::Approx(builtin.potential(z)).epsilon(1e-14));
    CHECK(std::abs(custom.force(z) - builtin.force(z)) < 1e-12 * std::abs(builtin.force(z)));
    CHECK(std::abs(custom.wirtinger(z, 1, 1) - builtin.wirtinger(z, 1, 1)) < 1e-6 * std::abs(builtin.wirtinger(z, 1, 1)));
  }
}

TEST_CASE("real-only custom model has no derivatives") {
  const auto m = NonlinearityModel::custom_real([](double x, double y) { return x * x + y * y; }, 1.0, 2.0, true);
  CHECK_FALSE(m.differentiable());
  CHECK(m.potential(complex(1, 2)) == doctest::Approx(5.0));
  CHECK_THROWS_AS((void)m.force(1.0), UnsupportedError);
  const auto grid = modulus_sweep(0.1, 10, 10);
  CHECK_THROWS_AS(verify_growth(m, 1, 0, grid), UnsupportedError);
}

TEST_CASE("exponent validation") {
  CHECK_THROWS_AS(NonlinearityModel::saturated(4.0), std::domain_error);
  CHECK_THROWS_AS(NonlinearityModel::saturated(0.0), std::domain_error);
  CHECK_THROWS_AS(NonlinearityModel::saturated(2.0, 1.5), std::domain_error);
  CHECK_NOTHROW(NonlinearityModel::saturated(3.99, 3.99));
}

TEST_CASE("growth bounds hold for the saturated family") {
  const auto grid = modulus_sweep(0.01, 1e4, 60);
  const auto m = NonlinearityModel::saturated(2.5);
  for (auto [k1, k2] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}, std::pair{2, 0}}) {
    CHECK(verify_growth(m, k1, k2, grid).holds);
  }
  CHECK(verify_defocusing(m, grid).holds);
}

TEST_CASE("growth bound fails for a potential that is too steep") {
  const auto grid = modulus_sweep(0.01, 1e4, 60);
  const auto steep = NonlinearityModel::custom(
      [](complex x, complex y) { const complex w = x * x + y * y; return w * w * w; }, 1.0, 2.0, true);
  CHECK_FALSE(verify_growth(steep, 0, 0, grid).holds);
  const auto unbounded_below = NonlinearityModel::custom_real(
      [](double x, double y) { return -std::pow(x * x + y * y, 2.0); }, 1.0, 2.0, false);
  CHECK_FALSE(verify_defocusing(unbounded_below, grid).holds);
}

TEST_CASE("family names") {
  CHECK(parse_family("saturated") == PotentialFamily::kSaturated);
  CHECK(to_string(PotentialFamily::kPureQuartic) == "pure_quartic");
  CHECK_THROWS_AS(parse_family("cubic"), std::invalid_argument);
}
