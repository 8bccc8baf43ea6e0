#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "gibbsnls/bessel.hpp"
#include "gibbsnls/bessel_basis.hpp"
#include "gibbsnls/quadrature.hpp"
#include "oracles.hpp"

using namespace gibbsnls;

TEST_CASE("j0 and j1 against long double series") {
  for (double x = 0.0; x <= 12.0; x += 0.173) {
    CHECK(std::abs(bessel_j0(x) - static_cast<double>(oracle::j0_series(x))) < 2e-15);
    CHECK(std::abs(bessel_j1(x) - static_cast<double>(oracle::j1_series(x))) < 2e-15);
  }
}

TEST_CASE("j0 and j1 against libstdc++ at large argument") {
  for (double x = 12.5; x < 800.0; x *= 1.37) {
    CHECK(std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, x)) < 1e-12);
    CHECK(std::abs(bessel_j1(x) - std::cyl_bessel_j(1.0, x)) < 1e-12);
  }
}

TEST_CASE("negative argument is rejected") {
  CHECK_THROWS_AS(bessel_j0(-1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_j1(NAN), std::domain_error);
}

TEST_CASE("zeros of J0") {
  const auto z = bessel_zeros(200);
  REQUIRE(z.size() == 200);
  CHECK(z[0] == doctest::Approx(2.404825557695773).epsilon(1e-15));
  CHECK(z[1] == doctest::Approx(5.520078110286311).epsilon(1e-15));
  CHECK(z[2] == doctest::Approx(8.653727912911012).epsilon(1e-15));
  for (std::size_t n = 0; n < z.size(); ++n) {
    CHECK(std::abs(bessel_j0(z[n])) < 1e-13);
    if (n) CHECK(z[n] > z[n - 1]);
    // McMahon: z_n = b + 1/(8b) + O(b^-3), b = (n - 1/4) pi
    const double b = (static_cast<double>(n) + 0.75) * std::numbers::pi;
    CHECK(std::abs(z[n] - b - 1.0 / (8.0 * b)) < 0.1 / (b * b * b));
  }
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto rule = gauss_legendre(12, 0.0, 2.0);
  for (int k = 0; k <= 23; ++k) {
    const double exact = std::pow(2.0, k + 1) / (k + 1);
    CHECK(rule.integrate([k](double x) { return std::pow(x, k); }) == doctest::Approx(exact).epsilon(1e-13));
  }
  double w = 0.0;
  for (double v : rule.weights) w += v;
  CHECK(std::abs(w - 2.0) < 1e-14);
}

TEST_CASE("basis gram matrix and raw norms") {
  const auto basis = build_basis(64);
  CHECK(basis->num_nodes() == static_cast<std::size_t>(default_quadrature_order(64)));
  CHECK(default_quadrature_order(64) == 320);
  CHECK(gram_deviation(*basis) <= 1e-9);
  for (int n = 1; n <= 64; ++n) {
    const double raw = basis->l2_raw_norms[static_cast<std::size_t>(n - 1)];
    CHECK(std::abs(raw - std::sqrt(std::numbers::pi) * std::abs(bessel_j1(basis->zero(n)))) <= 1e-10);
  }
}

TEST_CASE("e_n(r) matches the closed form off the grid") {
  const auto basis = build_basis(8);
  for (int n = 1; n <= 8; ++n) {
    const double z = basis->zero(n);
    const double j1 = z <= 12.0 ? static_cast<double>(oracle::j1_series(z)) : std::cyl_bessel_j(1.0, z);
    const double norm = std::sqrt(std::numbers::pi) * std::abs(j1);
    for (double r : {0.0, 0.1, 0.37, 0.9, 1.0}) {
      if (z * r > 12.0) continue;
      CHECK(std::abs(basis->eval(n, r) - static_cast<double>(oracle::j0_series(z * r)) / norm) < 1e-11);
    }
    CHECK(std::abs(basis->eval(n, 1.0)) < 1e-13);
  }
}

TEST_CASE("derivative by central differences") {
  const auto basis = build_basis(6);
  const double h = 1e-6;
  for (int n = 1; n <= 6; ++n) {
    for (double r : {0.2, 0.5, 0.8}) {
      const double fd = (basis->eval(n, r + h) - basis->eval(n, r - h)) / (2 * h);
      CHECK(basis->eval_derivative(n, r) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("dirichlet energy equals z_n^2") {
  const auto basis = build_basis(5);
  for (int n = 1; n <= 5; ++n) {
    const double e = oracle::simpson(
        [&](double r) {
          const double d = basis->eval_derivative(n, r);
          return 2.0 * std::numbers::pi * r * d * d;
        },
        0.0, 1.0, 4000);
    CHECK(e == doctest::Approx(basis->zero(n) * basis->zero(n)).epsilon(1e-9));
  }
}

TEST_CASE("lp norms") {
  const auto basis = build_basis(10);
  for (int n = 1; n <= 10; ++n) CHECK(lp_norm(*basis, n, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  // sup norm is attained at the origin
  CHECK(lp_norm(*basis, 3, INFINITY) == doctest::Approx(basis->eval(3, 0.0)).epsilon(1e-12));
  const double l4 = std::pow(oracle::simpson(
                                 [&](double r) {
                                   const double v = basis->eval(2, r);
                                   return 2.0 * std::numbers::pi * r * v * v * v * v;
                                 },
                                 0.0, 1.0, 4000),
                             0.25);
  CHECK(lp_norm(*basis, 2, 4.0) == doctest::Approx(l4).epsilon(1e-9));
}

TEST_CASE("asymptotic exponents over n <= 200") {
  const auto basis = build_basis(200);
  std::vector<double> linf, raw;
  std::vector<int> idx;
  for (int n = 1; n <= 200; ++n) {
    linf.push_back(lp_norm(*basis, n, INFINITY));
    raw.push_back(basis->l2_raw_norms[static_cast<std::size_t>(n - 1)]);
    idx.push_back(n);
  }
  const auto a = asymptotic_exponent_fit(linf, idx);
  const auto b = asymptotic_exponent_fit(raw, idx);
  CHECK(a.slope >= 0.45);
  CHECK(a.slope <= 0.55);
  CHECK(b.slope >= -0.55);
  CHECK(b.slope <= -0.45);
}

TEST_CASE("log-log fit recovers an exact power") {
  std::vector<double> x, y;
  for (int k = 1; k <= 6; ++k) {
    x.push_back(k);
    y.push_back(3.0 * std::pow(k, -1.7));
  }
  const auto fit = log_log_fit(y, x);
  CHECK(fit.slope == doctest::Approx(-1.7).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  std::vector<int> few{1, 2, 3};
  CHECK_THROWS(asymptotic_exponent_fit(std::span<const double>(y.data(), 3), few));
}

TEST_CASE("scaling exponents of the bump") {
  std::vector<double> lambdas;
  for (int k = 1; k <= 8; ++k) lambdas.push_back(std::ldexp(1.0, k));
  const auto rep = scaling_counterexample(lambdas);
  CHECK(std::abs(rep.l4_exponent + 0.5) <= 0.05);
  CHECK(std::abs(rep.l2_exponent + 1.0) <= 0.05);
  CHECK(std::abs(rep.h1_exponent) <= 0.05);
  CHECK(scaling_bump(0.5) == 0.0);
  CHECK(scaling_bump(0.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("higher quadrature order leaves the basis unchanged") {
  const auto a = build_basis(12);
  const auto b = build_basis(12, 2 * default_quadrature_order(12));
  for (int n = 1; n <= 12; ++n) CHECK(lp_norm(*a, n, 4.0) == doctest::Approx(lp_norm(*b, n, 4.0)).epsilon(1e-12));
}

TEST_CASE("basis csv") {
  const auto basis = build_basis(3);
  std::ostringstream out;
  write_basis_csv(*basis, out);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);
  CHECK(out.str().rfind("n,", 0) == 0);
}
