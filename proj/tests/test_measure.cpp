#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "gibbsnls/measure.hpp"
#include "gibbsnls/random_stream.hpp"
#include "gibbsnls/spectral_field.hpp"
#include "oracles.hpp"

using namespace gibbsnls;

TEST_CASE("admissible window for s") {
  CHECK(s_lower_bound(2.0, 2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(default_s(2.0, 2.0) == doctest::Approx(5.0 / 12.0));
  CHECK(s_lower_bound(3.0, 2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(s_lower_bound(2.0, 3.5) == doctest::Approx(1.0 - 2.0 / 3.5));
  CHECK_NOTHROW(validate_s(0.4, 2.0, 2.0));
  CHECK_THROWS_AS(validate_s(0.5, 2.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(validate_s(0.3, 2.0, 2.0), std::domain_error);
  try {
    validate_s(0.2, 2.0, 2.0);
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("s must lie in") != std::string::npos);
  }
}

TEST_CASE("c coordinates and Parseval") {
  const auto basis = build_basis(6);
  const auto u = sample_free(basis, 6, 11, 0, 0.4);
  for (int n = 1; n <= 6; ++n) CHECK(std::abs(u.c(n) - std::pow(basis->zero(n), 0.4) * u.a(n)) < 1e-14);
  CHECK(u.l2_norm_sq() == doctest::Approx(u.l2_norm_sq_from_c()).epsilon(1e-13));
  const auto back = SpectralField::from_c(basis, u.c(), 0.4);
  for (int n = 1; n <= 6; ++n) CHECK(std::abs(back.a(n) - u.a(n)) < 1e-14);
  // projection inverts synthesis
  const auto values = u.synthesize();
  std::vector<complex> a(6);
  project(*basis, values, a);
  for (int n = 1; n <= 6; ++n) CHECK(std::abs(a[n - 1] - u.a(n)) < 1e-12);
}

TEST_CASE("free samples: variance of Re a_1 and mean squared norm") {
  const auto basis = build_basis(8);
  const int n = 40000;
  double m = 0.0, m2 = 0.0, norm = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto u = sample_free(basis, 8, 2024, static_cast<std::uint64_t>(k), 5.0 / 12.0);
    const double x = u.a(1).real();
    m += x;
    m2 += x * x;
    norm += u.l2_norm_sq();
  }
  const double var = m2 / n - (m / n) * (m / n);
  const double z1 = basis->zero(1);
  CHECK(1.0 / (2.0 * z1 * z1) == doctest::Approx(0.08646).epsilon(1e-4));
  CHECK(std::abs(var - 0.08646) < 5 * 0.08646 * std::sqrt(2.0 / n));
  double expected = 0.0;
  for (int j = 1; j <= 8; ++j) expected += 1.0 / (basis->zero(j) * basis->zero(j));
  CHECK(std::abs(norm / n - expected) < 0.01 * expected);
}

TEST_CASE("free samples are reproducible and keyed by sample index") {
  const auto basis = build_basis(5);
  const auto a = sample_free(basis, 5, 7, 3, 0.4);
  const auto b = sample_free(basis, 5, 7, 3, 0.4);
  const auto c = sample_free(basis, 5, 7, 4, 0.4);
  for (int n = 1; n <= 5; ++n) {
    CHECK(a.a(n) == b.a(n));
    CHECK(a.a(n) != c.a(n));
    CHECK(a.a(n) == complex_gaussian(7, 3, static_cast<std::uint32_t>(n)) / basis->zero(n));
  }
}

TEST_CASE("integral of V against radial Simpson") {
  const auto basis = build_basis(6);
  const auto u = sample_free(basis, 6, 99, 0, 0.4);
  for (const auto& model : {NonlinearityModel::pure_quartic(), NonlinearityModel::saturated(1.5)}) {
    const double ref = oracle::simpson(
        [&](double r) {
          complex v = 0.0;
          for (int n = 1; n <= 6; ++n) v += u.a(n) * basis->eval(n, r);
          return 2.0 * std::numbers::pi * r * model.potential(v);
        },
        0.0, 1.0, 20000);
    CHECK(integral_V(model, u) == doctest::Approx(ref).epsilon(1e-10));
  }
  const auto zero = SpectralField::zero(basis, 6, 0.4);
  CHECK(integral_V(NonlinearityModel::saturated(2.0), zero) == doctest::Approx(std::numbers::pi / 2));
  CHECK(integral_V(NonlinearityModel::pure_quartic(), zero) == 0.0);
}

TEST_CASE("cutoff") {
  const CutoffChi chi(1.0, 0.5);
  CHECK(chi(0.0) == 1.0);
  CHECK(chi(1.0) == 1.0);
  CHECK(chi(1.25) == doctest::Approx(0.5));
  CHECK(chi(1.5) == 0.0);
  CHECK(chi(3.0) == 0.0);
  const CutoffChi off;
  CHECK_FALSE(off.enabled());
  CHECK(off(1e300) == 1.0);
  const auto basis = build_basis(8);
  const auto d = default_cutoff(*basis, 8);
  double s = 0.0;
  for (int n = 1; n <= 8; ++n) s += 1.0 / (basis->zero(n) * basis->zero(n));
  CHECK(d.lambda == doctest::Approx(3.0 * std::sqrt(s)));
  CHECK(d.delta == doctest::Approx(d.lambda / 4));
}

TEST_CASE("gibbs weight and normalization constant") {
  const auto basis = build_basis(4);
  const auto model = NonlinearityModel::pure_quartic();
  const auto u = sample_free(basis, 4, 1, 0, 0.4);
  CHECK(gibbs_weight(model, CutoffChi{}, u) == doctest::Approx(std::exp(-integral_V(model, u))));
  CHECK(gibbs_weight(model, CutoffChi(1e-9, 1e-9), u) == 0.0);
  double lk = 0.0;
  for (int n = 1; n <= 4; ++n) lk += (2.0 - 0.8) * std::log(basis->zero(n)) - std::log(std::numbers::pi);
  CHECK(log_kappa(*basis, 4, 0.4) == doctest::Approx(lk));
}

TEST_CASE("effective sample size") {
  const std::vector<double> equal(10, 0.3);
  CHECK(effective_sample_size(equal) == doctest::Approx(10.0));
  const std::vector<double> one{0.0, 2.0, 0.0};
  CHECK(effective_sample_size(one) == doctest::Approx(1.0));
  const std::vector<double> none{0.0, 0.0};
  CHECK_THROWS_AS(effective_sample_size(none), std::domain_error);
}

TEST_CASE("importance sampling is deterministic and independent of workers") {
  const auto basis = build_basis(6);
  const auto model = NonlinearityModel::pure_quartic();
  const auto chi = default_cutoff(*basis, 6);
  GibbsSamplerOptions one, four;
  four.workers = 4;
  const auto a = sample_gibbs(model, chi, basis, 6, 300, 17, one);
  const auto b = sample_gibbs(model, chi, basis, 6, 300, 17, four);
  REQUIRE(a.size() == 300);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.weights[k] == b.weights[k]);
    for (int n = 1; n <= 6; ++n) CHECK(a.samples[k].a(n) == b.samples[k].a(n));
  }
  CHECK(a.ess >= 1.0);
  CHECK(a.ess <= 300.0);
  CHECK(a.acceptance_rate() == 1.0);
}

TEST_CASE("rejection and importance sampling agree") {
  const auto basis = build_basis(4);
  const auto model = NonlinearityModel::saturated(2.0);
  const CutoffChi chi;
  GibbsSamplerOptions imp, rej;
  rej.mode = SamplerMode::kRejection;
  rej.workers = 2;
  const auto a = sample_gibbs(model, chi, basis, 4, 6000, 5, imp);
  const auto b = sample_gibbs(model, chi, basis, 4, 6000, 6, rej);
  REQUIRE(b.size() == 6000);
  for (double w : b.weights) CHECK(w == 1.0);
  CHECK(b.acceptance_rate() > 0.0);
  CHECK(b.acceptance_rate() < 1.0);
  double wa = 0.0, ma = 0.0, mb = 0.0, mb2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    wa += a.weights[k];
    ma += a.weights[k] * a.samples[k].l2_norm_sq();
  }
  for (const auto& u : b.samples) {
    mb += u.l2_norm_sq();
    mb2 += u.l2_norm_sq() * u.l2_norm_sq();
  }
  ma /= wa;
  mb /= 6000.0;
  const double sd = std::sqrt(mb2 / 6000.0 - mb * mb);
  CHECK(std::abs(ma - mb) < 5.0 * sd * std::sqrt(2.0 / 6000.0));
}

TEST_CASE("rejection needs a nonnegative potential") {
  const auto basis = build_basis(3);
  const auto m = NonlinearityModel::custom_real([](double x, double) { return x; }, 1.0, 2.0, false);
  GibbsSamplerOptions rej;
  rej.mode = SamplerMode::kRejection;
  CHECK_THROWS_AS(sample_gibbs(m, CutoffChi{}, basis, 3, 10, 1, rej), UnsupportedError);
}

TEST_CASE("ensemble csv and manifest") {
  const auto basis = build_basis(3);
  const auto model = NonlinearityModel::pure_quartic();
  const auto chi = default_cutoff(*basis, 3);
  const auto ens = sample_gibbs(model, chi, basis, 3, 4, 8);
  std::ostringstream out;
  write_ensemble_csv(ens, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "sample_index,n,re_a,im_a,weight");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 12);
  const auto j = ensemble_manifest(ens, model, chi, 3);
  CHECK(j.at("seed").get<std::uint64_t>() == 8);
  CHECK(j.at("N").get<int>() == 3);
  CHECK(j.contains("Lambda"));
  CHECK(j.contains("family"));
}

TEST_CASE("sampler mode names") {
  CHECK(parse_sampler_mode("rejection") == SamplerMode::kRejection);
  CHECK(to_string(SamplerMode::kImportance) == "importance");
  CHECK_THROWS_AS(parse_sampler_mode("mcmc"), std::invalid_argument);
}
