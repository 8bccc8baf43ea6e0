// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (capped at 125).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gibbsnls/bessel.hpp"
#include "gibbsnls/bessel_basis.hpp"
#include "gibbsnls/dynamics.hpp"
#include "gibbsnls/invariance.hpp"
#include "gibbsnls/measure.hpp"
#include "gibbsnls/sphere_zonal.hpp"
#include "gibbsnls/tails.hpp"
#include "oracles.hpp"

using namespace gibbsnls;

namespace {

const int kWorkers = std::max(1u, std::thread::hardware_concurrency());
constexpr std::uint64_t kSeed = 12345;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "!") << what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

// 1. eigenbasis
void eigenbasis(Outcome& o) {
  const auto basis = build_basis(64);
  double j0 = 0.0, norm = 0.0;
  for (int n = 1; n <= 64; ++n) {
    j0 = std::max(j0, std::abs(bessel_j0(basis->zero(n))));
    norm = std::max(norm, std::abs(basis->l2_raw_norms[n - 1] - std::sqrt(std::numbers::pi) * std::abs(bessel_j1(basis->zero(n)))));
  }
  const double gram = gram_deviation(*basis);
  o.require(j0 < 1e-13, "max|J0(z_n)|=" + fmt(j0));
  o.require(gram <= 1e-9, "gram=" + fmt(gram));
  o.require(norm <= 1e-10, "raw norm err=" + fmt(norm));
  const auto big = build_basis(200);
  std::vector<double> linf, raw;
  std::vector<int> idx;
  for (int n = 1; n <= 200; ++n) {
    linf.push_back(lp_norm(*big, n, INFINITY));
    raw.push_back(big->l2_raw_norms[n - 1]);
    idx.push_back(n);
  }
  const double a = asymptotic_exponent_fit(linf, idx).slope;
  const double b = asymptotic_exponent_fit(raw, idx).slope;
  o.require(a >= 0.45 && a <= 0.55, "Linf slope=" + fmt(a));
  o.require(b >= -0.55 && b <= -0.45, "L2 slope=" + fmt(b));
}

// 2. scaling exponents
void scaling(Outcome& o) {
  std::vector<double> lambdas;
  for (int k = 1; k <= 8; ++k) lambdas.push_back(std::ldexp(1.0, k));
  const auto r = scaling_counterexample(lambdas);
  o.require(std::abs(r.l4_exponent + 0.5) <= 0.05, "L4=" + fmt(r.l4_exponent));
  o.require(std::abs(r.l2_exponent + 1.0) <= 0.05, "L2=" + fmt(r.l2_exponent));
  o.require(std::abs(r.h1_exponent) <= 0.05, "H1=" + fmt(r.h1_exponent));
}

// 3. sub-gaussian tail at beta = 1/2
void subgaussian(Outcome& o) {
  const std::vector<complex> c(4, complex(0.5, 0.0));
  const std::vector<double> grid{1.0, 2.0, 3.0};
  const auto rows = tail_subgaussian_test(c, grid, 1000000, kSeed, kWorkers);
  for (const auto& r : rows) {
    o.require(r.empirical <= 4.0 * std::exp(-r.lambda * r.lambda / 2.0),
              "P(>" + fmt(r.lambda) + ")=" + fmt(r.empirical) + " vs " + fmt(r.reference));
  }
}

// 4. chi-square tails
void chisquare(Outcome& o) {
  std::vector<double> grid;
  for (int k = 1; k <= 6; ++k) grid.push_back(k);
  const std::size_t samples = 1000000;
  const auto one = tail_chisquare_test(1, grid, samples, kSeed);
  double worst = 0.0;
  for (const auto& r : one.rows) {
    const double exact = std::exp(-r.lambda);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(samples));
    worst = std::max(worst, std::abs(r.empirical - exact) / se);
  }
  o.require(worst <= 3.0, "card1 max z=" + fmt(worst));
  double c2 = INFINITY;
  for (int card = 1; card <= 20; ++card) c2 = std::min(c2, tail_chisquare_test(card, {}, samples, kSeed + card).fitted_c2);
  o.require(c2 > 0.3, "min c2=" + fmt(c2));
}

// 5. convergence of int V(S_N u)
void vconv(Outcome& o) {
  const auto model = NonlinearityModel::saturated(2.0);
  const auto basis = build_basis(64);
  const std::vector<int> Ns{8, 16, 32, 64};
  const auto rep = vN_convergence(model, basis, Ns, 10000, kSeed, kWorkers);
  std::string diffs;
  double worst = 0.0;
  for (const auto& p : rep.pairs) {
    diffs += (diffs.empty() ? "" : ",") + fmt(p.mean_abs_diff);
    worst = std::max(worst, p.mean_abs_diff / (rep.fitted_constant * p.majorant));
  }
  o.require(rep.strictly_decreasing, "diffs=" + diffs);
  o.require(rep.dominated && worst <= 5.0, "max diff/(C majorant)=" + fmt(worst));
}

// 6. dynamics
void dynamics(Outcome& o) {
  const auto model = NonlinearityModel::pure_quartic();
  {
    const auto b1 = build_basis(1);
    const double kappa = std::pow(lp_norm(*b1, 1, 4.0), 4.0);
    const double z2 = b1->zero(1) * b1->zero(1);
    const complex a0(0.8, 0.3);
    const complex exact = a0 * std::exp(complex(0, -(z2 + kappa * std::norm(a0))));
    FlowConfig cfg;
    const auto r = evolve(model, *b1, SpectralField(b1, {a0}, 5.0 / 12.0), cfg);
    const double phase = std::abs(std::arg(r.u_final.a(1) / exact));
    o.require(phase < 1e-5, "midpoint phase err=" + fmt(phase));
    cfg.integrator = Integrator::kStrangSplitting;
    const auto rs = evolve(model, *b1, SpectralField(b1, {a0}, 5.0 / 12.0), cfg);
    o.detail << "; (info) splitting phase err=" << fmt(std::abs(std::arg(rs.u_final.a(1) / exact)));
  }
  const auto b16 = build_basis(16);
  // Smooth datum a_1 = 1 for the energy checks; the rough free-field sample is reported alongside.
  auto smooth = SpectralField::zero(b16, 16, 5.0 / 12.0);
  smooth.a_mut()[0] = 1.0;
  const auto rough = sample_free(b16, 16, kSeed, 0, 5.0 / 12.0);
  std::vector<double> drift;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    FlowConfig cfg;
    cfg.dt = dt;
    drift.push_back(evolve(model, *b16, smooth, cfg).diagnostics.h_drift);
  }
  FlowConfig cfg;
  const auto rr = evolve(model, *b16, rough, cfg);
  const auto rs = evolve(model, *b16, smooth, cfg);
  o.require(std::max(rr.diagnostics.l2_drift, rs.diagnostics.l2_drift) <= 1e-10,
            "L2 drift=" + fmt(std::max(rr.diagnostics.l2_drift, rs.diagnostics.l2_drift)));
  o.require(drift.back() <= 1e-6, "H drift a1=1: " + fmt(drift.back()));
  o.detail << "; (info) H drift free sample: " << fmt(rr.diagnostics.h_drift);
  for (std::size_t k = 1; k < drift.size(); ++k) {
    const double order = std::log2(drift[k - 1] / drift[k]);
    o.require(order >= 1.8 && order <= 2.2, "order=" + fmt(order));
  }

  const int N = 8;
  const auto b8 = build_basis(N);
  GalerkinFlow flow(model, *b8, N);
  std::vector<complex> a(N), p(N), m(N), fp(N), fm(N);
  const double h = 1e-6;
  double div = 0.0;
  for (int s = 0; s < 100; ++s) {
    const auto u = sample_free(b8, N, kSeed, static_cast<std::uint64_t>(s), 5.0 / 12.0);
    std::copy(u.a().begin(), u.a().end(), a.begin());
    double d = 0.0;
    for (int k = 0; k < 2 * N; ++k) {
      p = a;
      m = a;
      const complex e = k < N ? complex(h, 0) : complex(0, h);
      p[k % N] += e;
      m[k % N] -= e;
      flow.rhs(p, fp);
      flow.rhs(m, fm);
      const complex q = (fp[k % N] - fm[k % N]) / (2 * h);
      d += k < N ? q.real() : q.imag();
    }
    div = std::max(div, std::abs(d));
  }
  o.require(div <= 1e-7, "max div=" + fmt(div));

  const auto u0 = sample_free(b8, N, kSeed, 0, 5.0 / 12.0);
  FlowConfig half;
  half.t_final = 0.5;
  const auto fwd = evolve(model, *b8, u0, half);
  half.t_final = -0.5;
  const auto back = evolve(model, *b8, fwd.u_final, half);
  double err = 0.0;
  for (int n = 1; n <= N; ++n) err += std::norm(back.u_final.a(n) - u0.a(n));
  o.require(std::sqrt(err) < 1e-8, "reversibility=" + fmt(std::sqrt(err)));
}

// 7. invariance
void invariance(Outcome& o) {
  const int N = 8;
  const auto model = NonlinearityModel::pure_quartic();
  const auto basis = build_basis(N);
  const auto chi = default_cutoff(*basis, N);
  FlowConfig flow;
  InvarianceOptions opt;
  opt.workers = kWorkers;
  const std::vector<double> times{0.1, 0.5, 1.0};
  const auto rep = run_invariance_experiment(model, chi, basis, N, times, 5000, flow, kSeed, opt);
  o.require(rep.max_abs_z() <= 3.0, "max|z|=" + fmt(rep.max_abs_z()));
  o.require(rep.min_ks_p() >= 0.01, "min KS p=" + fmt(rep.min_ks_p()));
  const auto b2 = build_basis(2);
  const double det = liouville_volume_check(model, *b2, 2, sample_free(b2, 2, kSeed, 0, 5.0 / 12.0), 0.2, 1e-4);
  o.require(det <= 1e-4, "|det-1|=" + fmt(det));
}

// 8. coupling coefficients on S^3
void sphere(Outcome& o) {
  const auto rep = gamma_law_check(20, kSeed, 50);
  o.require(rep.violation_count == 0, std::to_string(rep.tuples_checked) + " tuples, violations=" + std::to_string(rep.violation_count));
  o.require(rep.quadrature_tuples == 50 && rep.quadrature_max_error <= 1e-8, "quadrature err=" + fmt(rep.quadrature_max_error));
  o.require(gamma_value(1, 1, 1, 1) == 2.0 / std::numbers::pi, "gamma(1,1,1,1)=2/pi");
}

// 9. single-constant boundedness of the ihp sum
void ihp(Outcome& o) {
  double lo = INFINITY, hi = 0.0, tail = 0.0;
  std::string ratios;
  for (double alpha : {10.0, 100.0, 1000.0, 10000.0}) {
    const auto r = ihp_sum(0.4, 0.95, alpha, 1000000);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    tail = std::max(tail, r.tail_error_bound / r.total);
    ratios += (ratios.empty() ? "" : ",") + fmt(r.ratio);
  }
  o.require(tail < 1e-3, "tail bound/sum=" + fmt(tail));
  o.require(hi / lo <= 3.0, "ratios=" + ratios + " max/min=" + fmt(hi / lo));
}

// 10. Picard sums
void picard(Outcome& o) {
  const std::vector<int> one{1};
  const double first = picard_moment_sums(0.4, 0.95, one).rows[0].i1;
  o.require(std::abs(first - 4.0 / (std::numbers::pi * std::numbers::pi)) <= 1e-12, "first summand err=" +
            fmt(std::abs(first - 4.0 / (std::numbers::pi * std::numbers::pi))));
  const std::vector<int> Ns{32, 64, 128};
  const auto rep = picard_moment_sums(0.4, 0.95, Ns);
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + fmt(x);
    return s;
  };
  o.require(strictly_decreasing(rep.i1_increments), "I1 increments=" + join(rep.i1_increments));
  o.require(strictly_decreasing(rep.i2_increments), "I2 increments=" + join(rep.i2_increments));
}

// 11. second Picard iterate
void v2(Outcome& o) {
  const auto g1 = zonal_gaussians(1, kSeed);
  const double closed = 2.0 / std::numbers::pi * std::pow(std::abs(g1[0]), 3);
  const double err1 = std::abs(std::abs(compute_v2(g1, 1.0).v2[0]) - closed);
  o.require(err1 <= 1e-12, "single mode err=" + fmt(err1));

  const auto g2 = zonal_gaussians(2, kSeed);
  const auto v = compute_v2(g2, 1.0);
  const auto ref = oracle::v2_duhamel(g2, 1.0, 6);
  double dev = 0.0;
  for (int n = 0; n < 6; ++n) dev = std::max(dev, std::abs(v.v2[n] - ref[n]));
  o.require(dev <= 1e-6, "Duhamel N=2 dev=" + fmt(dev));

  const std::vector<int> Ns{16, 32, 64};
  const auto rep = v2_moment(0.4, Ns, 1.0, 200, kSeed, MomentMode::kFixedTimeHsigma, kWorkers);
  const double inc1 = rep.rows[1].increment, inc2 = rep.rows[2].increment;
  o.require(inc2 < inc1, "increments=" + fmt(inc1) + "," + fmt(inc2));
  o.require(inc2 <= 0.1 * rep.rows[1].estimate, "final/previous=" + fmt(inc2 / rep.rows[1].estimate));

  const std::vector<int> only{1};
  const auto m1 = v2_moment(0.4, only, 1.0, 20000, kSeed, MomentMode::kFixedTimeHsigma, kWorkers);
  const double exact = 4.0 / (std::numbers::pi * std::numbers::pi) * 6.0;
  const double z = std::abs(m1.rows[0].estimate - exact) / m1.rows[0].stderr_;
  o.require(z <= 3.0, "single-mode moment z=" + fmt(z));
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Outcome&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "eigenbasis", 10, eigenbasis},        {2, "scaling exponents", 5, scaling},
      {3, "sub-gaussian tail", 30, subgaussian}, {4, "chi-square tails", 60, chisquare},
      {5, "potential convergence", 120, vconv},  {6, "dynamics", 120, dynamics},
      {7, "invariance", 600, invariance},        {8, "S3 coupling algebra", 120, sphere},
      {9, "ihp sum boundedness", 30, ihp},       {10, "Picard sums", 180, picard},
      {11, "second Picard iterate", 300, v2},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.budget_seconds, "runtime " + fmt(secs) + "s < " + fmt(c.budget_seconds) + "s");
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return std::min(failures, 125);
}
