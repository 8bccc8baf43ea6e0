#include "gibbsnls/sphere_zonal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gibbsnls/parallel.hpp"
#include "gibbsnls/quadrature.hpp"
#include "gibbsnls/random_stream.hpp"

namespace gibbsnls {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;
constexpr complex kI{0.0, 1.0};

// Coincidences between the expansion index sets of P_a P_b and P_c P_d.
// Each set is an arithmetic progression of step 2.
inline int overlap(int a, int b, int c, int d) {
  const int lo1 = std::abs(a - b) + 1;
  const int hi1 = a + b - 1;
  const int lo2 = std::abs(c - d) + 1;
  const int hi2 = c + d - 1;
  if (((lo1 ^ lo2) & 1) != 0) return 0;
  const int lo = std::max(lo1, lo2);
  const int hi = std::min(hi1, hi2);
  return hi < lo ? 0 : (hi - lo) / 2 + 1;
}

void require_positive(int n, int n1, int n2, int n3) {
  if (n < 1 || n1 < 1 || n2 < 1 || n3 < 1) throw std::domain_error("gamma: indices must be >= 1");
}

// (e^{i w t} - 1)/(i w), and t at w = 0.
inline complex duhamel_phase(double omega, double t) {
  if (omega == 0.0) return {t, 0.0};
  const double x = omega * t;
  return complex(std::sin(x), 1.0 - std::cos(x)) / omega;
}

}  // namespace

double zonal_p(int n, double theta) {
  const double c = std::sqrt(kTwoOverPi);
  const double s = std::sin(theta);
  if (std::abs(s) < 1e-12) {
    const bool at_pi = std::cos(theta) < 0.0;
    return c * n * ((at_pi && n % 2 == 0) ? -1.0 : 1.0);
  }
  return c * std::sin(n * theta) / s;
}

std::vector<int> product_expand(int k, int l) {
  if (k < 1 || l < 1) throw std::domain_error("product_expand: indices must be >= 1");
  std::vector<int> out;
  for (int j = 1; j <= std::min(k, l); ++j) out.push_back(std::abs(k - l) + 2 * j - 1);
  return out;
}

int gamma_count(int n, int n1, int n2, int n3) {
  require_positive(n, n1, n2, n3);
  return overlap(n, n3, n1, n2);
}

int gamma_count_alt(int n, int n1, int n2, int n3) {
  require_positive(n, n1, n2, n3);
  return overlap(n, n1, n2, n3);
}

double gamma_value(int n, int n1, int n2, int n3) { return kTwoOverPi * gamma_count(n, n1, n2, n3); }

GammaTensor::GammaTensor(int max_index, int workers) : max_(max_index) {
  if (max_index < 1 || max_index > 255) throw std::domain_error("GammaTensor: max_index must be in [1, 255]");
  const auto m = static_cast<std::size_t>(max_index);
  table_.assign(m * m * m * m, 0);
  parallel_for(m, workers, [&](std::size_t i) {
    const int n = static_cast<int>(i) + 1;
    for (int n1 = 1; n1 <= max_; ++n1)
      for (int n2 = 1; n2 <= max_; ++n2)
        for (int n3 = 1; n3 <= max_; ++n3) {
          table_[offset(n, n1, n2, n3)] = static_cast<std::uint8_t>(overlap(n, n3, n1, n2));
        }
  });
}

std::size_t GammaTensor::offset(int n, int n1, int n2, int n3) const {
  const auto m = static_cast<std::size_t>(max_);
  return ((static_cast<std::size_t>(n - 1) * m + static_cast<std::size_t>(n1 - 1)) * m +
          static_cast<std::size_t>(n2 - 1)) * m + static_cast<std::size_t>(n3 - 1);
}

int GammaTensor::m(int n, int n1, int n2, int n3) const {
  auto in = [this](int k) { return k >= 1 && k <= max_; };
  if (!in(n) || !in(n1) || !in(n2) || !in(n3)) return 0;
  return table_[offset(n, n1, n2, n3)];
}

double GammaTensor::gamma(int n, int n1, int n2, int n3) const { return kTwoOverPi * m(n, n1, n2, n3); }

std::size_t GammaTensor::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(table_.begin(), table_.end(), [](std::uint8_t v) { return v != 0; }));
}

void GammaTensor::write_csv(std::ostream& out) const {
  out << "n,n1,n2,n3,m\n";
  for (int n = 1; n <= max_; ++n)
    for (int n1 = 1; n1 <= max_; ++n1)
      for (int n2 = 1; n2 <= max_; ++n2)
        for (int n3 = 1; n3 <= max_; ++n3) {
          const int v = m(n, n1, n2, n3);
          if (v != 0) out << n << ',' << n1 << ',' << n2 << ',' << n3 << ',' << v << '\n';
        }
}

double gamma_quadrature(int n, int n1, int n2, int n3) {
  require_positive(n, n1, n2, n3);
  const auto rule = gauss_legendre(2 * (n + n1 + n2 + n3) + 32, 0.0, std::numbers::pi);
  return rule.integrate([&](double th) {
    const double s = std::sin(th);
    return zonal_p(n, th) * zonal_p(n1, th) * zonal_p(n2, th) * zonal_p(n3, th) * s * s;
  });
}

GammaLawReport gamma_law_check(int max_index, std::uint64_t seed, std::size_t quadrature_tuples) {
  if (max_index < 1 || max_index > 40) throw std::domain_error("gamma_law_check: max_index must be in [1, 40]");
  GammaLawReport report;
  report.max_index = max_index;
  const GammaTensor tensor(max_index);
  auto flag = [&report](std::array<int, 4> t, const char* law) {
    ++report.violation_count;
    if (report.violations.size() < 32) report.violations.push_back({t[0], t[1], t[2], t[3], law});
  };
  std::array<int, 4> t{};
  for (t[0] = 1; t[0] <= max_index; ++t[0])
    for (t[1] = 1; t[1] <= max_index; ++t[1])
      for (t[2] = 1; t[2] <= max_index; ++t[2])
        for (t[3] = 1; t[3] <= max_index; ++t[3]) {
          ++report.tuples_checked;
          const int m = tensor.m(t[0], t[1], t[2], t[3]);
          if (m > *std::min_element(t.begin(), t.end())) flag(t, "m exceeds min index");
          const int sum = t[0] + t[1] + t[2] + t[3];
          for (int k : t) {
            if (2 * k > sum && m != 0) {
              flag(t, "nonzero beyond triangle condition");
              break;
            }
          }
          if (gamma_count_alt(t[0], t[1], t[2], t[3]) != m) flag(t, "pairing dependence");
          auto p = t;
          std::sort(p.begin(), p.end());
          do {
            if (tensor.m(p[0], p[1], p[2], p[3]) != m) {
              flag(t, "permutation asymmetry");
              break;
            }
          } while (std::next_permutation(p.begin(), p.end()));
        }
  CounterStream stream(seed, 0, StreamTag::kProbe);
  const auto bound = static_cast<std::uint64_t>(max_index);
  for (std::size_t k = 0; k < quadrature_tuples; ++k) {
    std::array<int, 4> q{};
    for (auto& v : q) v = static_cast<int>(stream.below(bound)) + 1;
    const double err = std::abs(gamma_quadrature(q[0], q[1], q[2], q[3]) - tensor.gamma(q[0], q[1], q[2], q[3]));
    report.quadrature_max_error = std::max(report.quadrature_max_error, err);
    ++report.quadrature_tuples;
  }
  return report;
}

IhpResult ihp_sum(double sigma, double beta, double alpha, long long n_max) {
  if (!(sigma > 0.0 && sigma < 0.5)) throw std::domain_error("ihp_sum: sigma must lie in (0, 1/2)");
  if (!(2.0 * beta - 2.0 * sigma > 1.0)) {
    std::ostringstream msg;
    msg << "ihp_sum: the series diverges unless 2*beta - 2*sigma > 1; got " << 2.0 * beta - 2.0 * sigma;
    throw std::domain_error(msg.str());
  }
  if (!std::isfinite(alpha)) throw std::domain_error("ihp_sum: alpha must be finite");
  const double x0 = static_cast<double>(n_max);
  if (n_max < 1 || x0 * x0 < 4.0 * (1.0 + std::abs(alpha))) {
    throw std::domain_error("ihp_sum: n_max^2 must be at least 4(1+|alpha|) for the tail estimate");
  }
  auto f = [&](double n) { return std::pow(n, 2.0 * sigma) / std::pow(1.0 + std::abs(n * n - alpha), beta); };
  long double partial = 0.0L;
  for (long long n = n_max; n >= 1; --n) partial += f(static_cast<double>(n));
  // int_{x0}^inf x^{2s} (x^2 (1 + u))^{-beta}, u = (1 - alpha)/x^2, expanded in u.
  double integral = 0.0;
  double binom = 1.0;
  const double u0 = (1.0 - alpha) / (x0 * x0);
  double upow = 1.0;
  for (int k = 0; k < 400; ++k) {
    const double expo = 2.0 * beta + 2.0 * k - 2.0 * sigma - 1.0;
    const double term = binom * upow * std::pow(x0, -expo) / expo;
    integral += term;
    if (std::abs(term) <= 1e-17 * std::abs(integral)) break;
    binom *= (-beta - k) / (k + 1.0);
    upow *= u0;
  }
  IhpResult r;
  r.partial = static_cast<double>(partial);
  r.tail_error_bound = 0.5 * f(x0);
  r.tail_estimate = integral - r.tail_error_bound;
  r.total = r.partial + r.tail_estimate;
  r.ratio = r.total / std::pow(1.0 + std::abs(alpha), sigma);
  return r;
}

double default_picard_beta(double sigma) { return 0.5 * (sigma + 1.5); }

PicardSumsReport picard_moment_sums(double sigma, double beta, std::span<const int> N_list) {
  if (!(sigma < 0.5)) throw std::domain_error("picard_moment_sums: sigma must be below 1/2");
  if (!(beta < 1.0 && 2.0 * beta - 2.0 * sigma > 1.0)) {
    throw std::domain_error("picard_moment_sums: beta must satisfy 1/2 + sigma < beta < 1");
  }
  std::vector<int> Ns(N_list.begin(), N_list.end());
  std::sort(Ns.begin(), Ns.end());
  PicardSumsReport report;
  report.sigma = sigma;
  report.beta = beta;
  if (Ns.empty()) return report;
  if (Ns.front() < 1) throw std::domain_error("picard_moment_sums: N must be >= 1");
  const int M = Ns.back();
  const auto um = static_cast<std::size_t>(M);
  std::vector<double> n2s(um + 1);
  std::vector<double> inv_sq(um + 1);
  for (int n = 1; n <= M; ++n) {
    n2s[static_cast<std::size_t>(n)] = std::pow(n, 2.0 * sigma);
    inv_sq[static_cast<std::size_t>(n)] = 1.0 / (static_cast<double>(n) * n);
  }
  const std::size_t kmax = 2 * um * um + 1;
  std::vector<double> kernel(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) kernel[k] = std::pow(1.0 + static_cast<double>(k), -beta);

  // I1 contributions bucketed by the largest index so that every N in the
  // list is a prefix sum. The summand is symmetric in n1 <-> n3.
  std::vector<double> bucket(um + 1, 0.0);
  for (int n1 = 1; n1 <= M; ++n1)
    for (int n3 = n1; n3 <= M; ++n3) {
      const double sym = n1 == n3 ? 1.0 : 2.0;
      for (int n2 = 1; n2 <= M; ++n2) {
        const double base = sym * inv_sq[static_cast<std::size_t>(n1)] * inv_sq[static_cast<std::size_t>(n2)] *
                            inv_sq[static_cast<std::size_t>(n3)];
        const int inner = std::max({n1, n2, n3});
        const long long shift = static_cast<long long>(n1) * n1 - static_cast<long long>(n2) * n2 +
                                static_cast<long long>(n3) * n3;
        const int hi = std::min(M, n1 + n2 + n3);
        for (int n = ((n1 + n2 + n3) % 2 == 0) ? 2 : 1; n <= hi; n += 2) {
          const int m = overlap(n, n2, n1, n3);
          if (m == 0) continue;
          const long long omega = static_cast<long long>(n) * n - shift;
          const double term = n2s[static_cast<std::size_t>(n)] * m * m * kernel[static_cast<std::size_t>(std::llabs(omega))] * base;
          bucket[static_cast<std::size_t>(std::max(inner, n))] += term;
        }
      }
    }
  std::vector<double> cumulative(um + 1, 0.0);
  for (std::size_t k = 1; k <= um; ++k) cumulative[k] = cumulative[k - 1] + bucket[k];

  for (int N : Ns) {
    PicardSums row;
    row.N = N;
    row.i1 = kTwoOverPi * kTwoOverPi * cumulative[static_cast<std::size_t>(N)];
    double i2 = 0.0;
    for (int n = 1; n <= N; ++n)
      for (int n2 = 1; n2 <= N; ++n2) {
        double a = 0.0;
        for (int n1 = 1; n1 <= N; ++n1) a += overlap(n, n2, n1, n1) * inv_sq[static_cast<std::size_t>(n1)];
        if (a == 0.0) continue;
        const auto k = static_cast<std::size_t>(std::llabs(static_cast<long long>(n2) * n2 - static_cast<long long>(n) * n));
        i2 += n2s[static_cast<std::size_t>(n)] * kernel[k] * a * a * inv_sq[static_cast<std::size_t>(n2)];
      }
    row.i2 = kTwoOverPi * kTwoOverPi * i2;
    report.rows.push_back(row);
  }
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    report.i1_increments.push_back(report.rows[k].i1 - report.rows[k - 1].i1);
    report.i2_increments.push_back(report.rows[k].i2 - report.rows[k - 1].i2);
  }
  return report;
}

PicardSumsReport picard_moment_sums(double sigma, double beta, int N_max) {
  std::vector<int> Ns;
  if (N_max >= 2) Ns.push_back(N_max / 2);
  Ns.push_back(N_max);
  return picard_moment_sums(sigma, beta, Ns);
}

double ZonalField::l2_norm_sq() const {
  double s = 0.0;
  for (const auto& v : b) s += std::norm(v);
  return s;
}

double ZonalField::sobolev_norm_sq(double sigma) const {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += std::pow(static_cast<double>(i + 1), 2.0 * sigma) * std::norm(b[i]);
  return s;
}

complex ZonalField::eval(double theta) const {
  complex s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * zonal_p(static_cast<int>(i + 1), theta);
  return s;
}

std::vector<complex> zonal_gaussians(int N, std::uint64_t seed, std::uint64_t sample) {
  std::vector<complex> g(static_cast<std::size_t>(std::max(N, 0)));
  for (int n = 1; n <= N; ++n) g[static_cast<std::size_t>(n - 1)] = complex_gaussian(seed, sample, static_cast<std::uint32_t>(n));
  return g;
}

ZonalField sample_u1(int N, std::uint64_t seed, double t, std::uint64_t sample) {
  if (N < 1) throw std::domain_error("sample_u1: N must be >= 1");
  ZonalField u;
  u.b = zonal_gaussians(N, seed, sample);
  for (int n = 1; n <= N; ++n) {
    const double nn = static_cast<double>(n) * n;
    u.b[static_cast<std::size_t>(n - 1)] *= std::exp(-kI * (t * nn)) / static_cast<double>(n);
  }
  return u;
}

double PicardSample::sobolev_norm_sq(double sigma) const {
  double s = 0.0;
  for (std::size_t i = 0; i < v2.size(); ++i) s += std::pow(static_cast<double>(i + 1), 2.0 * sigma) * std::norm(v2[i]);
  return s;
}

namespace {

// Visits every nonzero (n, n1, n2, n3) term with n1 <= n3, passing the
// symmetry factor, the integer m, the product g1 conj(g2) g3 / (n1 n2 n3)
// and Omega = n^2 - n1^2 + n2^2 - n3^2.
template <class Visit>
void for_each_term(std::span<const complex> g, Visit&& visit) {
  const int N = static_cast<int>(g.size());
  for (int n1 = 1; n1 <= N; ++n1)
    for (int n3 = n1; n3 <= N; ++n3) {
      const double sym = n1 == n3 ? 1.0 : 2.0;
      const complex g13 = g[static_cast<std::size_t>(n1 - 1)] * g[static_cast<std::size_t>(n3 - 1)] /
                          (static_cast<double>(n1) * n3);
      for (int n2 = 1; n2 <= N; ++n2) {
        const complex prod = sym * g13 * std::conj(g[static_cast<std::size_t>(n2 - 1)]) / static_cast<double>(n2);
        const long long shift = static_cast<long long>(n1) * n1 - static_cast<long long>(n2) * n2 +
                                static_cast<long long>(n3) * n3;
        const int hi = n1 + n2 + n3;
        for (int n = (hi % 2 == 0) ? 2 : 1; n <= hi; n += 2) {
          const int m = overlap(n, n2, n1, n3);
          if (m == 0) continue;
          visit(n, m, prod, static_cast<long long>(n) * n - shift);
        }
      }
    }
}

}  // namespace

PicardSample compute_v2(std::span<const complex> gaussians, double t) {
  const int N = static_cast<int>(gaussians.size());
  PicardSample out;
  out.gaussians.assign(gaussians.begin(), gaussians.end());
  out.t = t;
  out.v2.assign(static_cast<std::size_t>(3 * N), complex(0.0));
  if (N == 0 || t == 0.0) return out;
  const long long omega_min = 2 - 2LL * N * N;
  const long long omega_max = 10LL * N * N;
  std::vector<complex> phase(static_cast<std::size_t>(omega_max - omega_min + 1));
  for (long long w = omega_min; w <= omega_max; ++w) {
    phase[static_cast<std::size_t>(w - omega_min)] = duhamel_phase(static_cast<double>(w), t);
  }
  for_each_term(gaussians, [&](int n, int m, complex prod, long long omega) {
    out.v2[static_cast<std::size_t>(n - 1)] += static_cast<double>(m) * prod * phase[static_cast<std::size_t>(omega - omega_min)];
  });
  for (int n = 1; n <= 3 * N; ++n) {
    const double nn = static_cast<double>(n) * n;
    out.v2[static_cast<std::size_t>(n - 1)] *= -kI * kTwoOverPi * std::exp(-kI * (t * nn));
  }
  return out;
}

PicardSample compute_v2(int N, std::uint64_t seed, double t, std::uint64_t sample) {
  if (N < 1) throw std::domain_error("compute_v2: N must be >= 1");
  if (N > 64) throw std::domain_error("compute_v2: N must be <= 64");
  return compute_v2(zonal_gaussians(N, seed, sample), t);
}

PicardSpectrum picard_spectrum(std::span<const complex> gaussians) {
  const int N = static_cast<int>(gaussians.size());
  if (N > 16) throw std::domain_error("picard_spectrum: N must be <= 16");
  PicardSpectrum s;
  s.N = N;
  s.omega_min = 2 - 2 * N * N;
  s.width = 10 * N * N - s.omega_min + 1;
  s.amplitudes.assign(static_cast<std::size_t>(3 * N) * static_cast<std::size_t>(s.width), complex(0.0));
  for_each_term(gaussians, [&](int n, int m, complex prod, long long omega) {
    s.amplitudes[static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(s.width) +
                 static_cast<std::size_t>(omega - s.omega_min)] += kTwoOverPi * m * prod;
  });
  return s;
}

complex PicardSpectrum::coefficient(int n, double t) const {
  complex sum = 0.0;
  const complex* row = amplitudes.data() + static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(width);
  for (int k = 0; k < width; ++k) {
    if (row[k] != 0.0) sum += row[k] * duhamel_phase(omega_min + k, t);
  }
  const double nn = static_cast<double>(n) * n;
  return -kI * std::exp(-kI * (t * nn)) * sum;
}

std::string to_string(MomentMode mode) {
  return mode == MomentMode::kFixedTimeHsigma ? "fixed_time_hsigma" : "discrete_xsb";
}

MomentMode parse_moment_mode(const std::string& name) {
  if (name == "fixed_time_hsigma" || name == "hsigma") return MomentMode::kFixedTimeHsigma;
  if (name == "discrete_xsb" || name == "xsb") return MomentMode::kDiscreteXsb;
  throw std::invalid_argument("unknown moment mode '" + name + "' (expected fixed_time_hsigma or discrete_xsb)");
}

double discrete_xsb_norm_sq(std::span<const complex> gaussians, double sigma, const XsbGrid& grid) {
  if (grid.samples < 8 || !(grid.T > 0.0)) throw std::domain_error("discrete_xsb_norm_sq: invalid time grid");
  const PicardSpectrum spec = picard_spectrum(gaussians);
  const int M = grid.samples;
  const double dt = 2.0 * grid.T / M;
  const double dtau = 2.0 * std::numbers::pi / (M * dt);
  std::vector<double> times(static_cast<std::size_t>(M));
  std::vector<double> window(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    times[static_cast<std::size_t>(j)] = -grid.T + j * dt;
    const double c = std::cos(0.5 * std::numbers::pi * times[static_cast<std::size_t>(j)] / grid.T);
    window[static_cast<std::size_t>(j)] = c * c;
  }
  // Duhamel phases for every frequency present, shared by all modes.
  std::vector<char> used(static_cast<std::size_t>(spec.width), 0);
  for (int n = 1; n <= 3 * spec.N; ++n)
    for (int k = 0; k < spec.width; ++k)
      if (spec.amplitudes[static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(spec.width) + static_cast<std::size_t>(k)] != 0.0)
        used[static_cast<std::size_t>(k)] = 1;
  std::vector<int> active;
  for (int k = 0; k < spec.width; ++k)
    if (used[static_cast<std::size_t>(k)]) active.push_back(k);
  std::vector<complex> phases(active.size() * static_cast<std::size_t>(M));
  for (std::size_t a = 0; a < active.size(); ++a)
    for (int j = 0; j < M; ++j)
      phases[a * static_cast<std::size_t>(M) + static_cast<std::size_t>(j)] =
          duhamel_phase(spec.omega_min + active[a], times[static_cast<std::size_t>(j)]);
  std::vector<complex> twiddle(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) twiddle[static_cast<std::size_t>(j)] = std::polar(1.0, -2.0 * std::numbers::pi * j / M);

  double total = 0.0;
  std::vector<complex> d(static_cast<std::size_t>(M));
  for (int n = 1; n <= 3 * spec.N; ++n) {
    const complex* row = spec.amplitudes.data() + static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(spec.width);
    std::fill(d.begin(), d.end(), complex(0.0));
    bool any = false;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const complex amp = row[active[a]];
      if (amp == 0.0) continue;
      any = true;
      const complex* ph = phases.data() + a * static_cast<std::size_t>(M);
      for (int j = 0; j < M; ++j) d[static_cast<std::size_t>(j)] += amp * ph[j];
    }
    if (!any) continue;
    for (int j = 0; j < M; ++j) d[static_cast<std::size_t>(j)] *= -kI * window[static_cast<std::size_t>(j)];
    double mode_sum = 0.0;
    for (int k = -M / 2; k < M / 2; ++k) {
      complex acc = 0.0;
      const int kk = (k + M) % M;
      for (int j = 0; j < M; ++j) {
        acc += d[static_cast<std::size_t>(j)] * twiddle[static_cast<std::size_t>((static_cast<long long>(kk) * j) % M)];
      }
      const double tau = k * dtau;
      mode_sum += std::pow(1.0 + tau * tau, grid.b) * std::norm(acc * dt);
    }
    total += std::pow(static_cast<double>(n), 2.0 * sigma) * mode_sum * dtau / (2.0 * std::numbers::pi);
  }
  return total;
}

MomentReport v2_moment(double sigma, std::span<const int> N_list, double t,
                       std::size_t sample_count, std::uint64_t seed, MomentMode mode, int workers,
                       const XsbGrid& grid) {
  if (!(sigma < 0.5)) {
    throw std::domain_error("v2_moment: sigma must be below 1/2 (the second iterate is only controlled in H^sigma for sigma < 1/2)");
  }
  MomentReport report;
  report.sigma = sigma;
  report.t = t;
  report.mode = mode;
  report.samples = sample_count;
  report.grid = grid;
  if (sample_count == 0 || N_list.empty()) return report;
  std::vector<int> Ns(N_list.begin(), N_list.end());
  std::sort(Ns.begin(), Ns.end());
  const int n_max = Ns.back();
  const std::size_t levels = Ns.size();
  std::vector<double> values(sample_count * levels);
  parallel_for(sample_count, workers, [&](std::size_t i) {
    const auto g = zonal_gaussians(n_max, seed, i);
    for (std::size_t l = 0; l < levels; ++l) {
      std::span<const complex> gl(g.data(), static_cast<std::size_t>(Ns[l]));
      values[i * levels + l] = mode == MomentMode::kFixedTimeHsigma
                                   ? compute_v2(gl, t).sobolev_norm_sq(sigma)
                                   : discrete_xsb_norm_sq(gl, sigma, grid);
    }
  });
  auto mean_se = [&](auto&& get) {
    double s = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
      const double v = get(i);
      s += v;
      ss += v * v;
    }
    const auto n = static_cast<double>(sample_count);
    const double m = s / n;
    const double se = sample_count > 1 ? std::sqrt(std::max(0.0, ss / n - m * m) / (n - 1.0)) : 0.0;
    return std::pair{m, se};
  };
  for (std::size_t l = 0; l < levels; ++l) {
    MomentRow row;
    row.N = Ns[l];
    std::tie(row.estimate, row.stderr_) = mean_se([&](std::size_t i) { return values[i * levels + l]; });
    if (l > 0) {
      std::tie(row.increment, row.increment_se) =
          mean_se([&](std::size_t i) { return values[i * levels + l] - values[i * levels + l - 1]; });
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace gibbsnls
