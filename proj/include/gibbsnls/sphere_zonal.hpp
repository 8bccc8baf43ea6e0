#pragma once

#include <complex>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace gibbsnls {

using complex = std::complex<double>;

/// P_n(theta) = sqrt(2/pi) sin(n theta) / sin(theta), orthonormal for
/// sin^2(theta) d theta on [0, pi].
double zonal_p(int n, double theta);

/// Indices {|k-l| + 2j - 1 : j = 1..min(k,l)} with P_k P_l = sqrt(2/pi) sum P_idx.
std::vector<int> product_expand(int k, int l);

/// m with gamma(n,n1,n2,n3) = int P_n P_n1 P_n2 P_n3 = (2/pi) m. Counts the
/// coincidences between the expansions of (n, n3) and (n1, n2) in O(1).
int gamma_count(int n, int n1, int n2, int n3);
/// The same integer from the (n, n1) x (n2, n3) pairing.
int gamma_count_alt(int n, int n1, int n2, int n3);
/// (2/pi) gamma_count.
double gamma_value(int n, int n1, int n2, int n3);

/// Dense table of gamma_count for indices in [1, max_index].
class GammaTensor {
 public:
  explicit GammaTensor(int max_index, int workers = 1);

  [[nodiscard]] int max_index() const { return max_; }
  /// Stored m; 0 for any index outside [1, max_index].
  [[nodiscard]] int m(int n, int n1, int n2, int n3) const;
  [[nodiscard]] double gamma(int n, int n1, int n2, int n3) const;
  [[nodiscard]] std::size_t nonzero_count() const;

  /// Rows (n, n1, n2, n3, m) for nonzero entries.
  void write_csv(std::ostream& out) const;

 private:
  [[nodiscard]] std::size_t offset(int n, int n1, int n2, int n3) const;
  int max_;
  std::vector<std::uint8_t> table_;
};

struct GammaViolation {
  int n = 0, n1 = 0, n2 = 0, n3 = 0;
  std::string law;
};

struct GammaLawReport {
  int max_index = 0;
  std::size_t tuples_checked = 0;
  std::vector<GammaViolation> violations;  ///< first 32 only
  std::size_t violation_count = 0;
  /// max |quadrature gamma - (2/pi) m| over the random tuples.
  double quadrature_max_error = 0.0;
  std::size_t quadrature_tuples = 0;

  [[nodiscard]] bool ok() const { return violation_count == 0 && quadrature_max_error <= 1e-8; }
};

/// Exhaustive sweep over [1, max_index]^4 of m <= min, the triangle law,
/// permutation symmetry and pairing independence, plus a Gauss-Legendre
/// quadrature of gamma on `quadrature_tuples` random tuples.
GammaLawReport gamma_law_check(int max_index, std::uint64_t seed = 1,
                               std::size_t quadrature_tuples = 50);

/// int_0^pi P_n P_n1 P_n2 P_n3 sin^2 by Gauss-Legendre quadrature.
double gamma_quadrature(int n, int n1, int n2, int n3);

struct IhpResult {
  double partial = 0.0;          ///< sum_{n <= n_max}
  double tail_estimate = 0.0;    ///< int_{n_max}^inf f - f(n_max)/2
  double tail_error_bound = 0.0; ///< f(n_max)/2
  double total = 0.0;
  double ratio = 0.0;            ///< total / (1 + |alpha|)^sigma
};

/// sum_n n^{2 sigma} / (1 + |n^2 - alpha|)^beta. Requires sigma in (0, 1/2),
/// 2 beta - 2 sigma > 1 and n_max^2 >= 4 (1 + |alpha|).
IhpResult ihp_sum(double sigma, double beta, double alpha, long long n_max);

struct PicardSums {
  int N = 0;
  double i1 = 0.0;
  double i2 = 0.0;
};

struct PicardSumsReport {
  double sigma = 0.0;
  double beta = 0.0;
  std::vector<PicardSums> rows;  ///< one per requested N, ascending
  /// Increments between consecutive rows.
  std::vector<double> i1_increments;
  std::vector<double> i2_increments;
};

/// Default beta = (sigma + 3/2) / 2, the midpoint of (1/2 + sigma, 1).
double default_picard_beta(double sigma);

/// Partial sums over indices <= N of
///   I1 = sum n^{2s} gamma^2(n,n1,n2,n3) / ((1+|n^2-n1^2+n2^2-n3^2|)^beta (n1 n2 n3)^2)
///   I2 = sum n^{2s} gamma(n,n1,n1,n2) gamma(n,n2,n3,n3) / ((1+|n2^2-n^2|)^beta (n1 n2 n3)^2)
PicardSumsReport picard_moment_sums(double sigma, double beta, std::span<const int> N_list);
/// Single N_max with the N_max/2 comparison.
PicardSumsReport picard_moment_sums(double sigma, double beta, int N_max);

/// Zonal field sum b_n P_n on S^3 with eigenvalues n^2 - 1.
struct ZonalField {
  std::vector<complex> b;

  [[nodiscard]] int size() const { return static_cast<int>(b.size()); }
  [[nodiscard]] static double eigenvalue(int n) { return static_cast<double>(n) * n - 1.0; }
  [[nodiscard]] double l2_norm_sq() const;
  /// sum n^{2 sigma} |b_n|^2.
  [[nodiscard]] double sobolev_norm_sq(double sigma) const;
  [[nodiscard]] complex eval(double theta) const;
};

/// g_n for n <= N from the shared Gaussian streams.
std::vector<complex> zonal_gaussians(int N, std::uint64_t seed, std::uint64_t sample = 0);

/// b_n = (g_n / n) e^{-i t n^2}.
ZonalField sample_u1(int N, std::uint64_t seed, double t, std::uint64_t sample = 0);

struct PicardSample {
  std::vector<complex> gaussians;
  double t = 0.0;
  /// <v2(t), P_n> for n = 1..3N.
  std::vector<complex> v2;

  [[nodiscard]] double sobolev_norm_sq(double sigma) const;
};

/// Second Picard iterate
///   <v2(t), P_n> = -i sum gamma(n,n1,n2,n3) g1 conj(g2) g3/(n1 n2 n3) e^{-itn^2} E(t, Omega),
///   Omega = n^2 - n1^2 + n2^2 - n3^2, E(t, Omega) = (e^{i Omega t} - 1)/(i Omega), E(t, 0) = t.
PicardSample compute_v2(std::span<const complex> gaussians, double t);
PicardSample compute_v2(int N, std::uint64_t seed, double t, std::uint64_t sample = 0);

/// Splits the iterate into frequencies: <v2(t), P_n> = -i e^{-itn^2} sum_Omega A[n][Omega] E(t, Omega).
struct PicardSpectrum {
  int N = 0;
  int omega_min = 0;
  /// amplitudes[(n - 1) * width + (Omega - omega_min)], n = 1..3N
  std::vector<complex> amplitudes;
  int width = 0;

  [[nodiscard]] complex coefficient(int n, double t) const;
};
PicardSpectrum picard_spectrum(std::span<const complex> gaussians);

enum class MomentMode { kFixedTimeHsigma, kDiscreteXsb };
std::string to_string(MomentMode mode);
MomentMode parse_moment_mode(const std::string& name);

struct XsbGrid {
  double T = 1.0;
  int samples = 1024;
  double b = 0.55;
};

/// Windowed discrete X^{sigma,b} norm squared of v2 on [-T, T] with the
/// raised-cosine window cos^2(pi t / 2T):
///   sum_n n^{2 sigma} (1/2pi) sum_k <tau_k>^{2b} |DFT(psi d_n)(tau_k)|^2 dtau,
/// where d_n(t) = e^{itn^2} <v2(t), P_n>.
double discrete_xsb_norm_sq(std::span<const complex> gaussians, double sigma, const XsbGrid& grid);

struct MomentRow {
  int N = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double increment = 0.0;     ///< estimate(N) - estimate(previous N), paired
  double increment_se = 0.0;
};

struct MomentReport {
  double sigma = 0.0;
  double t = 0.0;
  MomentMode mode = MomentMode::kFixedTimeHsigma;
  std::size_t samples = 0;
  XsbGrid grid;
  std::vector<MomentRow> rows;
};

/// Monte Carlo E||v2||^2 per N with common Gaussians across N. sigma >= 1/2
/// is rejected.
MomentReport v2_moment(double sigma, std::span<const int> N_list, double t,
                       std::size_t sample_count, std::uint64_t seed, MomentMode mode,
                       int workers = 1, const XsbGrid& grid = {});

}  // namespace gibbsnls
