#pragma once

#include <complex>
#include <span>
#include <vector>

#include "gibbsnls/bessel_basis.hpp"

namespace gibbsnls {

using complex = std::complex<double>;

/// Radial field u = sum_n a_n e_n in E_N, a_n = <u, e_n>.
/// The H^s-normalized coordinates are c_n = z_n^s a_n, so u = sum c_n e_{n,s}.
class SpectralField {
 public:
  SpectralField(BasisPtr basis, std::vector<complex> a, double s);

  static SpectralField zero(BasisPtr basis, int N, double s);
  static SpectralField from_c(BasisPtr basis, std::span<const complex> c, double s);

  [[nodiscard]] int size() const { return static_cast<int>(a_.size()); }
  [[nodiscard]] double s() const { return s_; }
  [[nodiscard]] const BesselBasis& basis() const { return *basis_; }
  [[nodiscard]] const BasisPtr& basis_ptr() const { return basis_; }

  [[nodiscard]] std::span<const complex> a() const { return a_; }
  [[nodiscard]] std::span<complex> a_mut() { return a_; }
  [[nodiscard]] complex a(int n) const { return a_[static_cast<std::size_t>(n - 1)]; }

  [[nodiscard]] std::vector<complex> c() const;
  [[nodiscard]] complex c(int n) const;

  /// sum |a_n|^2.
  [[nodiscard]] double l2_norm_sq() const;
  /// sum z_n^{-2s} |c_n|^2; equal to l2_norm_sq up to rounding.
  [[nodiscard]] double l2_norm_sq_from_c() const;

  /// u(r_q) on the basis quadrature grid.
  [[nodiscard]] std::vector<complex> synthesize() const;

 private:
  BasisPtr basis_;
  std::vector<complex> a_;
  double s_;
};

/// values[q] = sum_{n<=a.size()} a_n e_n(r_q).
void synthesize(const BesselBasis& basis, std::span<const complex> a, std::span<complex> values);

/// out[n-1] = <f, e_n> = sum_q 2 pi w_q r_q f(r_q) e_n(r_q) for n <= out.size().
void project(const BesselBasis& basis, std::span<const complex> values, std::span<complex> out);

/// (sum z_n^{2 sigma} |a_n|^2)^{1/2}.
double sobolev_norm(const SpectralField& u, double sigma);

/// Lower end of the admissible window for s: max(1/3, 1 - 2/alpha, 1 - 2/beta).
double s_lower_bound(double alpha, double beta);
/// Midpoint of (s_lower_bound, 1/2).
double default_s(double alpha, double beta);
/// Throws std::domain_error naming the window when s is outside it.
void validate_s(double s, double alpha, double beta);

}  // namespace gibbsnls
