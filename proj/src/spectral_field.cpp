#include "gibbsnls/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gibbsnls {

SpectralField::SpectralField(BasisPtr basis, std::vector<complex> a, double s)
    : basis_(std::move(basis)), a_(std::move(a)), s_(s) {
  if (!basis_) throw std::invalid_argument("SpectralField: null basis");
  if (static_cast<int>(a_.size()) > basis_->N) {
    throw std::invalid_argument("SpectralField: more coefficients than basis modes");
  }
  for (const auto& v : a_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::domain_error("SpectralField: non-finite coefficient");
    }
  }
}

SpectralField SpectralField::zero(BasisPtr basis, int N, double s) {
  return {std::move(basis), std::vector<complex>(static_cast<std::size_t>(N)), s};
}

SpectralField SpectralField::from_c(BasisPtr basis, std::span<const complex> c, double s) {
  std::vector<complex> a(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    a[i] = c[i] * std::pow(basis->zeros[i], -s);
  }
  return {std::move(basis), std::move(a), s};
}

std::vector<complex> SpectralField::c() const {
  std::vector<complex> out(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) out[i] = a_[i] * std::pow(basis_->zeros[i], s_);
  return out;
}

complex SpectralField::c(int n) const { return a(n) * std::pow(basis_->zero(n), s_); }

double SpectralField::l2_norm_sq() const {
  double sum = 0.0;
  for (const auto& v : a_) sum += std::norm(v);
  return sum;
}

double SpectralField::l2_norm_sq_from_c() const {
  const auto cs = c();
  double sum = 0.0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    sum += std::pow(basis_->zeros[i], -2.0 * s_) * std::norm(cs[i]);
  }
  return sum;
}

std::vector<complex> SpectralField::synthesize() const {
  std::vector<complex> values(basis_->num_nodes());
  gibbsnls::synthesize(*basis_, a_, values);
  return values;
}

void synthesize(const BesselBasis& basis, std::span<const complex> a, std::span<complex> values) {
  std::fill(values.begin(), values.end(), complex(0.0));
  const std::size_t Q = basis.num_nodes();
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double re = a[n].real();
    const double im = a[n].imag();
    const double* row = basis.eigen_samples.data() + n * Q;
    auto* out = reinterpret_cast<double*>(values.data());
    for (std::size_t q = 0; q < Q; ++q) {
      out[2 * q] += re * row[q];
      out[2 * q + 1] += im * row[q];
    }
  }
}

void project(const BesselBasis& basis, std::span<const complex> values, std::span<complex> out) {
  const std::size_t Q = basis.num_nodes();
  const auto* in = reinterpret_cast<const double*>(values.data());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double* row = basis.eigen_samples.data() + n * Q;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      const double w = basis.disc_weights[q] * row[q];
      re += w * in[2 * q];
      im += w * in[2 * q + 1];
    }
    out[n] = {re, im};
  }
}

double sobolev_norm(const SpectralField& u, double sigma) {
  double sum = 0.0;
  for (int n = 1; n <= u.size(); ++n) {
    sum += std::pow(u.basis().zero(n), 2.0 * sigma) * std::norm(u.a(n));
  }
  return std::sqrt(sum);
}

double s_lower_bound(double alpha, double beta) {
  return std::max({1.0 / 3.0, 1.0 - 2.0 / alpha, 1.0 - 2.0 / beta});
}

double default_s(double alpha, double beta) { return 0.5 * (s_lower_bound(alpha, beta) + 0.5); }

void validate_s(double s, double alpha, double beta) {
  const double lo = s_lower_bound(alpha, beta);
  if (!(s > lo && s < 0.5)) {
    std::ostringstream msg;
    msg << "s must lie in (max(1/3,1-2/alpha,1-2/beta), 1/2) = (" << lo << ", 0.5); got " << s;
    throw std::domain_error(msg.str());
  }
}

}  // namespace gibbsnls
