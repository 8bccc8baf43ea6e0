#include "gibbsnls/bessel_basis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "gibbsnls/bessel.hpp"
#include "gibbsnls/quadrature.hpp"

namespace gibbsnls {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOrthogonalityTol = 1e-9;

}  // namespace

double BesselBasis::eval(int n, double r) const {
  return bessel_j0(zero(n) * r) / l2_raw_norms[static_cast<std::size_t>(n - 1)];
}

double BesselBasis::eval_derivative(int n, double r) const {
  const double z = zero(n);
  return -z * bessel_j1(z * r) / l2_raw_norms[static_cast<std::size_t>(n - 1)];
}

int default_quadrature_order(int N) { return 4 * N + 64; }

BasisPtr build_basis(int N, int order) {
  if (N < 1) throw std::domain_error("build_basis: N must be >= 1");
  if (order <= 0) order = default_quadrature_order(N);

  auto basis = std::make_shared<BesselBasis>();
  basis->N = N;
  basis->zeros = bessel_zeros(N);
  const QuadratureRule rule = gauss_legendre(order, 0.0, 1.0);
  basis->quad_nodes = rule.nodes;
  basis->quad_weights = rule.weights;
  const std::size_t Q = rule.size();
  basis->disc_weights.resize(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    basis->disc_weights[q] = kTwoPi * rule.weights[q] * rule.nodes[q];
  }

  basis->eigen_samples.resize(static_cast<std::size_t>(N) * Q);
  basis->l2_raw_norms.resize(static_cast<std::size_t>(N));
  std::vector<double> raw(Q);
  for (int n = 1; n <= N; ++n) {
    const double z = basis->zero(n);
    double norm_sq = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      raw[q] = bessel_j0(z * rule.nodes[q]);
      norm_sq += basis->disc_weights[q] * raw[q] * raw[q];
    }
    const double norm = std::sqrt(norm_sq);
    basis->l2_raw_norms[static_cast<std::size_t>(n - 1)] = norm;
    double* dst = basis->eigen_samples.data() + static_cast<std::size_t>(n - 1) * Q;
    for (std::size_t q = 0; q < Q; ++q) dst[q] = raw[q] / norm;
  }

  // Certify orthogonality. Normalization is exact by construction, so the
  // raw-norm cross-check against sqrt(pi)|J1(z_n)| catches under-resolution
  // of the diagonal.
  for (int m = 1; m <= N; ++m) {
    const double expected = std::sqrt(std::numbers::pi) * std::abs(bessel_j1(basis->zero(m)));
    const double got = basis->l2_raw_norms[static_cast<std::size_t>(m - 1)];
    if (std::abs(got - expected) > kOrthogonalityTol) {
      std::ostringstream msg;
      msg << "build_basis: quadrature order " << order << " cannot resolve ||e_" << m
          << "||: raw norm " << got << " vs closed form " << expected;
      throw BasisError(msg.str());
    }
    const auto em = basis->row(m);
    for (int n = m + 1; n <= N; ++n) {
      const auto en = basis->row(n);
      double dot = 0.0;
      for (std::size_t q = 0; q < Q; ++q) dot += basis->disc_weights[q] * em[q] * en[q];
      if (std::abs(dot) > kOrthogonalityTol) {
        std::ostringstream msg;
        msg << "build_basis: quadrature order " << order << " fails orthogonality for pair ("
            << m << ", " << n << "): <e_m, e_n> = " << dot;
        throw BasisError(msg.str());
      }
    }
  }
  return basis;
}

double gram_deviation(const BesselBasis& basis) {
  const std::size_t Q = basis.num_nodes();
  double worst = 0.0;
  for (int m = 1; m <= basis.N; ++m) {
    const auto em = basis.row(m);
    for (int n = m; n <= basis.N; ++n) {
      const auto en = basis.row(n);
      double dot = 0.0;
      for (std::size_t q = 0; q < Q; ++q) dot += basis.disc_weights[q] * em[q] * en[q];
      worst = std::max(worst, std::abs(dot - (m == n ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double lp_norm(const BesselBasis& basis, int n, double p) {
  if (n < 1 || n > basis.N) throw std::out_of_range("lp_norm: mode index out of range");
  if (!(p >= 1.0)) throw std::domain_error("lp_norm: p must be >= 1");
  const auto en = basis.row(n);
  if (std::isinf(p)) {
    // |J0| peaks at the origin; scan the grid, then refine the bracket
    // [0, r_1] by golden section to confirm.
    double best = std::abs(basis.eval(n, 0.0));
    for (double v : en) best = std::max(best, std::abs(v));
    constexpr double inv_phi = 0.6180339887498949;
    double a = 0.0;
    double b = basis.quad_nodes.front();
    for (int it = 0; it < 60; ++it) {
      const double c = b - inv_phi * (b - a);
      const double d = a + inv_phi * (b - a);
      if (std::abs(basis.eval(n, c)) >= std::abs(basis.eval(n, d))) {
        b = d;
      } else {
        a = c;
      }
    }
    return std::max(best, std::abs(basis.eval(n, 0.5 * (a + b))));
  }
  double sum = 0.0;
  for (std::size_t q = 0; q < en.size(); ++q) {
    sum += basis.disc_weights[q] * std::pow(std::abs(en[q]), p);
  }
  return std::pow(sum, 1.0 / p);
}

ExponentFit log_log_fit(std::span<const double> values, std::span<const double> abscissa) {
  if (values.size() != abscissa.size() || values.size() < 2) {
    throw std::domain_error("log_log_fit: need at least two paired points");
  }
  const auto n = static_cast<double>(values.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !(abscissa[i] > 0.0)) {
      throw std::domain_error("log_log_fit: values and abscissae must be positive");
    }
    const double x = std::log(abscissa[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cov = sxy - sx * sy / n;
  const double var_x = sxx - sx * sx / n;
  const double var_y = syy - sy * sy / n;
  ExponentFit fit;
  fit.slope = cov / var_x;
  // A flat sequence is fitted perfectly by slope 0.
  fit.r_squared = var_y <= 1e-300 ? 1.0 : (cov * cov) / (var_x * var_y);
  return fit;
}

ExponentFit asymptotic_exponent_fit(std::span<const double> values, std::span<const int> indices) {
  if (values.size() < 10 || values.size() != indices.size()) {
    throw std::domain_error("asymptotic_exponent_fit: need at least 10 paired points");
  }
  std::vector<double> x(indices.begin(), indices.end());
  return log_log_fit(values, x);
}

double scaling_bump(double r) {
  const double t = 2.0 * r;
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

double scaling_bump_derivative(double r) {
  const double t = 2.0 * r;
  if (std::abs(t) >= 1.0) return 0.0;
  const double denom = 1.0 - t * t;
  return -8.0 * r * scaling_bump(r) / (denom * denom);
}

ScalingReport scaling_counterexample(std::span<const double> lambda_grid) {
  ScalingReport report;
  // Support of v_lambda is r < 1/(2 lambda); integrate there only.
  for (double lambda : lambda_grid) {
    if (!(lambda >= 1.0)) throw std::domain_error("scaling_counterexample: lambda must be >= 1");
    const QuadratureRule rule = gauss_legendre(400, 0.0, 0.5 / lambda);
    double l4 = 0.0, l2 = 0.0, h1 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double r = rule.nodes[q];
      const double area = kTwoPi * rule.weights[q] * r;
      const double v = scaling_bump(lambda * r);
      const double dv = lambda * scaling_bump_derivative(lambda * r);
      l4 += area * v * v * v * v;
      l2 += area * v * v;
      h1 += area * dv * dv;
    }
    report.rows.push_back({lambda, std::pow(l4, 0.25), std::sqrt(l2), std::sqrt(h1)});
  }
  if (report.rows.size() >= 2) {
    std::vector<double> lam, l4, l2, h1;
    for (const auto& row : report.rows) {
      lam.push_back(row.lambda);
      l4.push_back(row.l4);
      l2.push_back(row.l2);
      h1.push_back(row.h1);
    }
    report.l4_exponent = log_log_fit(l4, lam).slope;
    report.l2_exponent = log_log_fit(l2, lam).slope;
    report.h1_exponent = log_log_fit(h1, lam).slope;
  }
  return report;
}

void write_basis_csv(const BesselBasis& basis, std::ostream& out) {
  out << "n,z_n,l2,l4,linf\n";
  char buf[256];
  for (int n = 1; n <= basis.N; ++n) {
    std::snprintf(buf, sizeof buf, "%d,%.15g,%.15g,%.15g,%.15g\n", n, basis.zero(n),
                  lp_norm(basis, n, 2.0), lp_norm(basis, n, 4.0),
                  lp_norm(basis, n, std::numeric_limits<double>::infinity()));
    out << buf;
  }
}

}  // namespace gibbsnls
