#pragma once

#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace gibbsnls {

class BasisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Radial Dirichlet eigenbasis e_n(r) = J0(z_n r) / ||J0(z_n .)||_{L2(disc)}
/// sampled on a Gauss-Legendre grid of [0, 1]. Immutable once built.
struct BesselBasis {
  int N = 0;
  std::vector<double> zeros;          ///< z_1 < ... < z_N
  std::vector<double> quad_nodes;     ///< r_q in (0, 1)
  std::vector<double> quad_weights;   ///< w_q for int_0^1 f(r) dr
  std::vector<double> disc_weights;   ///< 2 pi w_q r_q, i.e. area element on the disc
  std::vector<double> eigen_samples;  ///< row-major N x Q table e_n(r_q)
  std::vector<double> l2_raw_norms;   ///< ||J0(z_n .)||_{L2(disc)}

  [[nodiscard]] std::size_t num_nodes() const { return quad_nodes.size(); }

  /// Samples of e_n on the grid, n is 1-based.
  [[nodiscard]] std::span<const double> row(int n) const {
    return {eigen_samples.data() + static_cast<std::size_t>(n - 1) * num_nodes(), num_nodes()};
  }

  [[nodiscard]] double zero(int n) const { return zeros[static_cast<std::size_t>(n - 1)]; }

  /// Direct evaluation of e_n(r) away from the grid.
  [[nodiscard]] double eval(int n, double r) const;

  /// Radial derivative e_n'(r) = -z_n J1(z_n r) / ||J0(z_n .)||.
  [[nodiscard]] double eval_derivative(int n, double r) const;
};

using BasisPtr = std::shared_ptr<const BesselBasis>;

/// Default quadrature order 4N + 64.
int default_quadrature_order(int N);

/// Builds and certifies the basis: the quadrature Gram matrix must be the
/// identity to 1e-9, otherwise a BasisError names the first failing pair.
/// `order` <= 0 selects the default.
BasisPtr build_basis(int N, int order = 0);

/// Largest |<e_m, e_n> - delta_mn| over the quadrature grid.
double gram_deviation(const BesselBasis& basis);

/// ||e_n||_{L^p(disc)}; p = infinity gives the sup norm.
double lp_norm(const BesselBasis& basis, int n, double p);

struct ExponentFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

/// Least-squares slope of log(values) against log(abscissa); any size >= 2.
ExponentFit log_log_fit(std::span<const double> values, std::span<const double> abscissa);

/// Power-law exponent of a positive sequence indexed by positive integers.
/// Requires at least 10 points.
ExponentFit asymptotic_exponent_fit(std::span<const double> values, std::span<const int> indices);

/// Compactly supported radial bump exp(-1/(1-(2r)^2)) on r < 1/2 and its derivative.
double scaling_bump(double r);
double scaling_bump_derivative(double r);

struct ScalingRow {
  double lambda = 1.0;
  double l4 = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;  ///< Dirichlet seminorm ||grad v_lambda||_{L2}
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double l4_exponent = 0.0;
  double l2_exponent = 0.0;
  double h1_exponent = 0.0;
};

/// Norms of v_lambda(x) = v(lambda x) for the built-in bump, with fitted exponents.
ScalingReport scaling_counterexample(std::span<const double> lambda_grid);

/// CSV rows (n, z_n, L2, L4, Linf), 15 significant digits.
void write_basis_csv(const BesselBasis& basis, std::ostream& out);

}  // namespace gibbsnls
