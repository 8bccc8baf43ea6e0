#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gibbsnls {

using complex = std::complex<double>;

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PotentialFamily { kSaturated, kPureQuartic, kCustom };

std::string to_string(PotentialFamily family);
PotentialFamily parse_family(const std::string& name);

/// Gauge-invariant potential V(z) = G(|z|^2) and force F(z) = G'(|z|^2) z.
///
/// Built-in families carry closed forms for G, G' and G''. Custom models
/// supply V as a function of (x, y) that accepts complex arguments; F and
/// second derivatives then come from complex-step differentiation.
class NonlinearityModel {
 public:
  /// V(x, y) with z = x + i y, analytically extended to complex x and y.
  using ExtendedPotential = std::function<complex(complex x, complex y)>;
  /// V(x, y) evaluable on real arguments only; no derivatives available.
  using RealPotential = std::function<double(double x, double y)>;

  /// (2/(alpha+2)) (1+|z|^2)^{(alpha+2)/2}.
  static NonlinearityModel saturated(double alpha, double beta_defocus = 2.0);
  /// |z|^4 / 2, i.e. the cubic defocusing nonlinearity (alpha = 2).
  static NonlinearityModel pure_quartic(double beta_defocus = 2.0);
  static NonlinearityModel custom(ExtendedPotential potential, double alpha, double beta_defocus,
                                  bool nonnegative, std::string label = "custom");
  static NonlinearityModel custom_real(RealPotential potential, double alpha, double beta_defocus,
                                       bool nonnegative, std::string label = "custom");
  /// V = 0. Linear Schrodinger probe.
  static NonlinearityModel free_probe();

  [[nodiscard]] PotentialFamily family() const { return family_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double beta_defocus() const { return beta_; }
  /// True when V >= 0 is known; required by rejection sampling.
  [[nodiscard]] bool certified_nonnegative() const { return nonnegative_; }
  [[nodiscard]] bool differentiable() const { return family_ != PotentialFamily::kCustom || static_cast<bool>(extended_); }

  [[nodiscard]] double potential(complex z) const;
  [[nodiscard]] complex force(complex z) const;

  /// Wirtinger derivative d^{k1} dbar^{k2} V at z for k1 + k2 <= 2.
  [[nodiscard]] complex wirtinger(complex z, int k1, int k2) const;

 private:
  NonlinearityModel(PotentialFamily family, double alpha, double beta, bool nonnegative,
                    std::string label);

  [[nodiscard]] complex eval_extended(complex x, complex y) const;

  PotentialFamily family_;
  double alpha_;
  double beta_;
  bool nonnegative_;
  std::string label_;
  ExtendedPotential extended_;
  RealPotential real_;
};

struct BoundCheck {
  bool holds = false;
  double fitted_c = 0.0;
};

/// |d^{k1} dbar^{k2} V(z)| <= C (1+|z|)^{2+alpha-k1-k2} on the |z| grid.
/// `holds` is false when the ratio keeps growing over the upper half of the
/// grid (log-log slope above 0.05).
BoundCheck verify_growth(const NonlinearityModel& model, int k1, int k2,
                         std::span<const double> modulus_grid);

/// V(z) >= -C (1+|z|)^{beta_defocus} on the |z| grid, same slope criterion.
BoundCheck verify_defocusing(const NonlinearityModel& model, std::span<const double> modulus_grid);

/// Log-spaced grid of `count` points in [lo, hi] plus the origin.
std::vector<double> modulus_sweep(double lo, double hi, int count);

}  // namespace gibbsnls
