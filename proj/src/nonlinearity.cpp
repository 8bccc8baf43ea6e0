#include "gibbsnls/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gibbsnls/bessel_basis.hpp"

namespace gibbsnls {
namespace {

constexpr double kComplexStep = 1e-20;
constexpr double kSlopeTolerance = 0.05;

void validate_exponents(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 4.0)) {
    throw std::domain_error("nonlinearity: alpha must lie in (0, 4), got " + std::to_string(alpha));
  }
  if (!(beta >= 2.0 && beta < 4.0)) {
    throw std::domain_error("nonlinearity: beta must lie in [2, 4), got " + std::to_string(beta));
  }
}

// Largest ratio and the growth slope of the ratio over the upper half of the grid.
BoundCheck fit_bound(const std::vector<double>& moduli, const std::vector<double>& ratios) {
  BoundCheck check;
  check.fitted_c = 0.0;
  for (double r : ratios) check.fitted_c = std::max(check.fitted_c, r);
  std::vector<double> xs, ys;
  const std::size_t start = moduli.size() / 2;
  for (std::size_t i = start; i < moduli.size(); ++i) {
    if (ratios[i] > 0.0) {
      xs.push_back(1.0 + moduli[i]);
      ys.push_back(ratios[i]);
    }
  }
  check.holds = xs.size() < 2 || log_log_fit(ys, xs).slope <= kSlopeTolerance;
  return check;
}

}  // namespace

std::string to_string(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::kSaturated: return "saturated";
    case PotentialFamily::kPureQuartic: return "pure_quartic";
    case PotentialFamily::kCustom: return "custom";
  }
  return "custom";
}

PotentialFamily parse_family(const std::string& name) {
  if (name == "saturated") return PotentialFamily::kSaturated;
  if (name == "pure_quartic") return PotentialFamily::kPureQuartic;
  if (name == "custom") return PotentialFamily::kCustom;
  throw std::invalid_argument("unknown nonlinearity family '" + name +
                              "' (expected saturated, pure_quartic or custom)");
}

NonlinearityModel::NonlinearityModel(PotentialFamily family, double alpha, double beta,
                                     bool nonnegative, std::string label)
    : family_(family), alpha_(alpha), beta_(beta), nonnegative_(nonnegative), label_(std::move(label)) {
  validate_exponents(alpha, beta);
}

NonlinearityModel NonlinearityModel::saturated(double alpha, double beta_defocus) {
  return {PotentialFamily::kSaturated, alpha, beta_defocus, true, "saturated"};
}

NonlinearityModel NonlinearityModel::pure_quartic(double beta_defocus) {
  return {PotentialFamily::kPureQuartic, 2.0, beta_defocus, true, "pure_quartic"};
}

NonlinearityModel NonlinearityModel::custom(ExtendedPotential potential, double alpha,
                                            double beta_defocus, bool nonnegative, std::string label) {
  NonlinearityModel model(PotentialFamily::kCustom, alpha, beta_defocus, nonnegative, std::move(label));
  model.extended_ = std::move(potential);
  return model;
}

NonlinearityModel NonlinearityModel::custom_real(RealPotential potential, double alpha,
                                                 double beta_defocus, bool nonnegative,
                                                 std::string label) {
  NonlinearityModel model(PotentialFamily::kCustom, alpha, beta_defocus, nonnegative, std::move(label));
  model.real_ = std::move(potential);
  return model;
}

NonlinearityModel NonlinearityModel::free_probe() {
  return custom([](complex, complex) { return complex(0.0); }, 2.0, 2.0, true, "free");
}

complex NonlinearityModel::eval_extended(complex x, complex y) const {
  if (!extended_) {
    throw UnsupportedError("nonlinearity '" + label_ +
                           "' has no complex-extendable evaluator; derivatives unavailable");
  }
  return extended_(x, y);
}

double NonlinearityModel::potential(complex z) const {
  const double w = std::norm(z);
  switch (family_) {
    case PotentialFamily::kSaturated:
      return (2.0 / (alpha_ + 2.0)) * std::pow(1.0 + w, 0.5 * (alpha_ + 2.0));
    case PotentialFamily::kPureQuartic:
      return 0.5 * w * w;
    case PotentialFamily::kCustom:
      if (real_) return real_(z.real(), z.imag());
      return eval_extended(z.real(), z.imag()).real();
  }
  return 0.0;
}

complex NonlinearityModel::force(complex z) const {
  switch (family_) {
    case PotentialFamily::kSaturated:
      return std::pow(1.0 + std::norm(z), 0.5 * alpha_) * z;
    case PotentialFamily::kPureQuartic:
      return std::norm(z) * z;
    case PotentialFamily::kCustom: {
      // F = dbar V = (V_x + i V_y) / 2, each partial by complex step.
      const double vx = eval_extended(complex(z.real(), kComplexStep), z.imag()).imag() / kComplexStep;
      const double vy = eval_extended(z.real(), complex(z.imag(), kComplexStep)).imag() / kComplexStep;
      return {0.5 * vx, 0.5 * vy};
    }
  }
  return {};
}

complex NonlinearityModel::wirtinger(complex z, int k1, int k2) const {
  if (k1 < 0 || k2 < 0 || k1 + k2 > 2) {
    throw std::domain_error("wirtinger: only orders with k1 + k2 <= 2 are implemented");
  }
  if (k1 + k2 == 0) return potential(z);
  if (k1 == 0 && k2 == 1) return force(z);
  if (k1 == 1 && k2 == 0) return std::conj(force(z));

  if (family_ != PotentialFamily::kCustom) {
    const double w = std::norm(z);
    double g1 = 0.0;
    double g2 = 0.0;
    if (family_ == PotentialFamily::kSaturated) {
      g1 = std::pow(1.0 + w, 0.5 * alpha_);
      g2 = 0.5 * alpha_ * std::pow(1.0 + w, 0.5 * alpha_ - 1.0);
    } else {
      g1 = w;
      g2 = 1.0;
    }
    if (k1 == 1) return g1 + w * g2;
    if (k1 == 2) return g2 * std::conj(z) * std::conj(z);
    return g2 * z * z;
  }

  // Hybrid complex-step / central-difference second derivatives.
  const double delta = 1e-5 * std::max(1.0, std::abs(z));
  const double x = z.real();
  const double y = z.imag();
  const auto dx = [&](double xs, double ys) {
    return eval_extended(complex(xs, kComplexStep), ys).imag() / kComplexStep;
  };
  const auto dy = [&](double xs, double ys) {
    return eval_extended(xs, complex(ys, kComplexStep)).imag() / kComplexStep;
  };
  const double vxx = (dx(x + delta, y) - dx(x - delta, y)) / (2.0 * delta);
  const double vyy = (dy(x, y + delta) - dy(x, y - delta)) / (2.0 * delta);
  const double vxy = (dx(x, y + delta) - dx(x, y - delta)) / (2.0 * delta);
  if (k1 == 1) return 0.25 * (vxx + vyy);
  if (k1 == 2) return 0.25 * complex(vxx - vyy, -2.0 * vxy);
  return 0.25 * complex(vxx - vyy, 2.0 * vxy);
}

BoundCheck verify_growth(const NonlinearityModel& model, int k1, int k2,
                         std::span<const double> modulus_grid) {
  if (!model.differentiable() && k1 + k2 > 0) {
    throw UnsupportedError("verify_growth: model '" + model.label() +
                           "' has no differentiable evaluator");
  }
  const double exponent = 2.0 + model.alpha() - k1 - k2;
  std::vector<double> moduli(modulus_grid.begin(), modulus_grid.end());
  std::sort(moduli.begin(), moduli.end());
  std::vector<double> ratios;
  ratios.reserve(moduli.size());
  for (double rho : moduli) {
    // Sample two phases; gauge invariance makes the modulus phase-independent.
    double worst = 0.0;
    for (double phase : {0.0, 0.7}) {
      const complex z = std::polar(rho, phase);
      worst = std::max(worst, std::abs(model.wirtinger(z, k1, k2)));
    }
    ratios.push_back(worst / std::pow(1.0 + rho, exponent));
  }
  return fit_bound(moduli, ratios);
}

BoundCheck verify_defocusing(const NonlinearityModel& model, std::span<const double> modulus_grid) {
  std::vector<double> moduli(modulus_grid.begin(), modulus_grid.end());
  std::sort(moduli.begin(), moduli.end());
  std::vector<double> ratios;
  ratios.reserve(moduli.size());
  for (double rho : moduli) {
    const double v = model.potential(complex(rho, 0.0));
    ratios.push_back(std::max(0.0, -v) / std::pow(1.0 + rho, model.beta_defocus()));
  }
  return fit_bound(moduli, ratios);
}

std::vector<double> modulus_sweep(double lo, double hi, int count) {
  std::vector<double> grid{0.0};
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    grid.push_back(std::exp(a + (b - a) * i / std::max(1, count - 1)));
  }
  return grid;
}

}  // namespace gibbsnls
