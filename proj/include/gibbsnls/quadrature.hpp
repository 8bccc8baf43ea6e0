#pragma once

#include <vector>

namespace gibbsnls {

/// Gauss-Legendre rule mapped to [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }

  template <class F>
  [[nodiscard]] double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) sum += weights[q] * f(nodes[q]);
    return sum;
  }
};

/// Q-point Gauss-Legendre rule on [a, b]; exact for polynomials of degree 2Q-1.
QuadratureRule gauss_legendre(int order, double a = -1.0, double b = 1.0);

}  // namespace gibbsnls
