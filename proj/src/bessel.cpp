#include "gibbsnls/bessel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gibbsnls {
namespace {

constexpr double kSeriesLimit = 4.0;
constexpr double kHankelLimit = 25.0;

void check_argument(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw std::domain_error("bessel: argument must be finite and nonnegative, got " +
                            std::to_string(x));
  }
}

// Ascending series sum_k (-1)^k (x/2)^{2k+order} / (k! (k+order)!).
double series(int order, double x) {
  const double q = 0.25 * x * x;
  double term = order == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * static_cast<double>(k + order));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Backward recurrence normalized with J0 + 2 sum_k J_{2k} = 1.
// Returns J0 and J1 together since both come out of the same sweep.
void miller(double x, double& j0, double& j1) {
  int start = static_cast<int>(x + 20.0 + 10.0 * std::cbrt(x));
  if (start % 2 == 1) ++start;
  double next = 0.0;    // J_{k+1}
  double cur = 1e-30;   // J_k
  double norm = 0.0;
  double saved_j1 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (k - 1 == 1) saved_j1 = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      saved_j1 *= 1e-250;
    }
  }
  norm += cur;
  j0 = cur / norm;
  j1 = saved_j1 / norm;
}

// Hankel expansion: J_nu(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi).
double hankel(int order, double x) {
  const double mu = 4.0 * order * order;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 120; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::abs(term);
    if (mag > last) break;  // asymptotic series started diverging
    last = mag;
    // k odd contributes to Q, k even to P; signs alternate in pairs.
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 1) {
      q += sign * term;
    } else {
      p += sign * term;
    }
    if (mag < 1e-17) break;
  }
  // chi = x - (order/2 + 1/4) pi; expand cos/sin of the shift exactly.
  const double shift = (0.5 * order + 0.25) * std::numbers::pi;
  const double c = std::cos(x) * std::cos(shift) + std::sin(x) * std::sin(shift);
  const double s = std::sin(x) * std::cos(shift) - std::cos(x) * std::sin(shift);
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * c - q * s);
}

}  // namespace

double bessel_j0(double x) {
  check_argument(x);
  if (x < kSeriesLimit) return series(0, x);
  if (x < kHankelLimit) {
    double j0 = 0.0;
    double j1 = 0.0;
    miller(x, j0, j1);
    return j0;
  }
  return hankel(0, x);
}

double bessel_j1(double x) {
  check_argument(x);
  if (x < kSeriesLimit) return series(1, x);
  if (x < kHankelLimit) {
    double j0 = 0.0;
    double j1 = 0.0;
    miller(x, j0, j1);
    return j1;
  }
  return hankel(1, x);
}

std::vector<double> bessel_zeros(int count) {
  if (count < 1) throw std::domain_error("bessel_zeros: count must be >= 1");
  constexpr double pi = std::numbers::pi;
  std::vector<double> zeros;
  zeros.reserve(static_cast<std::size_t>(count));
  for (int n = 1; n <= count; ++n) {
    double lo = (n - 1) * pi;
    double hi = n * pi + 0.25 * pi;
    double f_lo = bessel_j0(lo);
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      const double f_mid = bessel_j0(mid);
      if ((f_mid > 0.0) == (f_lo > 0.0)) {
        lo = mid;
        f_lo = f_mid;
      } else {
        hi = mid;
      }
    }
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
      const double step = bessel_j0(z) / bessel_j1(z);  // f / (-f') with f' = -J1
      z += step;
      if (std::abs(step) < 1e-16 * z) break;
    }
    zeros.push_back(z);
  }
  return zeros;
}

}  // namespace gibbsnls
