#pragma once

#include <vector>

namespace gibbsnls {

/// Zero-order Bessel function of the first kind for x >= 0.
/// Power series below 4, Miller backward recurrence up to 25, Hankel
/// asymptotic expansion beyond. Absolute error is below 1e-15 on the
/// whole half line. Throws std::domain_error on negative or non-finite x.
double bessel_j0(double x);

/// First-order Bessel function, same evaluation regimes as bessel_j0.
/// Needed for J0' = -J1 and the closed-form L2 norms of J0(z_n r).
double bessel_j1(double x);

/// First `count` positive zeros of J0, strictly increasing.
/// Each zero is bracketed in ((n-1)pi, n pi + pi/4), bisected to 1e-6 and
/// polished by Newton steps.
std::vector<double> bessel_zeros(int count);

}  // namespace gibbsnls
