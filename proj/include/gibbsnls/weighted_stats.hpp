#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace gibbsnls {

/// Self-normalized sum w_i x_i / sum w_i.
double weighted_mean(std::span<const double> values, std::span<const double> weights);

/// Standard deviation of the weighted mean over `reps` bootstrap resamples
/// (indices drawn uniformly with replacement, weights carried along).
/// Resample r uses the stream (seed, stream_base + r, resample).
double bootstrap_se(std::span<const double> values, std::span<const double> weights,
                    std::size_t reps, std::uint64_t seed, std::uint64_t stream_base = 0);

/// sup_x |F_x(x) - F_y(x)| for weighted empirical CDFs.
double weighted_ks_statistic(std::span<const double> x, std::span<const double> wx,
                             std::span<const double> y, std::span<const double> wy);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Weighted KS with a bootstrap null: both groups are resampled from the
/// pooled weighted sample, p = (1 + #{D* >= D}) / (1 + reps).
KsResult weighted_ks_test(std::span<const double> x, std::span<const double> wx,
                          std::span<const double> y, std::span<const double> wy, std::size_t reps,
                          std::uint64_t seed, std::uint64_t stream_base = 0);

/// (mean_b - mean_a) / sqrt(se_a^2 + se_b^2), and 0 when the means coincide.
double pooled_z(double mean_a, double se_a, double mean_b, double se_b);

}  // namespace gibbsnls
