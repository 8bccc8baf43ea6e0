#include "gibbsnls/tails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gibbsnls/parallel.hpp"
#include "gibbsnls/random_stream.hpp"

namespace gibbsnls {
namespace {

double linear_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

// Fraction of `sorted` (ascending) strictly above lambda.
double exceedance(const std::vector<double>& sorted, double lambda, std::size_t* count = nullptr) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), lambda);
  const auto k = static_cast<std::size_t>(sorted.end() - it);
  if (count) *count = k;
  return sorted.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(sorted.size());
}

double binomial_se(double p, std::size_t n) {
  return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

std::vector<TailRow> tail_subgaussian_test(std::span<const complex> c,
                                           std::span<const double> lambda_grid,
                                           std::size_t sample_count, std::uint64_t seed,
                                           int workers) {
  double norm_sq = 0.0;
  for (const auto& v : c) norm_sq += std::norm(v);
  if (norm_sq == 0.0) throw std::domain_error("tail_subgaussian_test: c is identically zero");
  std::vector<double> values(sample_count);
  parallel_for(sample_count, workers, [&](std::size_t i) {
    complex sum = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
      sum += c[n] * complex_gaussian(seed, i, static_cast<std::uint32_t>(n + 1));
    }
    values[i] = std::abs(sum);
  });
  std::sort(values.begin(), values.end());
  std::vector<TailRow> rows;
  for (double lambda : lambda_grid) {
    TailRow row;
    row.lambda = lambda;
    row.empirical = exceedance(values, lambda);
    row.stderr_ = binomial_se(row.empirical, sample_count);
    row.reference = 4.0 * std::exp(-0.5 * lambda * lambda / norm_sq);
    row.pass = row.empirical <= row.reference + 3.0 * row.stderr_;
    rows.push_back(row);
  }
  return rows;
}

double gamma_tail(int card, double lambda) {
  if (lambda <= 0.0) return 1.0;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < card; ++j) {
    term *= lambda / j;
    sum += term;
  }
  return std::exp(-lambda) * sum;
}

ChiSquareReport tail_chisquare_test(int card, std::span<const double> lambda_grid,
                                    std::size_t sample_count, std::uint64_t seed) {
  if (card < 1) throw std::domain_error("tail_chisquare_test: card must be >= 1");
  std::vector<double> values(sample_count);
  for (std::size_t i = 0; i < sample_count; ++i) {
    double sum = 0.0;
    for (int n = 1; n <= card; ++n) sum += std::norm(complex_gaussian(seed, i, static_cast<std::uint32_t>(n)));
    values[i] = sum;
  }
  std::sort(values.begin(), values.end());
  ChiSquareReport report;
  report.card = card;
  for (double lambda : lambda_grid) {
    TailRow row;
    row.lambda = lambda;
    row.empirical = exceedance(values, lambda);
    row.stderr_ = binomial_se(row.empirical, sample_count);
    row.reference = gamma_tail(card, lambda);
    row.pass = std::abs(row.empirical - row.reference) <= 3.0 * std::max(row.stderr_, binomial_se(row.reference, sample_count));
    report.rows.push_back(row);
  }
  report.fitted_c2 = std::numeric_limits<double>::quiet_NaN();
  if (sample_count >= 200) {
    const double lo = card + std::sqrt(static_cast<double>(card));
    const double hi = values[sample_count - 100];
    if (hi > lo) {
      std::vector<double> xs;
      std::vector<double> ys;
      constexpr int kPoints = 20;
      for (int k = 0; k < kPoints; ++k) {
        const double lambda = lo + (hi - lo) * k / (kPoints - 1);
        const double p = exceedance(values, lambda);
        if (p <= 0.0) continue;
        xs.push_back(lambda);
        ys.push_back(std::log(p));
      }
      report.fitted_c2 = -linear_slope(xs, ys);
    }
  }
  return report;
}

SobolevTailReport tail_sobolev_test(const BesselBasis& basis, double sigma,
                                    std::span<const std::pair<int, int>> pairs,
                                    std::span<const double> lambda_grid, std::size_t samples,
                                    std::uint64_t seed, double trend_lambda) {
  SobolevTailReport report;
  report.sigma = sigma;
  report.trend_lambda = trend_lambda;
  std::vector<double> trend_x;
  std::vector<double> trend_y;
  bool trend_ok = true;
  for (const auto& [N, M] : pairs) {
    if (N < 0 || N > M || M > basis.N) throw std::domain_error("tail_sobolev_test: need 0 <= N <= M <= basis.N");
    std::vector<double> weights;
    for (int n = N + 1; n <= M; ++n) weights.push_back(std::pow(basis.zero(n), 2.0 * sigma - 2.0));
    std::vector<double> norms(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      double sum = 0.0;
      for (int n = N + 1; n <= M; ++n) {
        sum += weights[static_cast<std::size_t>(n - N - 1)] *
               std::norm(complex_gaussian(seed, i, static_cast<std::uint32_t>(n)));
      }
      norms[i] = std::sqrt(sum);
    }
    std::sort(norms.begin(), norms.end());
    SobolevTailPair pair;
    pair.N = N;
    pair.M = M;
    std::vector<double> xs;
    std::vector<double> ys;
    for (double lambda : lambda_grid) {
      TailRow row;
      row.lambda = lambda;
      std::size_t hits = 0;
      row.empirical = exceedance(norms, lambda, &hits);
      row.stderr_ = binomial_se(row.empirical, samples);
      row.reference = std::numeric_limits<double>::quiet_NaN();
      pair.rows.push_back(row);
      if (hits >= 10 && row.empirical < 1.0) {
        xs.push_back(lambda * lambda);
        ys.push_back(std::log(row.empirical));
      }
    }
    pair.slope_vs_lambda_sq = linear_slope(xs, ys);
    const double p_trend = exceedance(norms, trend_lambda);
    if (p_trend > 0.0) {
      trend_x.push_back(2.0 * (1.0 - sigma) * std::log(1.0 + N));
      trend_y.push_back(std::log(p_trend));
    } else {
      trend_ok = false;
    }
    report.pairs.push_back(std::move(pair));
  }
  report.trend_slope = trend_ok ? linear_slope(trend_x, trend_y) : -std::numeric_limits<double>::infinity();
  return report;
}

double potential_tail_majorant(const BesselBasis& basis, int N, int M, double alpha) {
  double sum = 0.0;
  for (int n = N + 1; n <= M; ++n) {
    const double norm = lp_norm(basis, n, alpha + 2.0);
    sum += norm * norm / (basis.zero(n) * basis.zero(n));
  }
  return sum;
}

ConvergenceReport vN_convergence(const NonlinearityModel& model, const BasisPtr& basis,
                                 std::span<const int> N_list, std::size_t samples,
                                 std::uint64_t seed, int workers) {
  for (std::size_t i = 1; i < N_list.size(); ++i) {
    if (N_list[i] < N_list[i - 1]) throw std::domain_error("vN_convergence: N_list must be increasing");
  }
  ConvergenceReport report;
  if (N_list.size() < 2) return report;
  const int n_max = N_list.back();
  if (n_max > basis->N) throw std::domain_error("vN_convergence: N exceeds basis size");
  const std::size_t levels = N_list.size();
  std::vector<double> table(samples * levels);
  const double s = default_s(model.alpha(), model.beta_defocus());
  parallel_for(samples, workers, [&](std::size_t i) {
    const auto u = sample_free(basis, n_max, seed, i, s);
    for (std::size_t l = 0; l < levels; ++l) {
      table[i * levels + l] = integral_V(model, *basis, u.a().first(static_cast<std::size_t>(N_list[l])));
    }
  });
  double log_ratio_sum = 0.0;
  int ratio_count = 0;
  for (std::size_t l = 0; l + 1 < levels; ++l) {
    ConvergencePair pair;
    pair.N = N_list[l];
    pair.M = N_list[l + 1];
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double d = std::abs(table[i * levels + l] - table[i * levels + l + 1]);
      sum += d;
      sum_sq += d * d;
    }
    const auto n = static_cast<double>(samples);
    pair.mean_abs_diff = sum / n;
    pair.stderr_ = samples > 1 ? std::sqrt(std::max(0.0, sum_sq / n - pair.mean_abs_diff * pair.mean_abs_diff) / (n - 1.0)) : 0.0;
    pair.majorant = potential_tail_majorant(*basis, pair.N, pair.M, model.alpha());
    if (pair.majorant > 0.0 && pair.mean_abs_diff > 0.0) {
      log_ratio_sum += std::log(pair.mean_abs_diff / pair.majorant);
      ++ratio_count;
    }
    report.pairs.push_back(pair);
  }
  report.fitted_constant = ratio_count > 0 ? std::exp(log_ratio_sum / ratio_count) : 0.0;
  report.strictly_decreasing = true;
  report.dominated = true;
  for (std::size_t k = 0; k < report.pairs.size(); ++k) {
    const auto& p = report.pairs[k];
    if (k > 0 && !(p.mean_abs_diff < report.pairs[k - 1].mean_abs_diff)) report.strictly_decreasing = false;
    if (p.mean_abs_diff > 5.0 * report.fitted_constant * p.majorant) report.dominated = false;
  }
  return report;
}

std::vector<WeightMomentRow> weight_moments(const NonlinearityModel& model, const CutoffChi& chi,
                                            const BasisPtr& basis, std::span<const int> N_list,
                                            std::span<const double> p_list, std::size_t samples,
                                            std::uint64_t seed, int workers) {
  const double s = default_s(model.alpha(), model.beta_defocus());
  std::vector<WeightMomentRow> rows;
  for (int N : N_list) {
    std::vector<double> f(samples);
    parallel_for(samples, workers, [&](std::size_t i) {
      f[i] = gibbs_weight(model, chi, sample_free(basis, N, seed, i, s));
    });
    for (double p : p_list) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (double v : f) {
        const double x = std::pow(v, p);
        sum += x;
        sum_sq += x * x;
      }
      const auto n = static_cast<double>(samples);
      WeightMomentRow row{N, p, sum / n, 0.0};
      if (samples > 1) row.stderr_ = std::sqrt(std::max(0.0, sum_sq / n - row.mean * row.mean) / (n - 1.0));
      rows.push_back(row);
    }
  }
  return rows;
}

WeightedTailReport gibbs_sobolev_tail(const WeightedEnsemble& ensemble, double sigma,
                                      std::span<const double> lambda_grid) {
  WeightedTailReport report;
  if (ensemble.size() == 0) return report;
  report.ess = effective_sample_size(ensemble.weights);
  const double total = std::accumulate(ensemble.weights.begin(), ensemble.weights.end(), 0.0);
  std::vector<double> norms(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) norms[k] = sobolev_norm(ensemble.samples[k], sigma);
  std::vector<double> xs;
  std::vector<double> ys;
  for (double lambda : lambda_grid) {
    double mass = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < norms.size(); ++k) {
      if (norms[k] > lambda) {
        mass += ensemble.weights[k];
        ++hits;
      }
    }
    TailRow row;
    row.lambda = lambda;
    row.empirical = mass / total;
    row.stderr_ = binomial_se(row.empirical, static_cast<std::size_t>(report.ess));
    row.reference = std::numeric_limits<double>::quiet_NaN();
    report.rows.push_back(row);
    if (hits >= 10 && row.empirical < 1.0) {
      xs.push_back(lambda * lambda);
      ys.push_back(std::log(row.empirical));
    }
  }
  report.slope_vs_lambda_sq = linear_slope(xs, ys);
  return report;
}

}  // namespace gibbsnls
