#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gibbsnls/bessel_basis.hpp"
#include "gibbsnls/measure.hpp"
#include "gibbsnls/nonlinearity.hpp"

namespace gibbsnls {

struct TailRow {
  double lambda = 0.0;
  double empirical = 0.0;
  double stderr_ = 0.0;  ///< binomial standard error of `empirical`
  double reference = 0.0;
  bool pass = true;
};

/// P(|sum c_n g_n| > lambda) against 4 exp(-lambda^2 / (2 sum |c_n|^2)).
/// Sample i uses the Gaussians keyed (seed, i, n), so rescaling c leaves the
/// draws unchanged.
std::vector<TailRow> tail_subgaussian_test(std::span<const complex> c,
                                           std::span<const double> lambda_grid,
                                           std::size_t sample_count, std::uint64_t seed,
                                           int workers = 1);

struct ChiSquareReport {
  int card = 0;
  /// `reference` is the exact Gamma(card, 1) tail e^{-lambda} sum_{j<card} lambda^j/j!.
  std::vector<TailRow> rows;
  double fitted_c2 = 0.0;
};

/// Exact P(Gamma(card, 1) > lambda).
double gamma_tail(int card, double lambda);

/// P(sum_{n<=card} |g_n|^2 > lambda) and the fitted exponential rate c2,
/// taken as minus the slope of log P over [card + sqrt(card), lambda_100] where
/// lambda_100 is the 100th largest sample.
ChiSquareReport tail_chisquare_test(int card, std::span<const double> lambda_grid,
                                    std::size_t sample_count, std::uint64_t seed);

struct SobolevTailPair {
  int N = 0;
  int M = 0;
  std::vector<TailRow> rows;
  /// Slope of log P against lambda^2 over rows with at least 10 exceedances;
  /// NaN when fewer than two such rows.
  double slope_vs_lambda_sq = 0.0;
};

struct SobolevTailReport {
  double sigma = 0.0;
  std::vector<SobolevTailPair> pairs;
  double trend_lambda = 0.0;
  /// Slope of log P(trend_lambda) against 2(1-sigma) log(1+N) across pairs.
  double trend_slope = 0.0;
};

/// P(||S_M phi - S_N phi||_{H^sigma} > lambda) for each (N, M).
SobolevTailReport tail_sobolev_test(const BesselBasis& basis, double sigma,
                                    std::span<const std::pair<int, int>> pairs,
                                    std::span<const double> lambda_grid, std::size_t samples,
                                    std::uint64_t seed, double trend_lambda);

struct ConvergencePair {
  int N = 0;
  int M = 0;
  double mean_abs_diff = 0.0;
  double stderr_ = 0.0;
  double majorant = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergencePair> pairs;
  /// Geometric mean of mean_abs_diff / majorant.
  double fitted_constant = 0.0;
  bool strictly_decreasing = false;
  /// Every difference is at most 5 * fitted_constant * majorant.
  bool dominated = false;
};

/// sum_{n=N+1}^{M} z_n^{-2} ||e_n||^2_{L^{alpha+2}}.
double potential_tail_majorant(const BesselBasis& basis, int N, int M, double alpha);

/// E_mu |int V(S_N u) - int V(S_M u)| over consecutive entries of N_list,
/// using common samples drawn at the largest N.
ConvergenceReport vN_convergence(const NonlinearityModel& model, const BasisPtr& basis,
                                 std::span<const int> N_list, std::size_t samples,
                                 std::uint64_t seed, int workers = 1);

struct WeightMomentRow {
  int N = 0;
  double p = 1.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// E_mu f_N^p for each N and p with a common cutoff chi.
std::vector<WeightMomentRow> weight_moments(const NonlinearityModel& model, const CutoffChi& chi,
                                            const BasisPtr& basis, std::span<const int> N_list,
                                            std::span<const double> p_list, std::size_t samples,
                                            std::uint64_t seed, int workers = 1);

struct WeightedTailReport {
  std::vector<TailRow> rows;
  double slope_vs_lambda_sq = 0.0;
  double ess = 0.0;
};

/// rho_N-weighted P(||u||_{H^sigma} > lambda) from an ensemble.
WeightedTailReport gibbs_sobolev_tail(const WeightedEnsemble& ensemble, double sigma,
                                      std::span<const double> lambda_grid);

}  // namespace gibbsnls
