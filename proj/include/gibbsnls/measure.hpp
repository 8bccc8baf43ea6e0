#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbsnls/bessel_basis.hpp"
#include "gibbsnls/nonlinearity.hpp"
#include "gibbsnls/spectral_field.hpp"

namespace gibbsnls {

/// chi(x) = 1 on [0, Lambda], affine down to 0 on [Lambda, Lambda + delta],
/// 0 beyond. Lambda = +inf disables the cutoff.
struct CutoffChi {
  double lambda = std::numeric_limits<double>::infinity();
  double delta = 0.0;

  CutoffChi() = default;
  CutoffChi(double lambda_, double delta_);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] bool enabled() const { return std::isfinite(lambda); }
};

/// Lambda = 3 (sum_{n<=N} z_n^{-2})^{1/2}, delta = Lambda/4.
CutoffChi default_cutoff(const BesselBasis& basis, int N);

/// phi_N = sum_{n<=N} g_n/z_n e_n with g_n keyed by (seed, sample_index, n).
SpectralField sample_free(const BasisPtr& basis, int N, std::uint64_t seed,
                          std::uint64_t sample_index, double s);
/// Convenience overload: sample_index 0, s = 5/12.
SpectralField sample_free(const BasisPtr& basis, int N, std::uint64_t seed);

/// int_disc V(u) via the basis quadrature.
double integral_V(const NonlinearityModel& model, const SpectralField& u);
double integral_V(const NonlinearityModel& model, const BesselBasis& basis,
                  std::span<const complex> a);

/// chi(||u||_{L2}) exp(-int V(u)).
double gibbs_weight(const NonlinearityModel& model, const CutoffChi& chi, const SpectralField& u);

/// log kappa_N = sum_{n<=N} [(2 - 2s) log z_n - log pi].
double log_kappa(const BesselBasis& basis, int N, double s);

enum class SamplerMode { kImportance, kRejection };
std::string to_string(SamplerMode mode);
SamplerMode parse_sampler_mode(const std::string& name);

struct WeightedEnsemble {
  std::vector<SpectralField> samples;
  std::vector<double> weights;
  SamplerMode mode = SamplerMode::kImportance;
  double ess = 0.0;
  std::uint64_t master_seed = 0;
  /// Candidates drawn from mu_N; equals samples.size() in importance mode.
  std::uint64_t candidates = 0;
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] double acceptance_rate() const {
    return candidates == 0 ? 0.0 : static_cast<double>(samples.size()) / static_cast<double>(candidates);
  }
};

/// (sum w)^2 / sum w^2. Throws std::domain_error when the weights sum to 0.
double effective_sample_size(std::span<const double> weights);

struct GibbsSamplerOptions {
  SamplerMode mode = SamplerMode::kImportance;
  double s = -1.0;  ///< <= 0 selects default_s(alpha, beta)
  int workers = 1;
  /// Rejection mode stops after count * max_candidate_factor candidates.
  std::uint64_t max_candidate_factor = 100000;
};

/// Draws `count` fields from rho_N. Importance mode reweights mu_N samples by
/// f_N; rejection mode keeps candidate k with probability f_N using a uniform
/// keyed by (seed, k, acceptance). Output is independent of `workers`.
WeightedEnsemble sample_gibbs(const NonlinearityModel& model, const CutoffChi& chi,
                              const BasisPtr& basis, int N, std::size_t count, std::uint64_t seed,
                              const GibbsSamplerOptions& options = {});

/// Rows (sample_index, n, re, im, weight).
void write_ensemble_csv(const WeightedEnsemble& ensemble, std::ostream& out);

nlohmann::json ensemble_manifest(const WeightedEnsemble& ensemble, const NonlinearityModel& model,
                                 const CutoffChi& chi, int N);

}  // namespace gibbsnls
