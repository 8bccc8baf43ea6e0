#include "gibbsnls/measure.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gibbsnls/parallel.hpp"
#include "gibbsnls/random_stream.hpp"

namespace gibbsnls {

CutoffChi::CutoffChi(double lambda_, double delta_) : lambda(lambda_), delta(delta_) {
  if (!(lambda > 0.0) || std::isnan(lambda)) throw std::domain_error("cutoff: Lambda must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::domain_error("cutoff: delta must be positive and finite");
}

double CutoffChi::operator()(double x) const {
  if (x <= lambda) return 1.0;
  if (x >= lambda + delta) return 0.0;
  return (lambda + delta - x) / delta;
}

CutoffChi default_cutoff(const BesselBasis& basis, int N) {
  double sum = 0.0;
  for (int n = 1; n <= N; ++n) sum += 1.0 / (basis.zero(n) * basis.zero(n));
  const double lambda = 3.0 * std::sqrt(sum);
  if (lambda == 0.0) return {};
  return {lambda, lambda / 4.0};
}

SpectralField sample_free(const BasisPtr& basis, int N, std::uint64_t seed,
                          std::uint64_t sample_index, double s) {
  if (N < 0 || N > basis->N) throw std::invalid_argument("sample_free: N exceeds basis size");
  std::vector<complex> a(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) {
    a[static_cast<std::size_t>(n - 1)] =
        complex_gaussian(seed, sample_index, static_cast<std::uint32_t>(n)) / basis->zero(n);
  }
  return {basis, std::move(a), s};
}

SpectralField sample_free(const BasisPtr& basis, int N, std::uint64_t seed) {
  return sample_free(basis, N, seed, 0, default_s(2.0, 2.0));
}

double integral_V(const NonlinearityModel& model, const BesselBasis& basis,
                  std::span<const complex> a) {
  std::vector<complex> values(basis.num_nodes());
  synthesize(basis, a, values);
  double sum = 0.0;
  for (std::size_t q = 0; q < values.size(); ++q) sum += basis.disc_weights[q] * model.potential(values[q]);
  return sum;
}

double integral_V(const NonlinearityModel& model, const SpectralField& u) {
  return integral_V(model, u.basis(), u.a());
}

double gibbs_weight(const NonlinearityModel& model, const CutoffChi& chi, const SpectralField& u) {
  const double cut = chi(std::sqrt(u.l2_norm_sq()));
  if (cut == 0.0) return 0.0;
  return cut * std::exp(-integral_V(model, u));
}

double log_kappa(const BesselBasis& basis, int N, double s) {
  double sum = 0.0;
  for (int n = 1; n <= N; ++n) sum += (2.0 - 2.0 * s) * std::log(basis.zero(n)) - std::log(std::numbers::pi);
  return sum;
}

std::string to_string(SamplerMode mode) {
  return mode == SamplerMode::kImportance ? "importance" : "rejection";
}

SamplerMode parse_sampler_mode(const std::string& name) {
  if (name == "importance") return SamplerMode::kImportance;
  if (name == "rejection") return SamplerMode::kRejection;
  throw std::invalid_argument("unknown sampler mode '" + name + "' (expected importance or rejection)");
}

double effective_sample_size(std::span<const double> weights) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : weights) {
    sum += w;
    sum_sq += w * w;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) throw std::domain_error("ensemble weights sum to zero");
  return sum * sum / sum_sq;
}

namespace {

WeightedEnsemble importance(const NonlinearityModel& model, const CutoffChi& chi,
                            const BasisPtr& basis, int N, std::size_t count, std::uint64_t seed,
                            double s, int workers) {
  WeightedEnsemble ens;
  ens.mode = SamplerMode::kImportance;
  ens.master_seed = seed;
  ens.candidates = count;
  std::vector<SpectralField> samples(count, SpectralField::zero(basis, N, s));
  ens.weights.assign(count, 0.0);
  parallel_for(count, workers, [&](std::size_t k) {
    samples[k] = sample_free(basis, N, seed, k, s);
    ens.weights[k] = gibbs_weight(model, chi, samples[k]);
  });
  ens.samples = std::move(samples);
  if (count > 0) ens.ess = effective_sample_size(ens.weights);
  return ens;
}

WeightedEnsemble rejection(const NonlinearityModel& model, const CutoffChi& chi,
                           const BasisPtr& basis, int N, std::size_t count, std::uint64_t seed,
                           double s, int workers, std::uint64_t max_factor) {
  if (!model.certified_nonnegative()) {
    throw UnsupportedError("rejection sampling needs a potential certified V >= 0 (model '" +
                           model.label() + "')");
  }
  WeightedEnsemble ens;
  ens.mode = SamplerMode::kRejection;
  ens.master_seed = seed;
  const std::uint64_t cap = std::max<std::uint64_t>(1, count) * max_factor;
  // Candidates are processed in fixed-size blocks; acceptance of candidate k
  // depends only on k, so the accepted set is a prefix-determined sequence.
  const std::size_t block = std::max<std::size_t>(256, 4 * static_cast<std::size_t>(std::max(workers, 1)));
  std::uint64_t next = 0;
  while (ens.samples.size() < count && next < cap) {
    const std::size_t len = static_cast<std::size_t>(std::min<std::uint64_t>(block, cap - next));
    std::vector<char> accepted(len, 0);
    parallel_for(len, workers, [&](std::size_t j) {
      const std::uint64_t k = next + j;
      const auto u = sample_free(basis, N, seed, k, s);
      const double f = gibbs_weight(model, chi, u);
      const double uni = uniform_pair({seed, k, 0, StreamTag::kAcceptance})[0];
      accepted[j] = uni < f ? 1 : 0;
    });
    for (std::size_t j = 0; j < len && ens.samples.size() < count; ++j) {
      ens.candidates = next + j + 1;
      if (accepted[j]) ens.samples.push_back(sample_free(basis, N, seed, next + j, s));
    }
    next += len;
  }
  ens.weights.assign(ens.samples.size(), 1.0);
  ens.ess = static_cast<double>(ens.samples.size());
  if (ens.samples.size() < count) {
    std::ostringstream msg;
    msg << "rejection sampler stopped after " << ens.candidates << " candidates with "
        << ens.samples.size() << " of " << count << " accepted";
    throw std::runtime_error(msg.str());
  }
  if (count > 0 && ens.acceptance_rate() < 1e-4) {
    std::ostringstream msg;
    msg << "acceptance rate " << ens.acceptance_rate() << " is below 1e-4";
    ens.warnings.push_back(msg.str());
  }
  return ens;
}

}  // namespace

WeightedEnsemble sample_gibbs(const NonlinearityModel& model, const CutoffChi& chi,
                              const BasisPtr& basis, int N, std::size_t count, std::uint64_t seed,
                              const GibbsSamplerOptions& options) {
  if (N < 0 || N > basis->N) throw std::invalid_argument("sample_gibbs: N exceeds basis size");
  const double s = options.s > 0.0 ? options.s : default_s(model.alpha(), model.beta_defocus());
  if (options.mode == SamplerMode::kRejection) {
    return rejection(model, chi, basis, N, count, seed, s, options.workers,
                     options.max_candidate_factor);
  }
  return importance(model, chi, basis, N, count, seed, s, options.workers);
}

void write_ensemble_csv(const WeightedEnsemble& ensemble, std::ostream& out) {
  out << "sample_index,n,re_a,im_a,weight\n";
  char line[160];
  for (std::size_t k = 0; k < ensemble.samples.size(); ++k) {
    const auto& u = ensemble.samples[k];
    for (int n = 1; n <= u.size(); ++n) {
      std::snprintf(line, sizeof line, "%zu,%d,%.17g,%.17g,%.17g\n", k, n, u.a(n).real(),
                    u.a(n).imag(), ensemble.weights[k]);
      out << line;
    }
  }
}

nlohmann::json ensemble_manifest(const WeightedEnsemble& ensemble, const NonlinearityModel& model,
                                 const CutoffChi& chi, int N) {
  nlohmann::json j;
  j["seed"] = ensemble.master_seed;
  j["N"] = N;
  j["count"] = ensemble.size();
  j["mode"] = to_string(ensemble.mode);
  j["s"] = ensemble.samples.empty() ? default_s(model.alpha(), model.beta_defocus())
                                    : ensemble.samples.front().s();
  j["Lambda"] = chi.enabled() ? nlohmann::json(chi.lambda) : nlohmann::json(nullptr);
  j["delta"] = chi.delta;
  j["family"] = to_string(model.family());
  j["alpha"] = model.alpha();
  j["beta_defocus"] = model.beta_defocus();
  j["ess"] = ensemble.ess;
  j["candidates"] = ensemble.candidates;
  if (!ensemble.samples.empty()) {
    const auto& basis = ensemble.samples.front().basis();
    j["log_kappa_N"] = log_kappa(basis, N, ensemble.samples.front().s());
  }
  j["warnings"] = ensemble.warnings;
  return j;
}

}  // namespace gibbsnls
