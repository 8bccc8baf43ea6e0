#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbsnls/dynamics.hpp"
#include "gibbsnls/measure.hpp"

namespace gibbsnls {

/// Named scalar functionals of a field: l2_norm_sq, h_sigma_norm_sq,
/// c1_abs_sq, c2_abs_sq, c3_abs_sq, re_c1, integral_V, hamiltonian.
class ObservableRegistry {
 public:
  using Functional = std::function<double(const SpectralField&)>;

  explicit ObservableRegistry(const NonlinearityModel& model, double sigma = 0.4);

  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] bool contains(const std::string& name) const;
  /// Throws std::invalid_argument listing the registry for unknown names.
  [[nodiscard]] double evaluate(const std::string& name, const SpectralField& u) const;

 private:
  std::vector<std::string> names_;
  std::vector<Functional> functionals_;
};

struct InvarianceOptions {
  double sigma = 0.4;
  std::size_t bootstrap_reps = 1000;
  std::size_t ks_reps = 1000;
  int workers = 1;
  SamplerMode sampler = SamplerMode::kImportance;
  /// Empty selects every registered observable.
  std::vector<std::string> observables;
  /// A sample whose flow fails is excluded; more than this fraction is an error.
  double max_failure_fraction = 0.01;
};

struct InvarianceEntry {
  std::string observable;
  double t = 0.0;
  double mean0 = 0.0;
  double mean_t = 0.0;
  double pooled_se = 0.0;
  double z = 0.0;
  double ks_statistic = 0.0;
  double ks_p = 1.0;
  /// max_k |obs(Phi_t u_k) - obs(u_k)| over retained samples.
  double max_pathwise_change = 0.0;
};

struct InvarianceReport {
  std::vector<std::string> observables;
  std::vector<double> t_values;
  std::vector<InvarianceEntry> entries;
  std::size_t count = 0;
  std::size_t failures = 0;
  std::vector<std::size_t> failed_samples;
  double ess_before = 0.0;
  double ess_after = 0.0;
  FlowDiagnostics diagnostics;
  std::vector<std::string> warnings;

  [[nodiscard]] const InvarianceEntry& entry(const std::string& observable, double t) const;
  [[nodiscard]] double max_abs_z() const;
  [[nodiscard]] double min_ks_p() const;
  /// |z| <= max_pathwise_change / pooled_se for every entry.
  [[nodiscard]] bool pathwise_consistent() const;
};

nlohmann::json to_json(const InvarianceReport& report);
/// Fixed-width table, one row per (observable, t).
std::string format_table(const InvarianceReport& report);

class InvarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples rho_N, evolves every sample to each t, and compares weighted
/// observable laws at t against t = 0. Weights stay attached to their
/// initial condition, so the comparison targets the push-forward measure.
InvarianceReport run_invariance_experiment(const NonlinearityModel& model, const CutoffChi& chi,
                                           const BasisPtr& basis, int N,
                                           std::span<const double> t_values, std::size_t count,
                                           const FlowConfig& flow_config, std::uint64_t seed,
                                           const InvarianceOptions& options = {});

/// Splits the sample into random halves `reps` times and returns the z-score
/// of each split.
std::vector<double> null_shuffle_z(std::span<const double> values, std::span<const double> weights,
                                   std::size_t reps, std::size_t bootstrap_reps, std::uint64_t seed);

/// |det D Phi_N(t)(u0) - 1| from a central-difference Jacobian over all 2N
/// real directions. probe_dim must be 0 (meaning 2N) or 2N.
double liouville_volume_check(const NonlinearityModel& model, const BesselBasis& basis, int N,
                              const SpectralField& u0, double t, double dt, int probe_dim = 0,
                              double fd_step = 1e-4);

/// Determinant by LU with partial pivoting; `m` is row-major n x n.
double determinant(std::vector<double> m, int n);

}  // namespace gibbsnls
