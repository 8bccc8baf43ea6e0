#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbsnls/bessel_basis.hpp"
#include "gibbsnls/nonlinearity.hpp"
#include "gibbsnls/spectral_field.hpp"

namespace gibbsnls {

enum class Integrator { kImplicitMidpoint, kStrangSplitting };
std::string to_string(Integrator integrator);
Integrator parse_integrator(const std::string& name);

struct FlowConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  Integrator integrator = Integrator::kImplicitMidpoint;
  double fp_tol = 1e-12;
  int fp_max_iters = 100;
  int max_halvings = 4;

  /// Throws std::domain_error on dt <= 0, non-finite t_final or fp_tol <= 0.
  void validate() const;
};

struct FlowDiagnostics {
  double h_drift = 0.0;   ///< max |H(t) - H(0)| / (1 + |H(0)|)
  double l2_drift = 0.0;  ///< max |M(t) - M(0)| / M(0), M = ||u||^2
  /// fp_iterations[k] counts solves that needed k iterations.
  std::vector<std::size_t> fp_iterations;
  std::size_t steps = 0;
  int halvings = 0;  ///< deepest step subdivision used

  void record_iterations(int k);
  void merge(const FlowDiagnostics& other);
};

nlohmann::json to_json(const FlowDiagnostics& diagnostics);

class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

/// Galerkin vector field a' = -i (z^2 a + P(a)), P_n(a) = <F(u), e_n>, with
/// reusable scratch. One instance per thread.
class GalerkinFlow {
 public:
  GalerkinFlow(const NonlinearityModel& model, const BesselBasis& basis, int N);

  [[nodiscard]] int size() const { return N_; }

  /// out = P(a).
  void nonlinear_projection(std::span<const complex> a, std::span<complex> out);
  /// out = -i (z^2 a + P(a)).
  void rhs(std::span<const complex> a, std::span<complex> out);
  /// sum z_n^2 |a_n|^2 + int V(u).
  double hamiltonian(std::span<const complex> a);

  /// One implicit-midpoint step of size dt (negative dt runs backwards). The
  /// linear part is inverted exactly inside the fixed-point iteration.
  /// Returns the iteration count; throws StepFailure.
  int step_midpoint(std::span<complex> a, double dt, const FlowConfig& config);
  /// exp(-i z^2 dt/2), midpoint on a' = -i P(a), exp(-i z^2 dt/2).
  int step_strang(std::span<complex> a, double dt, const FlowConfig& config);

  /// Sets H(0) and ||u0||^2 used for drift diagnostics.
  void set_reference(std::span<const complex> a);

  /// Advances by `t` with ceil(|t|/dt) equal steps, halving a failed step
  /// up to config.max_halvings times.
  void advance(std::span<complex> a, double t, const FlowConfig& config, FlowDiagnostics& diag);

 private:
  int solve(std::span<complex> a, double dt, const FlowConfig& config, bool linear_implicit);
  void step_recursive(std::span<complex> a, double dt, const FlowConfig& config,
                      FlowDiagnostics& diag, int depth);

  const NonlinearityModel& model_;
  const BesselBasis& basis_;
  int N_;
  std::vector<double> eig_;
  std::vector<complex> values_;
  std::vector<complex> mid_;
  std::vector<complex> next_;
  std::vector<complex> proj_;
  std::vector<complex> base_;
  double h0_ = 0.0;
  double m0_ = 0.0;
};

SpectralField rhs(const NonlinearityModel& model, const BesselBasis& basis, const SpectralField& u);
double hamiltonian(const NonlinearityModel& model, const BesselBasis& basis, const SpectralField& u);
SpectralField step_implicit_midpoint(const NonlinearityModel& model, const BesselBasis& basis,
                                     const SpectralField& u, double dt,
                                     const FlowConfig& config = {});

struct FlowResult {
  SpectralField u_final;
  FlowDiagnostics diagnostics;
};

/// Phi_N(t_final) u0.
FlowResult evolve(const NonlinearityModel& model, const BesselBasis& basis,
                  const SpectralField& u0, const FlowConfig& config);

struct SnapshotResult {
  std::vector<SpectralField> snapshots;
  FlowDiagnostics diagnostics;
};

/// Phi_N(t) u0 for each t in the nondecreasing list `times` (t >= 0).
SnapshotResult evolve_snapshots(const NonlinearityModel& model, const BesselBasis& basis,
                                const SpectralField& u0, std::span<const double> times,
                                const FlowConfig& config);

/// Rows (t, n, re, im) every `stride` steps, including t = 0 and t_final.
FlowDiagnostics write_trajectory(const NonlinearityModel& model, const BesselBasis& basis,
                                 const SpectralField& u0, const FlowConfig& config, int stride,
                                 std::ostream& out);

}  // namespace gibbsnls
