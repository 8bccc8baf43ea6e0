#include "gibbsnls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace gibbsnls {

namespace {
constexpr complex kI{0.0, 1.0};

double norm_sq(std::span<const complex> a) {
  double sum = 0.0;
  for (const auto& v : a) sum += std::norm(v);
  return sum;
}
}  // namespace

std::string to_string(Integrator integrator) {
  return integrator == Integrator::kImplicitMidpoint ? "implicit_midpoint" : "strang_splitting";
}

Integrator parse_integrator(const std::string& name) {
  if (name == "implicit_midpoint" || name == "midpoint") return Integrator::kImplicitMidpoint;
  if (name == "strang_splitting" || name == "strang") return Integrator::kStrangSplitting;
  throw std::invalid_argument("unknown integrator '" + name +
                              "' (expected implicit_midpoint or strang_splitting)");
}

void FlowConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::domain_error("dt must be positive and finite");
  if (!std::isfinite(t_final)) throw std::domain_error("t_final must be finite");
  if (!(fp_tol > 0.0)) throw std::domain_error("fp_tol must be positive");
  if (fp_max_iters < 1) throw std::domain_error("fp_max_iters must be at least 1");
  if (max_halvings < 0) throw std::domain_error("max_halvings must be nonnegative");
}

void FlowDiagnostics::record_iterations(int k) {
  const auto idx = static_cast<std::size_t>(k);
  if (fp_iterations.size() <= idx) fp_iterations.resize(idx + 1, 0);
  ++fp_iterations[idx];
}

void FlowDiagnostics::merge(const FlowDiagnostics& other) {
  h_drift = std::max(h_drift, other.h_drift);
  l2_drift = std::max(l2_drift, other.l2_drift);
  if (fp_iterations.size() < other.fp_iterations.size()) fp_iterations.resize(other.fp_iterations.size(), 0);
  for (std::size_t k = 0; k < other.fp_iterations.size(); ++k) fp_iterations[k] += other.fp_iterations[k];
  steps += other.steps;
  halvings = std::max(halvings, other.halvings);
}

nlohmann::json to_json(const FlowDiagnostics& d) {
  nlohmann::json hist = nlohmann::json::object();
  for (std::size_t k = 0; k < d.fp_iterations.size(); ++k) {
    if (d.fp_iterations[k] > 0) hist[std::to_string(k)] = d.fp_iterations[k];
  }
  return {{"h_drift", d.h_drift}, {"l2_drift", d.l2_drift}, {"fp_iterations", hist},
          {"steps", d.steps}, {"halvings", d.halvings}};
}

GalerkinFlow::GalerkinFlow(const NonlinearityModel& model, const BesselBasis& basis, int N)
    : model_(model), basis_(basis), N_(N) {
  if (N < 0 || N > basis.N) throw std::invalid_argument("GalerkinFlow: N exceeds basis size");
  if (!model.differentiable()) {
    throw UnsupportedError("flow needs a force F; model '" + model.label() + "' has none");
  }
  const auto n = static_cast<std::size_t>(N);
  eig_.resize(n);
  for (int k = 1; k <= N; ++k) eig_[static_cast<std::size_t>(k - 1)] = basis.zero(k) * basis.zero(k);
  values_.resize(basis.num_nodes());
  mid_.resize(n);
  next_.resize(n);
  proj_.resize(n);
  base_.resize(n);
}

void GalerkinFlow::nonlinear_projection(std::span<const complex> a, std::span<complex> out) {
  synthesize(basis_, a, values_);
  for (auto& v : values_) v = model_.force(v);
  project(basis_, values_, out);
}

void GalerkinFlow::rhs(std::span<const complex> a, std::span<complex> out) {
  nonlinear_projection(a, out);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = -kI * (eig_[n] * a[n] + out[n]);
}

double GalerkinFlow::hamiltonian(std::span<const complex> a) {
  synthesize(basis_, a, values_);
  double sum = 0.0;
  for (std::size_t q = 0; q < values_.size(); ++q) sum += basis_.disc_weights[q] * model_.potential(values_[q]);
  for (std::size_t n = 0; n < a.size(); ++n) sum += eig_[n] * std::norm(a[n]);
  return sum;
}

// Fixed point for a1 = C a0 - i dt D^{-1} P((a0 + a1)/2) with D = 1 + i dt L/2,
// C = (1 - i dt L/2)/D, where L = z^2 when linear_implicit and L = 0 otherwise.
int GalerkinFlow::solve(std::span<complex> a, double dt, const FlowConfig& config,
                        bool linear_implicit) {
  const std::size_t n = a.size();
  std::vector<complex>& rot = base_;
  std::vector<complex> inv_d(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = linear_implicit ? eig_[k] : 0.0;
    const complex d = 1.0 + kI * (0.5 * dt * lam);
    inv_d[k] = 1.0 / d;
    rot[k] = (1.0 - kI * (0.5 * dt * lam)) * inv_d[k] * a[k];
  }
  const double scale = std::max(1.0, std::sqrt(norm_sq(a)));
  std::copy(a.begin(), a.end(), next_.begin());
  double residual = 0.0;
  for (int it = 1; it <= config.fp_max_iters; ++it) {
    for (std::size_t k = 0; k < n; ++k) mid_[k] = 0.5 * (a[k] + next_[k]);
    nonlinear_projection(mid_, proj_);
    residual = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const complex updated = rot[k] - kI * dt * inv_d[k] * proj_[k];
      residual += std::norm(updated - next_[k]);
      next_[k] = updated;
    }
    residual = std::sqrt(residual);
    if (!std::isfinite(residual)) break;
    if (residual <= config.fp_tol * scale) {
      std::copy(next_.begin(), next_.end(), a.begin());
      return it;
    }
  }
  std::ostringstream msg;
  msg << "fixed-point iteration did not converge (dt=" << dt << ", residual=" << residual << ")";
  throw StepFailure(msg.str(), residual);
}

int GalerkinFlow::step_midpoint(std::span<complex> a, double dt, const FlowConfig& config) {
  return solve(a, dt, config, true);
}

int GalerkinFlow::step_strang(std::span<complex> a, double dt, const FlowConfig& config) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= std::exp(-kI * (0.5 * dt * eig_[k]));
  const int it = solve(a, dt, config, false);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= std::exp(-kI * (0.5 * dt * eig_[k]));
  return it;
}

void GalerkinFlow::set_reference(std::span<const complex> a) {
  h0_ = hamiltonian(a);
  m0_ = norm_sq(a);
}

void GalerkinFlow::step_recursive(std::span<complex> a, double dt, const FlowConfig& config,
                                  FlowDiagnostics& diag, int depth) {
  std::vector<complex> saved(a.begin(), a.end());
  try {
    const int it = config.integrator == Integrator::kImplicitMidpoint
                       ? step_midpoint(a, dt, config)
                       : step_strang(a, dt, config);
    diag.record_iterations(it);
  } catch (const StepFailure&) {
    if (depth >= config.max_halvings) throw;
    std::copy(saved.begin(), saved.end(), a.begin());
    diag.halvings = std::max(diag.halvings, depth + 1);
    step_recursive(a, 0.5 * dt, config, diag, depth + 1);
    step_recursive(a, 0.5 * dt, config, diag, depth + 1);
  }
}

void GalerkinFlow::advance(std::span<complex> a, double t, const FlowConfig& config,
                           FlowDiagnostics& diag) {
  if (t == 0.0 || a.empty()) return;
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(t) / config.dt - 1e-9));
  const double h = t / static_cast<double>(steps);
  if (config.integrator == Integrator::kStrangSplitting && std::abs(h) * eig_.back() > std::numbers::pi / 4.0) {
    std::ostringstream msg;
    msg << "splitting needs dt*z_N^2 <= pi/4; got " << std::abs(h) * eig_.back();
    throw std::domain_error(msg.str());
  }
  for (std::size_t k = 0; k < steps; ++k) {
    step_recursive(a, h, config, diag, 0);
    ++diag.steps;
    const double hk = hamiltonian(a);
    diag.h_drift = std::max(diag.h_drift, std::abs(hk - h0_) / (1.0 + std::abs(h0_)));
    if (m0_ > 0.0) diag.l2_drift = std::max(diag.l2_drift, std::abs(norm_sq(a) - m0_) / m0_);
  }
}

SpectralField rhs(const NonlinearityModel& model, const BesselBasis& basis, const SpectralField& u) {
  GalerkinFlow flow(model, basis, u.size());
  std::vector<complex> out(static_cast<std::size_t>(u.size()));
  flow.rhs(u.a(), out);
  return {u.basis_ptr(), std::move(out), u.s()};
}

double hamiltonian(const NonlinearityModel& model, const BesselBasis& basis, const SpectralField& u) {
  GalerkinFlow flow(model, basis, u.size());
  return flow.hamiltonian(u.a());
}

SpectralField step_implicit_midpoint(const NonlinearityModel& model, const BesselBasis& basis,
                                     const SpectralField& u, double dt, const FlowConfig& config) {
  GalerkinFlow flow(model, basis, u.size());
  std::vector<complex> a(u.a().begin(), u.a().end());
  if (!a.empty()) flow.step_midpoint(a, dt, config);
  return {u.basis_ptr(), std::move(a), u.s()};
}

FlowResult evolve(const NonlinearityModel& model, const BesselBasis& basis,
                  const SpectralField& u0, const FlowConfig& config) {
  config.validate();
  GalerkinFlow flow(model, basis, u0.size());
  std::vector<complex> a(u0.a().begin(), u0.a().end());
  FlowDiagnostics diag;
  flow.set_reference(a);
  flow.advance(a, config.t_final, config, diag);
  return {SpectralField(u0.basis_ptr(), std::move(a), u0.s()), diag};
}

SnapshotResult evolve_snapshots(const NonlinearityModel& model, const BesselBasis& basis,
                                const SpectralField& u0, std::span<const double> times,
                                const FlowConfig& config) {
  config.validate();
  GalerkinFlow flow(model, basis, u0.size());
  std::vector<complex> a(u0.a().begin(), u0.a().end());
  SnapshotResult result;
  flow.set_reference(a);
  double current = 0.0;
  for (double t : times) {
    if (t < current) throw std::domain_error("evolve_snapshots: times must be nonnegative and sorted");
    flow.advance(a, t - current, config, result.diagnostics);
    current = t;
    result.snapshots.emplace_back(u0.basis_ptr(), a, u0.s());
  }
  return result;
}

FlowDiagnostics write_trajectory(const NonlinearityModel& model, const BesselBasis& basis,
                                 const SpectralField& u0, const FlowConfig& config, int stride,
                                 std::ostream& out) {
  config.validate();
  if (stride < 1) throw std::domain_error("trajectory stride must be at least 1");
  GalerkinFlow flow(model, basis, u0.size());
  std::vector<complex> a(u0.a().begin(), u0.a().end());
  FlowDiagnostics diag;
  flow.set_reference(a);
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(config.t_final) / config.dt - 1e-9));
  const double h = steps == 0 ? 0.0 : config.t_final / static_cast<double>(steps);
  char line[160];
  auto dump = [&](double t) {
    for (std::size_t n = 0; n < a.size(); ++n) {
      std::snprintf(line, sizeof line, "%.17g,%zu,%.17g,%.17g\n", t, n + 1, a[n].real(), a[n].imag());
      out << line;
    }
  };
  out << "t,n,re_a,im_a\n";
  dump(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    flow.advance(a, h, config, diag);
    if (k % static_cast<std::size_t>(stride) == 0 || k == steps) dump(h * static_cast<double>(k));
  }
  return diag;
}

}  // namespace gibbsnls
