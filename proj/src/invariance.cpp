#include "gibbsnls/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "gibbsnls/parallel.hpp"
#include "gibbsnls/random_stream.hpp"
#include "gibbsnls/weighted_stats.hpp"

namespace gibbsnls {

ObservableRegistry::ObservableRegistry(const NonlinearityModel& model, double sigma) {
  auto add = [&](std::string name, Functional f) {
    names_.push_back(std::move(name));
    functionals_.push_back(std::move(f));
  };
  auto coord = [](const SpectralField& u, int n) { return n <= u.size() ? u.c(n) : complex(0.0); };
  add("l2_norm_sq", [](const SpectralField& u) { return u.l2_norm_sq(); });
  add("h_sigma_norm_sq", [sigma](const SpectralField& u) {
    const double v = sobolev_norm(u, sigma);
    return v * v;
  });
  for (int n = 1; n <= 3; ++n) {
    add("c" + std::to_string(n) + "_abs_sq", [coord, n](const SpectralField& u) { return std::norm(coord(u, n)); });
  }
  add("re_c1", [coord](const SpectralField& u) { return coord(u, 1).real(); });
  // The registry may outlive the caller's model reference; keep a copy.
  add("integral_V", [model](const SpectralField& u) { return integral_V(model, u); });
  add("hamiltonian", [model](const SpectralField& u) {
    if (!model.differentiable()) {
      double sum = integral_V(model, u);
      for (int n = 1; n <= u.size(); ++n) sum += u.basis().zero(n) * u.basis().zero(n) * std::norm(u.a(n));
      return sum;
    }
    return hamiltonian(model, u.basis(), u);
  });
}

bool ObservableRegistry::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

double ObservableRegistry::evaluate(const std::string& name, const SpectralField& u) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return functionals_[i](u);
  }
  std::string list;
  for (const auto& n : names_) list += (list.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown observable '" + name + "'; registered: " + list);
}

const InvarianceEntry& InvarianceReport::entry(const std::string& observable, double t) const {
  for (const auto& e : entries) {
    if (e.observable == observable && e.t == t) return e;
  }
  throw std::out_of_range("no entry for observable '" + observable + "' at t=" + std::to_string(t));
}

double InvarianceReport::max_abs_z() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, std::abs(e.z));
  return m;
}

double InvarianceReport::min_ks_p() const {
  double m = 1.0;
  for (const auto& e : entries) m = std::min(m, e.ks_p);
  return m;
}

bool InvarianceReport::pathwise_consistent() const {
  for (const auto& e : entries) {
    if (e.pooled_se == 0.0) {
      if (e.z != 0.0 && e.max_pathwise_change == 0.0) return false;
      continue;
    }
    if (std::abs(e.z) > e.max_pathwise_change / e.pooled_se * (1.0 + 1e-12)) return false;
  }
  return true;
}

nlohmann::json to_json(const InvarianceReport& report) {
  nlohmann::json j;
  j["observables"] = report.observables;
  j["t_values"] = report.t_values;
  j["count"] = report.count;
  j["failures"] = report.failures;
  j["failed_samples"] = report.failed_samples;
  j["ess_before"] = report.ess_before;
  j["ess_after"] = report.ess_after;
  j["max_abs_z"] = report.max_abs_z();
  j["min_ks_p"] = report.min_ks_p();
  j["flow"] = to_json(report.diagnostics);
  j["warnings"] = report.warnings;
  auto& rows = j["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    rows.push_back({{"observable", e.observable}, {"t", e.t}, {"mean0", e.mean0}, {"mean_t", e.mean_t},
                    {"pooled_se", e.pooled_se}, {"z", e.z}, {"ks_statistic", e.ks_statistic},
                    {"ks_p", e.ks_p}, {"max_pathwise_change", e.max_pathwise_change}});
  }
  return j;
}

std::string format_table(const InvarianceReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %6s %14s %14s %11s %8s %8s %7s\n", "observable", "t", "mean0",
                "mean_t", "se", "z", "ks", "ks_p");
  out << line;
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof line, "%-16s %6.3g %14.7g %14.7g %11.3e %8.3f %8.4f %7.3f\n",
                  e.observable.c_str(), e.t, e.mean0, e.mean_t, e.pooled_se, e.z, e.ks_statistic, e.ks_p);
    out << line;
  }
  std::snprintf(line, sizeof line, "count=%zu failures=%zu ess_before=%.1f ess_after=%.1f\n", report.count,
                report.failures, report.ess_before, report.ess_after);
  out << line;
  return out.str();
}

InvarianceReport run_invariance_experiment(const NonlinearityModel& model, const CutoffChi& chi,
                                           const BasisPtr& basis, int N,
                                           std::span<const double> t_values, std::size_t count,
                                           const FlowConfig& flow_config, std::uint64_t seed,
                                           const InvarianceOptions& options) {
  if (count < 100) throw std::domain_error("invariance experiment needs count >= 100");
  flow_config.validate();
  std::vector<double> times(t_values.begin(), t_values.end());
  std::sort(times.begin(), times.end());
  if (!times.empty() && times.front() < 0.0) throw std::domain_error("t_values must be nonnegative");

  const ObservableRegistry registry(model, options.sigma);
  std::vector<std::string> names = options.observables.empty() ? registry.names() : options.observables;
  for (const auto& n : names) (void)registry.evaluate(n, SpectralField::zero(basis, 0, 0.4));

  GibbsSamplerOptions sampler;
  sampler.mode = options.sampler;
  sampler.workers = options.workers;
  const WeightedEnsemble ens = sample_gibbs(model, chi, basis, N, count, seed, sampler);

  InvarianceReport report;
  report.observables = names;
  report.t_values = times;
  report.count = count;
  report.ess_before = ens.ess;
  report.warnings = ens.warnings;

  const std::size_t nt = times.size();
  const std::size_t no = names.size();
  // obs[(k * (nt + 1) + j) * no + o]: slot j = 0 is the initial condition.
  std::vector<double> obs(count * (nt + 1) * no, 0.0);
  std::vector<char> failed(count, 0);
  std::vector<FlowDiagnostics> diags(count);
  parallel_for(count, options.workers, [&](std::size_t k) {
    const auto& u0 = ens.samples[k];
    double* row = obs.data() + k * (nt + 1) * no;
    for (std::size_t o = 0; o < no; ++o) row[o] = registry.evaluate(names[o], u0);
    try {
      auto snap = evolve_snapshots(model, *basis, u0, times, flow_config);
      diags[k] = snap.diagnostics;
      for (std::size_t j = 0; j < nt; ++j) {
        for (std::size_t o = 0; o < no; ++o) row[(j + 1) * no + o] = registry.evaluate(names[o], snap.snapshots[j]);
      }
    } catch (const StepFailure&) {
      failed[k] = 1;
    }
  });

  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < count; ++k) {
    if (failed[k]) {
      report.failed_samples.push_back(k);
    } else {
      keep.push_back(k);
      report.diagnostics.merge(diags[k]);
    }
  }
  report.failures = report.failed_samples.size();
  if (static_cast<double>(report.failures) > options.max_failure_fraction * static_cast<double>(count)) {
    std::ostringstream msg;
    msg << report.failures << " of " << count << " trajectories failed (limit "
        << options.max_failure_fraction * 100.0 << "%)";
    throw InvarianceError(msg.str());
  }
  std::vector<double> w(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) w[i] = ens.weights[keep[i]];
  report.ess_after = effective_sample_size(w);
  if (report.ess_after < 50.0) {
    report.warnings.push_back("effective sample size " + std::to_string(report.ess_after) + " is below 50");
  }

  std::vector<double> v0(keep.size());
  std::vector<double> vt(keep.size());
  for (std::size_t o = 0; o < no; ++o) {
    for (std::size_t i = 0; i < keep.size(); ++i) v0[i] = obs[keep[i] * (nt + 1) * no + o];
    const double mean0 = weighted_mean(v0, w);
    const std::uint64_t base0 = (static_cast<std::uint64_t>(o) << 40);
    const double se0 = bootstrap_se(v0, w, options.bootstrap_reps, seed, base0);
    for (std::size_t j = 0; j < nt; ++j) {
      double change = 0.0;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        vt[i] = obs[(keep[i] * (nt + 1) + j + 1) * no + o];
        change = std::max(change, std::abs(vt[i] - v0[i]));
      }
      InvarianceEntry e;
      e.observable = names[o];
      e.t = times[j];
      e.mean0 = mean0;
      e.mean_t = weighted_mean(vt, w);
      const std::uint64_t base = base0 | (static_cast<std::uint64_t>(j + 1) << 32);
      const double se_t = bootstrap_se(vt, w, options.bootstrap_reps, seed, base);
      e.pooled_se = std::sqrt(se0 * se0 + se_t * se_t);
      e.z = pooled_z(e.mean0, se0, e.mean_t, se_t);
      const auto ks = weighted_ks_test(v0, w, vt, w, options.ks_reps, seed ^ 0x5bd1e995u, base);
      e.ks_statistic = ks.statistic;
      e.ks_p = ks.p_value;
      e.max_pathwise_change = change;
      report.entries.push_back(e);
    }
  }
  return report;
}

std::vector<double> null_shuffle_z(std::span<const double> values, std::span<const double> weights,
                                   std::size_t reps, std::size_t bootstrap_reps, std::uint64_t seed) {
  const std::size_t n = values.size();
  if (n < 4) throw std::domain_error("null_shuffle_z: need at least 4 samples");
  std::vector<double> zs;
  std::vector<std::size_t> perm(n);
  std::vector<double> va;
  std::vector<double> wa;
  std::vector<double> vb;
  std::vector<double> wb;
  for (std::size_t r = 0; r < reps; ++r) {
    std::iota(perm.begin(), perm.end(), 0);
    CounterStream stream(seed, r, StreamTag::kShuffle);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[stream.below(i + 1)]);
    va.clear();
    wa.clear();
    vb.clear();
    wb.clear();
    for (std::size_t i = 0; i < n; ++i) {
      auto& v = i < n / 2 ? va : vb;
      auto& w = i < n / 2 ? wa : wb;
      v.push_back(values[perm[i]]);
      w.push_back(weights[perm[i]]);
    }
    const std::uint64_t base = (static_cast<std::uint64_t>(r) << 33);
    const double ma = weighted_mean(va, wa);
    const double mb = weighted_mean(vb, wb);
    const double sa = bootstrap_se(va, wa, bootstrap_reps, seed, base);
    const double sb = bootstrap_se(vb, wb, bootstrap_reps, seed, base | (1ull << 32));
    zs.push_back(pooled_z(ma, sa, mb, sb));
  }
  return zs;
}

double determinant(std::vector<double> m, int n) {
  double det = 1.0;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t c = 0; c < un; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < un; ++r) {
      if (std::abs(m[r * un + c]) > std::abs(m[piv * un + c])) piv = r;
    }
    if (m[piv * un + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < un; ++k) std::swap(m[c * un + k], m[piv * un + k]);
      det = -det;
    }
    det *= m[c * un + c];
    for (std::size_t r = c + 1; r < un; ++r) {
      const double f = m[r * un + c] / m[c * un + c];
      for (std::size_t k = c; k < un; ++k) m[r * un + k] -= f * m[c * un + k];
    }
  }
  return det;
}

double liouville_volume_check(const NonlinearityModel& model, const BesselBasis& basis, int N,
                              const SpectralField& u0, double t, double dt, int probe_dim,
                              double fd_step) {
  if (N < 1 || N > u0.size()) throw std::domain_error("liouville_volume_check: need 1 <= N <= field size");
  const int dim = 2 * N;
  if (probe_dim != 0 && probe_dim != dim) {
    throw std::domain_error("liouville_volume_check: probe_dim must be 0 or 2N");
  }
  if (t == 0.0) return 0.0;
  FlowConfig config;
  config.dt = dt;
  config.t_final = t;
  config.fp_tol = 1e-14;
  std::vector<complex> base(u0.a().begin(), u0.a().begin() + N);
  auto flow_of = [&](const std::vector<complex>& a) {
    FlowResult r = evolve(model, basis, SpectralField(u0.basis_ptr(), a, u0.s()), config);
    return std::vector<complex>(r.u_final.a().begin(), r.u_final.a().end());
  };
  const auto ud = static_cast<std::size_t>(dim);
  std::vector<double> jac(ud * ud);
  for (int j = 0; j < dim; ++j) {
    auto plus = base;
    auto minus = base;
    const auto mode = static_cast<std::size_t>(j / 2);
    const complex dir = (j % 2 == 0) ? complex(fd_step, 0.0) : complex(0.0, fd_step);
    plus[mode] += dir;
    minus[mode] -= dir;
    const auto fp = flow_of(plus);
    const auto fm = flow_of(minus);
    for (std::size_t i = 0; i < ud; ++i) {
      const complex d = (fp[i / 2] - fm[i / 2]) / (2.0 * fd_step);
      jac[i * ud + static_cast<std::size_t>(j)] = (i % 2 == 0) ? d.real() : d.imag();
    }
  }
  return std::abs(determinant(jac, dim) - 1.0);
}

}  // namespace gibbsnls
