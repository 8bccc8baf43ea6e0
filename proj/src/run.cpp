#include "gibbsnls/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <variant>

#include "gibbsnls/bessel.hpp"
#include "gibbsnls/bessel_basis.hpp"
#include "gibbsnls/dynamics.hpp"
#include "gibbsnls/invariance.hpp"
#include "gibbsnls/measure.hpp"
#include "gibbsnls/sphere_zonal.hpp"
#include "gibbsnls/tails.hpp"

namespace gibbsnls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(format_cell(c));
  return std::get<std::string>(c);
}

class Context {
 public:
  Context(const RunConfig& config, std::ostream& log) : config_(config), log_(log) {
    out_dir_ = config.str("out");
    fs::create_directories(out_dir_);
  }

  const RunConfig& config() const { return config_; }
  std::ostream& log() { return log_; }

  void emit(const std::string& stem, const Table& table) {
    if (config_.str("format") == "json") {
      json rows = json::array();
      for (const auto& r : table.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < table.columns.size(); ++i) obj[table.columns[i]] = cell_json(r[i]);
        rows.push_back(obj);
      }
      write_text(stem + ".json", rows.dump(2) + "\n");
      return;
    }
    std::string text;
    for (std::size_t i = 0; i < table.columns.size(); ++i) text += (i ? "," : "") + table.columns[i];
    text += "\n";
    for (const auto& r : table.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) text += (i ? "," : "") + format_cell(r[i]);
      text += "\n";
    }
    write_text(stem + ".csv", text);
  }

  void write_text(const std::string& name, const std::string& text) {
    write_atomically((fs::path(out_dir_) / name).string(), text);
    outputs_.push_back(name);
  }

  void check(const std::string& name, bool pass, double value, const std::string& threshold) {
    verdicts_.push_back({name, pass, value, threshold});
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    log_ << (pass ? "PASS " : "FAIL ") << name << " value=" << buf << " threshold: " << threshold << "\n";
  }

  void note(const std::string& key, json value) { extra_[key] = std::move(value); }

  const std::vector<Verdict>& verdicts() const { return verdicts_; }
  const std::vector<std::string>& outputs() const { return outputs_; }
  const json& extra() const { return extra_; }
  const std::string& out_dir() const { return out_dir_; }

 private:
  const RunConfig& config_;
  std::ostream& log_;
  std::string out_dir_;
  std::vector<Verdict> verdicts_;
  std::vector<std::string> outputs_;
  json extra_ = json::object();
};

NonlinearityModel make_model(const RunConfig& c) {
  const auto family = parse_family(c.str("family"));
  if (family == PotentialFamily::kPureQuartic) return NonlinearityModel::pure_quartic(c.real("beta"));
  return NonlinearityModel::saturated(c.real("alpha"), c.real("beta"));
}

double config_s(const RunConfig& c, const NonlinearityModel& model) {
  return c.is_auto("s") ? default_s(model.alpha(), model.beta_defocus()) : c.real("s");
}

CutoffChi make_cutoff(const RunConfig& c, const BesselBasis& basis, int N) {
  const CutoffChi fallback = default_cutoff(basis, N);
  const double lambda = c.is_auto("Lambda") ? fallback.lambda : c.real("Lambda");
  if (!std::isfinite(lambda)) return {};
  const double delta = c.is_auto("delta") ? lambda / 4.0 : c.real("delta");
  return {lambda, delta};
}

FlowConfig make_flow(const RunConfig& c) {
  FlowConfig f;
  f.dt = c.real("dt");
  f.t_final = c.real("t");
  f.integrator = parse_integrator(c.str("integrator"));
  f.fp_tol = c.real("fp_tol");
  f.fp_max_iters = static_cast<int>(c.integer("fp_max_iters"));
  return f;
}

int config_N(const RunConfig& c) { return static_cast<int>(c.integer("N")); }

BasisPtr make_basis(const RunConfig& c, int N) {
  return build_basis(N, static_cast<int>(c.integer("quad_order")));
}

// ---------------------------------------------------------------- experiments

void run_bessel_verify(Context& ctx) {
  const auto& c = ctx.config();
  const int N = config_N(c);
  const auto basis = make_basis(c, N);
  if (c.str("format") == "json") {
    Table t{{"n", "z_n", "l2", "l4", "linf"}, {}};
    for (int n = 1; n <= N; ++n) {
      t.rows.push_back({static_cast<long long>(n), basis->zero(n), lp_norm(*basis, n, 2.0), lp_norm(*basis, n, 4.0),
                        lp_norm(*basis, n, INFINITY)});
    }
    ctx.emit("basis", t);
  } else {
    std::ostringstream out;
    write_basis_csv(*basis, out);
    ctx.write_text("basis.csv", out.str());
  }
  double j0 = 0.0;
  double norm_err = 0.0;
  for (int n = 1; n <= N; ++n) {
    j0 = std::max(j0, std::abs(bessel_j0(basis->zero(n))));
    norm_err = std::max(norm_err, std::abs(basis->l2_raw_norms[static_cast<std::size_t>(n - 1)] -
                                           std::sqrt(std::numbers::pi) * std::abs(bessel_j1(basis->zero(n)))));
  }
  ctx.check("j0_at_zeros", j0 < 1e-13, j0, "< 1e-13");
  const double gram = gram_deviation(*basis);
  ctx.check("gram_identity", gram <= 1e-9, gram, "<= 1e-9");
  ctx.check("raw_norm_identity", norm_err <= 1e-10, norm_err, "<= 1e-10");

  constexpr int kFit = 200;
  const auto fit_basis = build_basis(kFit);
  std::vector<double> linf;
  std::vector<double> raw;
  std::vector<int> idx;
  for (int n = 1; n <= kFit; ++n) {
    linf.push_back(lp_norm(*fit_basis, n, INFINITY));
    raw.push_back(fit_basis->l2_raw_norms[static_cast<std::size_t>(n - 1)]);
    idx.push_back(n);
  }
  const auto s_inf = asymptotic_exponent_fit(linf, idx);
  const auto s_raw = asymptotic_exponent_fit(raw, idx);
  ctx.check("linf_exponent", s_inf.slope >= 0.45 && s_inf.slope <= 0.55, s_inf.slope, "in [0.45, 0.55]");
  ctx.check("raw_l2_exponent", s_raw.slope >= -0.55 && s_raw.slope <= -0.45, s_raw.slope, "in [-0.55, -0.45]");

  std::vector<double> lambdas;
  for (int k = 1; k <= 8; ++k) lambdas.push_back(std::ldexp(1.0, k));
  const auto scaling = scaling_counterexample(lambdas);
  Table st{{"lambda", "l4", "l2", "h1"}, {}};
  for (const auto& r : scaling.rows) st.rows.push_back({r.lambda, r.l4, r.l2, r.h1});
  ctx.emit("scaling", st);
  ctx.check("scaling_l4_exponent", std::abs(scaling.l4_exponent + 0.5) <= 0.05, scaling.l4_exponent, "-0.5 +- 0.05");
  ctx.check("scaling_l2_exponent", std::abs(scaling.l2_exponent + 1.0) <= 0.05, scaling.l2_exponent, "-1 +- 0.05");
  ctx.check("scaling_h1_exponent", std::abs(scaling.h1_exponent) <= 0.05, scaling.h1_exponent, "0 +- 0.05");
}

void run_sample(Context& ctx) {
  const auto& c = ctx.config();
  const int N = config_N(c);
  const auto model = make_model(c);
  const auto basis = make_basis(c, N);
  const auto chi = make_cutoff(c, *basis, N);
  GibbsSamplerOptions opt;
  opt.mode = parse_sampler_mode(c.str("mode"));
  opt.s = config_s(c, model);
  opt.workers = c.workers();
  const auto ens = sample_gibbs(model, chi, basis, N, static_cast<std::size_t>(c.integer("count")), c.seed(), opt);
  if (c.str("format") == "json") {
    Table t{{"sample_index", "n", "re_a", "im_a", "weight"}, {}};
    for (std::size_t k = 0; k < ens.size(); ++k) {
      for (int n = 1; n <= N; ++n) {
        const auto a = ens.samples[k].a(n);
        t.rows.push_back({static_cast<long long>(k), static_cast<long long>(n), a.real(), a.imag(), ens.weights[k]});
      }
    }
    ctx.emit("ensemble", t);
  } else {
    std::ostringstream out;
    write_ensemble_csv(ens, out);
    ctx.write_text("ensemble.csv", out.str());
  }
  ctx.write_text("ensemble_manifest.json", ensemble_manifest(ens, model, chi, N).dump(2) + "\n");
  for (const auto& w : ens.warnings) ctx.log() << "warning: " << w << "\n";
  double parseval = 0.0;
  bool weights_ok = true;
  for (std::size_t k = 0; k < ens.size(); ++k) {
    const auto& u = ens.samples[k];
    const double m = u.l2_norm_sq();
    if (m > 0.0) parseval = std::max(parseval, std::abs(m - u.l2_norm_sq_from_c()) / m);
    weights_ok = weights_ok && std::isfinite(ens.weights[k]) && ens.weights[k] >= 0.0;
  }
  ctx.check("parseval", parseval <= 1e-12, parseval, "<= 1e-12 relative");
  ctx.check("weights_valid", weights_ok, weights_ok ? 1.0 : 0.0, "finite and nonnegative");
  if (ens.size() > 0) {
    ctx.check("ess_range", ens.ess >= 1.0 - 1e-9 && ens.ess <= static_cast<double>(ens.size()) + 1e-9, ens.ess,
              "in [1, count]");
  }
}

void run_evolve(Context& ctx) {
  const auto& c = ctx.config();
  const int N = config_N(c);
  const auto model = make_model(c);
  const auto basis = make_basis(c, N);
  const auto flow = make_flow(c);
  auto u0 = SpectralField::zero(basis, N, config_s(c, model));
  if (c.str("initial") == "single_mode") {
    u0.a_mut()[0] = 1.0;
  } else {
    u0 = sample_free(basis, N, c.seed(), 0, config_s(c, model));
  }
  std::ostringstream traj;
  const auto diag = write_trajectory(model, *basis, u0, flow, static_cast<int>(c.integer("stride")), traj);
  if (c.str("format") == "json") {
    Table t{{"t", "n", "re_a", "im_a"}, {}};
    std::istringstream in(traj.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      double tt = 0.0, re = 0.0, im = 0.0;
      long long n = 0;
      std::sscanf(line.c_str(), "%lf,%lld,%lf,%lf", &tt, &n, &re, &im);
      t.rows.push_back({tt, n, re, im});
    }
    ctx.emit("trajectory", t);
  } else {
    ctx.write_text("trajectory.csv", traj.str());
  }
  ctx.write_text("diagnostics.json", to_json(diag).dump(2) + "\n");
  if (flow.integrator == Integrator::kImplicitMidpoint) {
    ctx.check("l2_drift", diag.l2_drift <= 1e-10, diag.l2_drift, "<= 1e-10 relative");
  }
  ctx.check("hamiltonian_drift", diag.h_drift <= 1e-6, diag.h_drift, "<= 1e-6 relative");
}

void run_invariance(Context& ctx) {
  const auto& c = ctx.config();
  const int N = config_N(c);
  const auto model = make_model(c);
  const auto basis = make_basis(c, N);
  const auto chi = make_cutoff(c, *basis, N);
  const auto flow = make_flow(c);
  InvarianceOptions opt;
  opt.sigma = c.real("sigma");
  opt.bootstrap_reps = static_cast<std::size_t>(c.integer("bootstrap"));
  opt.ks_reps = static_cast<std::size_t>(c.integer("ks_reps"));
  opt.workers = c.workers();
  opt.sampler = parse_sampler_mode(c.str("mode"));
  const auto times = c.real_list("t_values");
  const auto report = run_invariance_experiment(model, chi, basis, N, times,
                                                static_cast<std::size_t>(c.integer("count")), flow, c.seed(), opt);
  Table t{{"observable", "t", "mean0", "mean_t", "pooled_se", "z", "ks_statistic", "ks_p"}, {}};
  for (const auto& e : report.entries) {
    t.rows.push_back({e.observable, e.t, e.mean0, e.mean_t, e.pooled_se, e.z, e.ks_statistic, e.ks_p});
  }
  ctx.emit("invariance", t);
  ctx.write_text("invariance_report.json", to_json(report).dump(2) + "\n");
  ctx.write_text("invariance_table.txt", format_table(report));
  ctx.log() << format_table(report);
  for (const auto& w : report.warnings) ctx.log() << "warning: " << w << "\n";
  ctx.check("max_abs_z", report.max_abs_z() <= 3.0, report.max_abs_z(), "<= 3");
  ctx.check("min_ks_p", report.min_ks_p() >= 0.01, report.min_ks_p(), ">= 0.01");
  ctx.check("pathwise_consistency", report.pathwise_consistent(), report.pathwise_consistent() ? 1.0 : 0.0,
            "|z| <= max pathwise change / se");

  if (model.differentiable()) {
    const auto small = build_basis(2);
    const auto u0 = sample_free(small, 2, c.seed(), 0, config_s(c, model));
    const double det = liouville_volume_check(model, *small, 2, u0, 0.2, 1e-4);
    ctx.check("liouville_det_N2", det <= 1e-4, det, "|det - 1| <= 1e-4 at t=0.2, dt=1e-4");
  }
}

void run_tails(Context& ctx) {
  const auto& c = ctx.config();
  const auto samples = static_cast<std::size_t>(c.integer("samples"));
  const auto field_samples = static_cast<std::size_t>(c.integer("field_samples"));
  const auto seed = c.seed();
  const int workers = c.workers();

  // Sub-Gaussian bound at beta = 1/2.
  const std::vector<complex> cvec(4, complex(0.5, 0.0));
  const auto grid = c.real_list("lambda_grid");
  const auto sub = tail_subgaussian_test(cvec, grid, samples, seed, workers);
  Table ts{{"lambda", "empirical", "stderr", "bound", "pass"}, {}};
  bool sub_ok = true;
  double worst = 0.0;
  for (const auto& r : sub) {
    ts.rows.push_back({r.lambda, r.empirical, r.stderr_, r.reference, static_cast<long long>(r.empirical <= r.reference)});
    sub_ok = sub_ok && r.empirical <= r.reference;
    worst = std::max(worst, r.empirical / r.reference);
  }
  ctx.emit("tail_subgaussian", ts);
  ctx.check("subgaussian_bound", sub_ok, worst, "empirical <= 4 exp(-lambda^2/2) pointwise (max ratio shown)");

  // Chi-square tails: exact law at card 1, fitted rate across cards.
  std::vector<double> lam1;
  for (int k = 1; k <= 6; ++k) lam1.push_back(k);
  const auto chi1 = tail_chisquare_test(1, lam1, samples, seed);
  Table tc{{"lambda", "empirical", "stderr", "exact"}, {}};
  double max_dev = 0.0;
  for (const auto& r : chi1.rows) {
    tc.rows.push_back({r.lambda, r.empirical, r.stderr_, r.reference});
    const double se = std::max(r.stderr_, std::sqrt(r.reference * (1.0 - r.reference) / static_cast<double>(samples)));
    max_dev = std::max(max_dev, std::abs(r.empirical - r.reference) / se);
  }
  ctx.emit("tail_chisquare_card1", tc);
  ctx.check("chisquare_card1_exact", max_dev <= 3.0, max_dev, "|empirical - e^{-lambda}| <= 3 se (max z shown)");
  Table tr{{"card", "fitted_c2"}, {}};
  double min_c2 = INFINITY;
  const int card_max = static_cast<int>(c.integer("card_max"));
  for (int card = 1; card <= card_max; ++card) {
    const auto rep = tail_chisquare_test(card, {}, samples, seed + static_cast<std::uint64_t>(card));
    tr.rows.push_back({static_cast<long long>(card), rep.fitted_c2});
    min_c2 = std::min(min_c2, rep.fitted_c2);
  }
  ctx.emit("tail_chisquare_rates", tr);
  ctx.check("chisquare_rate_floor", min_c2 > 0.3, min_c2, "> 0.3 for every card");

  // Sobolev tails of the free series.
  const int N = config_N(c);
  const auto basis = make_basis(c, N);
  const double sigma = c.real("sigma");
  std::vector<std::pair<int, int>> pairs{{0, std::min(16, N)}};
  for (int n0 : {4, 8, 16, 32}) {
    if (n0 < N) pairs.emplace_back(n0, N);
  }
  std::vector<double> sgrid;
  for (int k = 1; k <= 24; ++k) sgrid.push_back(0.05 * k);
  const auto sob = tail_sobolev_test(*basis, sigma, pairs, sgrid, field_samples, seed, c.real("trend_lambda"));
  Table tsb{{"N", "M", "lambda", "empirical", "stderr"}, {}};
  for (const auto& p : sob.pairs) {
    for (const auto& r : p.rows) {
      tsb.rows.push_back({static_cast<long long>(p.N), static_cast<long long>(p.M), r.lambda, r.empirical, r.stderr_});
    }
  }
  ctx.emit("tail_sobolev", tsb);
  const double slope0 = sob.pairs.front().slope_vs_lambda_sq;
  ctx.check("sobolev_tail_quadratic_decay", slope0 < 0.0, slope0, "log P vs lambda^2 slope < 0 for (0,16)");
  if (sob.pairs.size() >= 3) {
    ctx.check("sobolev_tail_trend", sob.trend_slope <= -0.5, sob.trend_slope,
              "slope of log P against 2(1-sigma)log(1+N) <= -0.5");
  }

  // Weighted tail under rho_N and uniformity of f_N moments.
  const auto model = make_model(c);
  const int nb = std::min(32, N);
  const auto chi = default_cutoff(*basis, nb);
  GibbsSamplerOptions opt;
  opt.workers = workers;
  opt.s = config_s(c, model);
  const auto ens = sample_gibbs(model, chi, basis, nb, static_cast<std::size_t>(c.integer("count")), seed, opt);
  std::vector<double> bgrid;
  for (int k = 1; k <= 30; ++k) bgrid.push_back(0.1 * k);
  const auto bis = gibbs_sobolev_tail(ens, c.real("sigma_bis"), bgrid);
  Table tb{{"lambda", "weighted_tail"}, {}};
  for (const auto& r : bis.rows) tb.rows.push_back({r.lambda, r.empirical});
  ctx.emit("tail_gibbs_sobolev", tb);
  ctx.check("gibbs_sobolev_tail_decay", bis.slope_vs_lambda_sq < 0.0, bis.slope_vs_lambda_sq,
            "weighted log-tail slope in lambda^2 < 0");

  std::vector<int> wN;
  for (int n : {8, 16, 32, 64}) {
    if (n <= N) wN.push_back(n);
  }
  const std::vector<double> ps{1.0, 2.0, 4.0};
  const auto wchi = default_cutoff(*basis, wN.back());
  const auto moments = weight_moments(model, wchi, basis, wN, ps, static_cast<std::size_t>(c.integer("count")), seed, workers);
  Table tm{{"N", "p", "mean", "stderr"}, {}};
  double spread = 0.0;
  bool stable = true;
  for (const auto& r : moments) {
    tm.rows.push_back({static_cast<long long>(r.N), r.p, r.mean, r.stderr_});
    const auto& last = *std::find_if(moments.rbegin(), moments.rend(), [&](const WeightMomentRow& x) { return x.p == r.p; });
    const double gap = std::abs(r.mean - last.mean);
    const double tol = std::max(3.0 * std::hypot(r.stderr_, last.stderr_), 0.1 * last.mean);
    stable = stable && gap <= tol;
    if (last.mean > 0.0) spread = std::max(spread, gap / last.mean);
  }
  ctx.emit("weight_moments", tm);
  ctx.check("weight_moments_stable", stable, spread, "|E f_N^p - E f_Nmax^p| <= max(3 se, 10%)");
}

void run_vconv(Context& ctx) {
  const auto& c = ctx.config();
  const auto model = make_model(c);
  const auto list = c.int_list("N_list");
  const auto basis = make_basis(c, list.back());
  const auto rep = vN_convergence(model, basis, list, static_cast<std::size_t>(c.integer("samples")), c.seed(), c.workers());
  Table t{{"N", "M", "mean_abs_diff", "stderr", "majorant"}, {}};
  for (const auto& p : rep.pairs) {
    t.rows.push_back({static_cast<long long>(p.N), static_cast<long long>(p.M), p.mean_abs_diff, p.stderr_, p.majorant});
  }
  ctx.emit("vconv", t);
  ctx.note("fitted_constant", rep.fitted_constant);
  ctx.check("differences_strictly_decreasing", rep.strictly_decreasing, rep.pairs.empty() ? 0.0 : rep.pairs.back().mean_abs_diff,
            "strictly decreasing over consecutive pairs");
  double worst = 0.0;
  for (const auto& p : rep.pairs) worst = std::max(worst, p.mean_abs_diff / (rep.fitted_constant * p.majorant));
  ctx.check("majorant_domination", rep.dominated, worst, "diff <= 5 C majorant");
}

void run_sphere_gamma(Context& ctx) {
  const auto& c = ctx.config();
  const int max_index = static_cast<int>(c.integer("max_index"));
  const GammaTensor tensor(max_index, c.workers());
  if (c.str("format") == "json") {
    Table t{{"n", "n1", "n2", "n3", "m"}, {}};
    for (int n = 1; n <= max_index; ++n)
      for (int a = 1; a <= max_index; ++a)
        for (int b = 1; b <= max_index; ++b)
          for (int d = 1; d <= max_index; ++d) {
            const int m = tensor.m(n, a, b, d);
            if (m) t.rows.push_back({static_cast<long long>(n), static_cast<long long>(a), static_cast<long long>(b),
                                     static_cast<long long>(d), static_cast<long long>(m)});
          }
    ctx.emit("gamma", t);
  } else {
    std::ostringstream out;
    tensor.write_csv(out);
    ctx.write_text("gamma.csv", out.str());
  }
  const auto rep = gamma_law_check(max_index, c.seed());
  json viol = json::array();
  for (const auto& v : rep.violations) viol.push_back({{"tuple", {v.n, v.n1, v.n2, v.n3}}, {"law", v.law}});
  ctx.write_text("gamma_laws.json", json{{"max_index", rep.max_index},
                                         {"tuples_checked", rep.tuples_checked},
                                         {"violation_count", rep.violation_count},
                                         {"violations", viol},
                                         {"quadrature_tuples", rep.quadrature_tuples},
                                         {"quadrature_max_error", rep.quadrature_max_error}}
                                        .dump(2) + "\n");
  ctx.check("gamma_laws", rep.violation_count == 0, static_cast<double>(rep.violation_count),
            "no violation of the min bound, triangle vanishing, symmetry or pairing independence");
  ctx.check("gamma_quadrature", rep.quadrature_max_error <= 1e-8, rep.quadrature_max_error, "<= 1e-8");
  const double g1111 = gamma_value(1, 1, 1, 1);
  ctx.check("gamma_1111", g1111 == 2.0 / std::numbers::pi, g1111, "== 2/pi");
}

void run_picard(Context& ctx) {
  const auto& c = ctx.config();
  const double sigma = c.real("sigma");
  const double beta = c.real("kernel_beta");
  const auto rep = picard_moment_sums(sigma, beta, c.int_list("N_list"));
  Table t{{"N", "I1", "I2", "I1_increment", "I2_increment"}, {}};
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const double d1 = k ? rep.i1_increments[k - 1] : NAN;
    const double d2 = k ? rep.i2_increments[k - 1] : NAN;
    t.rows.push_back({static_cast<long long>(rep.rows[k].N), rep.rows[k].i1, rep.rows[k].i2, d1, d2});
  }
  ctx.emit("picard_sums", t);
  const auto first = picard_moment_sums(sigma, beta, std::vector<int>{1});
  const double err = std::abs(first.rows[0].i1 - 4.0 / (std::numbers::pi * std::numbers::pi));
  ctx.check("first_summand", err <= 1e-12, err, "|I1(N=1) - 4/pi^2| <= 1e-12");
  auto decreasing = [](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
      if (!(v[k] < v[k - 1])) return false;
    return true;
  };
  const double r1 = rep.i1_increments.size() >= 2 ? rep.i1_increments.back() / rep.i1_increments[rep.i1_increments.size() - 2] : 0.0;
  const double r2 = rep.i2_increments.size() >= 2 ? rep.i2_increments.back() / rep.i2_increments[rep.i2_increments.size() - 2] : 0.0;
  ctx.check("i1_increments_decreasing", decreasing(rep.i1_increments), r1, "strictly decreasing (last ratio shown)");
  ctx.check("i2_increments_decreasing", decreasing(rep.i2_increments), r2, "strictly decreasing (last ratio shown)");
}

void run_ihp(Context& ctx) {
  const auto& c = ctx.config();
  const double sigma = c.real("sigma");
  const double beta = c.real("kernel_beta");
  const auto n_max = c.integer("n_max");
  Table t{{"alpha", "partial", "tail_estimate", "tail_error_bound", "total", "ratio"}, {}};
  double rmin = INFINITY, rmax = 0.0, worst_tail = 0.0;
  std::vector<double> alphas{0.0};
  for (double a : c.real_list("alphas")) alphas.push_back(a);
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const auto r = ihp_sum(sigma, beta, alphas[k], n_max);
    t.rows.push_back({alphas[k], r.partial, r.tail_estimate, r.tail_error_bound, r.total, r.ratio});
    worst_tail = std::max(worst_tail, r.tail_error_bound / r.total);
    if (k > 0) {
      rmin = std::min(rmin, r.ratio);
      rmax = std::max(rmax, r.ratio);
    }
  }
  ctx.emit("ihp", t);
  ctx.check("tail_error_small", worst_tail < 1e-3, worst_tail, "tail error bound < 1e-3 of the sum");
  if (alphas.size() > 1) {
    ctx.check("ratio_spread", rmax / rmin <= 3.0, rmax / rmin, "max/min of S(alpha)/(1+alpha)^sigma <= 3");
  }
}

void run_v2(Context& ctx) {
  const auto& c = ctx.config();
  const double sigma = c.real("sigma");
  const double t = c.real("t");
  const auto samples = static_cast<std::size_t>(c.integer("samples"));
  const auto mode = parse_moment_mode(c.str("moment_mode"));
  XsbGrid grid;
  grid.T = c.real("xsb_T");
  grid.samples = static_cast<int>(c.integer("xsb_samples"));
  grid.b = c.real("xsb_b");
  const auto rep = v2_moment(sigma, c.int_list("N_list"), t, samples, c.seed(), mode, c.workers(), grid);
  Table tab{{"N", "sigma", "estimate", "stderr", "increment", "increment_se"}, {}};
  for (const auto& r : rep.rows) tab.rows.push_back({static_cast<long long>(r.N), sigma, r.estimate, r.stderr_, r.increment, r.increment_se});
  ctx.emit("v2_moments", tab);
  ctx.note("moment_mode", to_string(mode));
  if (mode == MomentMode::kDiscreteXsb) ctx.note("xsb_grid", {{"T", grid.T}, {"samples", grid.samples}, {"b", grid.b}});

  const auto g = zonal_gaussians(1, c.seed());
  const auto single = compute_v2(g, t);
  const double closed = 2.0 / std::numbers::pi * std::pow(std::abs(g[0]), 3) * std::abs(t);
  const double err = std::abs(std::sqrt(single.sobolev_norm_sq(0.0)) - closed);
  ctx.check("single_mode_closed_form", err <= 1e-12, err, "|v2| = (2/pi)|g1|^3 t to 1e-12");
  if (mode == MomentMode::kFixedTimeHsigma) {
    const auto one = v2_moment(sigma, std::vector<int>{1}, t, samples, c.seed(), mode, c.workers());
    const double exact = 24.0 / (std::numbers::pi * std::numbers::pi) * t * t;
    const double z = std::abs(one.rows[0].estimate - exact) / one.rows[0].stderr_;
    ctx.check("single_mode_moment", z <= 3.0, z, "|E - (2/pi)^2 6 t^2| <= 3 se (z shown)");
  }
  if (rep.rows.size() >= 3) {
    bool decreasing = true;
    for (std::size_t k = 2; k < rep.rows.size(); ++k) decreasing = decreasing && rep.rows[k].increment < rep.rows[k - 1].increment;
    const double rel = rep.rows.back().increment / rep.rows[rep.rows.size() - 2].estimate;
    ctx.check("increments_decreasing", decreasing, rep.rows.back().increment, "Cauchy increments strictly decreasing");
    ctx.check("final_increment_small", rel <= 0.1, rel, "final increment <= 10% of previous estimate");
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

json error_record(const std::string& type, const std::string& message, const std::string& experiment) {
  return {{"error", {{"type", type}, {"message", message}, {"experiment", experiment}}}};
}

int run(const RunConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_timestamp();
  json manifest;
  manifest["tool"] = "gibbsnls";
  manifest["version"] = GIBBSNLS_VERSION;
  json cfg = json::object();
  cfg["experiment"] = config.experiment();
  for (const auto& [k, v] : config.values()) cfg[k] = v;
  manifest["config"] = cfg;
  manifest["config_hash"] = config.hash();
  manifest["started_at"] = started;

  std::unique_ptr<Context> ctx;
  int code = kExitPass;
  try {
    ctx = std::make_unique<Context>(config, log);
    const auto& e = config.experiment();
    if (e == "bessel-verify") run_bessel_verify(*ctx);
    else if (e == "sample") run_sample(*ctx);
    else if (e == "evolve") run_evolve(*ctx);
    else if (e == "invariance") run_invariance(*ctx);
    else if (e == "tails") run_tails(*ctx);
    else if (e == "vconv") run_vconv(*ctx);
    else if (e == "sphere-gamma") run_sphere_gamma(*ctx);
    else if (e == "picard") run_picard(*ctx);
    else if (e == "ihp") run_ihp(*ctx);
    else if (e == "v2") run_v2(*ctx);
    for (const auto& v : ctx->verdicts()) {
      if (!v.pass) code = kExitCheckFailed;
    }
    manifest["status"] = code == kExitPass ? "pass" : "fail";
  } catch (const std::exception& ex) {
    code = kExitRuntimeError;
    const std::string type = dynamic_cast<const UnsupportedError*>(&ex) ? "unsupported"
                             : dynamic_cast<const std::domain_error*>(&ex) ? "domain_error"
                             : dynamic_cast<const BasisError*>(&ex)        ? "basis_error"
                             : dynamic_cast<const StepFailure*>(&ex)       ? "step_failure"
                                                                           : "runtime_error";
    const json err = error_record(type, ex.what(), config.experiment());
    manifest["status"] = "error";
    manifest["error"] = err["error"];
    std::cerr << err.dump() << "\n";
    try {
      fs::create_directories(config.str("out"));
      write_atomically((fs::path(config.str("out")) / "error.json").string(), err.dump(2) + "\n");
    } catch (const std::exception&) {
    }
  }
  json verdicts = json::array();
  json outputs = json::array();
  if (ctx) {
    for (const auto& v : ctx->verdicts()) {
      verdicts.push_back({{"name", v.name}, {"pass", v.pass},
                          {"value", std::isfinite(v.value) ? json(v.value) : json(std::to_string(v.value))},
                          {"threshold", v.threshold}});
    }
    for (const auto& o : ctx->outputs()) outputs.push_back(o);
    if (!ctx->extra().empty()) manifest["notes"] = ctx->extra();
  }
  manifest["verdicts"] = verdicts;
  manifest["outputs"] = outputs;
  manifest["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    fs::create_directories(config.str("out"));
    write_atomically((fs::path(config.str("out")) / "manifest.json").string(), manifest.dump(2) + "\n");
  } catch (const std::exception& ex) {
    std::cerr << error_record("io_error", ex.what(), config.experiment()).dump() << "\n";
    if (code == kExitPass) code = kExitRuntimeError;
  }
  log << "status: " << manifest["status"].get<std::string>() << " (" << config.experiment() << ", hash "
      << config.hash() << ")\n";
  return code;
}

}  // namespace gibbsnls
