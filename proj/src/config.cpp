#include "gibbsnls/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gibbsnls/dynamics.hpp"
#include "gibbsnls/measure.hpp"
#include "gibbsnls/nonlinearity.hpp"
#include "gibbsnls/parallel.hpp"
#include "gibbsnls/sphere_zonal.hpp"

namespace gibbsnls {

namespace {

const std::vector<std::pair<std::string, std::string>>& generic_defaults() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"seed", "12345"},
      {"out", "out"},
      {"workers", "0"},
      {"format", "csv"},
      {"N", "8"},
      {"quad_order", "0"},
      {"family", "pure_quartic"},
      {"alpha", "2"},
      {"beta", "2"},
      {"s", "auto"},
      {"Lambda", "auto"},
      {"delta", "auto"},
      {"count", "1000"},
      {"mode", "importance"},
      {"dt", "1e-3"},
      {"t", "1"},
      {"t_values", "0.1,0.5,1.0"},
      {"integrator", "implicit_midpoint"},
      {"fp_tol", "1e-12"},
      {"fp_max_iters", "100"},
      {"stride", "10"},
      {"initial", "free_sample"},
      {"sigma", "0.4"},
      {"sigma_bis", "0.45"},
      {"bootstrap", "1000"},
      {"ks_reps", "1000"},
      {"samples", "10000"},
      {"field_samples", "100000"},
      {"lambda_grid", "1,2,3"},
      {"card_max", "20"},
      {"trend_lambda", "0.35"},
      {"N_list", "8,16,32,64"},
      {"max_index", "20"},
      {"kernel_beta", "0.95"},
      {"alphas", "10,100,1000,10000"},
      {"n_max", "1000000"},
      {"moment_mode", "fixed_time_hsigma"},
      {"xsb_T", "1"},
      {"xsb_samples", "1024"},
      {"xsb_b", "0.55"},
  };
  return keys;
}

std::map<std::string, std::string> experiment_defaults(const std::string& e) {
  if (e == "bessel-verify") return {{"N", "64"}};
  if (e == "sample") return {{"N", "16"}, {"count", "1000"}};
  if (e == "evolve") return {{"N", "8"}};
  if (e == "invariance") return {{"N", "8"}, {"count", "5000"}};
  if (e == "tails") return {{"N", "64"}, {"samples", "1000000"}};
  if (e == "vconv") return {{"N_list", "8,16,32,64"}, {"samples", "10000"}, {"family", "saturated"}};
  if (e == "sphere-gamma") return {{"max_index", "20"}};
  if (e == "picard") return {{"N_list", "32,64,128"}};
  if (e == "ihp") return {};
  if (e == "v2") return {{"N_list", "16,32,64"}, {"samples", "200"}};
  return {};
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

double parse_real(const std::string& key, const std::string& text) {
  if (text == "inf") return INFINITY;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(key, "expected a number, got '" + text + "'");
  }
  if (used != text.size()) fail(key, "expected a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    fail(key, "expected an integer, got '" + text + "'");
  }
  if (used != text.size()) fail(key, "expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"bessel-verify", "sample", "evolve", "invariance", "tails",
                                                 "vconv", "sphere-gamma", "picard", "ihp", "v2"};
  return names;
}

std::vector<std::pair<std::string, std::string>> documented_keys() { return generic_defaults(); }

RunConfig::RunConfig(std::string experiment, const std::map<std::string, std::string>& values)
    : experiment_(std::move(experiment)) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment_) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown experiment '" + experiment_ + "'; expected one of: " + list);
  }
  for (const auto& [k, v] : generic_defaults()) values_[k] = v;
  for (const auto& [k, v] : experiment_defaults(experiment_)) values_[k] = v;
  for (const auto& [k, v] : values) {
    if (k == "experiment") continue;
    if (!values_.contains(k)) {
      throw ConfigError("unknown config key '" + k + "'");
    }
    values_[k] = trim(v);
  }
  validate();
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const { return parse_real(key, str(key)); }
long long RunConfig::integer(const std::string& key) const { return parse_integer(key, str(key)); }

std::uint64_t RunConfig::seed() const {
  const std::string text = str("seed");
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    fail("seed", "expected a nonnegative integer, got '" + text + "'");
  }
  if (used != text.size() || text.front() == '-') fail("seed", "expected a nonnegative integer, got '" + text + "'");
  return v;
}

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split(str(key))) out.push_back(static_cast<int>(parse_integer(key, item)));
  return out;
}

std::vector<double> RunConfig::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(str(key))) out.push_back(parse_real(key, item));
  return out;
}

bool RunConfig::is_auto(const std::string& key) const { return str(key) == "auto"; }

int RunConfig::workers() const {
  const auto w = integer("workers");
  return w > 0 ? static_cast<int>(w) : default_workers();
}

void RunConfig::validate() const {
  auto in_open = [&](const std::string& key, double lo, double hi, const std::string& text) {
    const double v = real(key);
    if (!(v > lo && v < hi)) fail(key, text);
    return v;
  };
  auto at_least = [&](const std::string& key, long long lo) {
    const auto v = integer(key);
    if (v < lo) fail(key, "must be at least " + std::to_string(lo));
    return v;
  };
  auto positive = [&](const std::string& key) {
    const double v = real(key);
    if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be positive and finite");
    return v;
  };

  (void)seed();
  at_least("workers", 0);
  const auto format = str("format");
  if (format != "csv" && format != "json") fail("format", "must be csv or json");
  const auto N = at_least("N", 1);
  if (N > 4096) fail("N", "must be at most 4096");
  at_least("quad_order", 0);
  try {
    (void)parse_family(str("family"));
  } catch (const std::exception& e) {
    fail("family", e.what());
  }
  if (str("family") == "custom") fail("family", "custom potentials are only available through the library API");
  const double alpha = in_open("alpha", 0.0, 4.0, "alpha must lie in (0, 4)");
  const double beta = real("beta");
  if (!(beta >= 2.0 && beta < 4.0)) fail("beta", "beta must lie in [2, 4)");
  if (str("family") == "pure_quartic" && alpha != 2.0) fail("alpha", "pure_quartic fixes alpha = 2");
  if (!is_auto("s")) {
    try {
      validate_s(real("s"), alpha, beta);
    } catch (const std::domain_error& e) {
      fail("s", e.what());
    }
  }
  if (!is_auto("Lambda")) {
    const double lam = real("Lambda");
    if (!(lam > 0.0)) fail("Lambda", "must be positive (or inf to disable the cutoff)");
  }
  if (!is_auto("delta")) positive("delta");
  const auto count = at_least("count", 0);
  if (experiment_ == "invariance" && count < 100) fail("count", "the invariance experiment needs count >= 100");
  try {
    (void)parse_sampler_mode(str("mode"));
    (void)parse_integrator(str("integrator"));
    (void)parse_moment_mode(str("moment_mode"));
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const std::string key = what.find("sampler") != std::string::npos    ? "mode"
                            : what.find("integrator") != std::string::npos ? "integrator"
                                                                           : "moment_mode";
    fail(key, what);
  }
  if (str("initial") != "free_sample" && str("initial") != "single_mode") {
    fail("initial", "expected free_sample or single_mode, got '" + str("initial") + "'");
  }
  positive("dt");
  if (!std::isfinite(real("t"))) fail("t", "must be finite");
  for (double t : real_list("t_values")) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail("t_values", "entries must be nonnegative and finite");
  }
  positive("fp_tol");
  at_least("fp_max_iters", 1);
  at_least("stride", 1);
  const double sigma = real("sigma");
  if (!(sigma >= 0.0 && sigma < 1.0)) fail("sigma", "must lie in [0, 1)");
  if ((experiment_ == "picard" || experiment_ == "ihp" || experiment_ == "v2") && !(sigma > 0.0 && sigma < 0.5)) {
    fail("sigma", "must lie in (0, 1/2) for the S^3 experiments");
  }
  const double sigma_bis = real("sigma_bis");
  if (!(sigma_bis >= 0.0 && sigma_bis < 1.0)) fail("sigma_bis", "must lie in [0, 1)");
  at_least("bootstrap", 2);
  at_least("ks_reps", 1);
  at_least("samples", 1);
  at_least("field_samples", 1);
  for (double l : real_list("lambda_grid")) {
    if (!(l >= 0.0)) fail("lambda_grid", "entries must be nonnegative");
  }
  const auto card = at_least("card_max", 1);
  if (card > 1000) fail("card_max", "must be at most 1000");
  positive("trend_lambda");
  const auto list = int_list("N_list");
  if (list.empty()) fail("N_list", "must not be empty");
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] < 1) fail("N_list", "entries must be >= 1");
    if (i > 0 && list[i] <= list[i - 1]) fail("N_list", "entries must be strictly increasing");
  }
  if (experiment_ == "v2" && list.back() > 64) fail("N_list", "v2 supports N <= 64");
  if (experiment_ == "v2" && parse_moment_mode(str("moment_mode")) == MomentMode::kDiscreteXsb && list.back() > 16) {
    fail("N_list", "discrete_xsb mode supports N <= 16");
  }
  const auto max_index = at_least("max_index", 1);
  if (max_index > 40) fail("max_index", "must be at most 40");
  const double kb = real("kernel_beta");
  if (!(kb < 1.0 && 2.0 * kb - 2.0 * sigma > 1.0) && (experiment_ == "picard" || experiment_ == "ihp")) {
    fail("kernel_beta", "must satisfy 1/2 + sigma < kernel_beta < 1 (2*beta - 2*sigma > 1)");
  }
  for (double a : real_list("alphas")) {
    if (!std::isfinite(a)) fail("alphas", "entries must be finite");
  }
  at_least("n_max", 1);
  positive("xsb_T");
  at_least("xsb_samples", 8);
  const double b = real("xsb_b");
  if (!(b > 0.5 && b < 1.0)) fail("xsb_b", "must lie in (1/2, 1)");
}

std::string RunConfig::canonical() const {
  std::string out = "experiment=" + experiment_ + "\n";
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::map<std::string, std::string> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError("cannot parse manifest '" + path + "': " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("manifest '" + path + "' has no config object");
    for (const auto& [k, v] : j["config"].items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      auto [k, v] = parse_assignment(line);
      out[k] = v;
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace gibbsnls
