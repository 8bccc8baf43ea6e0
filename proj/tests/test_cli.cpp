#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "gibbsnls/config.hpp"
#include "gibbsnls/run.hpp"

using namespace gibbsnls;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gibbsnls_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const std::string& experiment, const std::map<std::string, std::string>& kv) {
  try {
    RunConfig c(experiment, kv);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("invariance defaults") {
  const RunConfig c("invariance", {});
  CHECK(c.integer("N") == 8);
  CHECK(c.real("alpha") == 2.0);
  CHECK(c.str("family") == "pure_quartic");
  CHECK(c.real("dt") == 1e-3);
  CHECK(c.real("t") == 1.0);
  CHECK(c.integer("count") == 5000);
  CHECK(c.is_auto("s"));
}

TEST_CASE("validation names the key") {
  const auto s = config_error("invariance", {{"s", "0.1"}});
  CHECK(s.find("'s'") != std::string::npos);
  CHECK(s.find("s must lie in") != std::string::npos);
  const auto a = config_error("sample", {{"family", "saturated"}, {"alpha", "5"}});
  CHECK(a.find("'alpha'") != std::string::npos);
  CHECK(a.find("(0, 4)") != std::string::npos);
  CHECK(config_error("sample", {{"bogus", "1"}}).find("unknown config key 'bogus'") != std::string::npos);
  CHECK(config_error("nope", {}).find("unknown experiment") != std::string::npos);
  CHECK(config_error("sample", {{"dt", "-1"}}).find("'dt'") != std::string::npos);
  CHECK(config_error("sample", {{"N", "x"}}).find("'N'") != std::string::npos);
  CHECK(config_error("evolve", {{"initial", "random"}}).find("'initial'") != std::string::npos);
  CHECK(config_error("sample", {{"s", "0.45"}}).empty());
}

TEST_CASE("canonical form and hash") {
  const RunConfig a("sample", {{"N", "4"}});
  const RunConfig b("sample", {{"N", " 4 "}});
  const RunConfig c("sample", {{"N", "5"}});
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash().size() == 16);
  CHECK(a.canonical().rfind("experiment=sample\n", 0) == 0);
}

TEST_CASE("assignments and config files") {
  CHECK(parse_assignment("N=4") == std::pair<std::string, std::string>{"N", "4"});
  CHECK_THROWS_AS(parse_assignment("=4"), ConfigError);
  CHECK_THROWS_AS(parse_assignment("N"), ConfigError);
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "a.cfg");
    f << "# comment\n\nN = 6\nseed=3\n";
  }
  const auto kv = read_config_file((dir / "a.cfg").string());
  CHECK(kv.at("N") == "6");
  CHECK(kv.at("seed") == "3");
  {
    std::ofstream f(dir / "bad.cfg");
    f << "N 6\n";
  }
  CHECK_THROWS_AS(read_config_file((dir / "bad.cfg").string()), ConfigError);
  CHECK_THROWS_AS(read_config_file((dir / "missing.cfg").string()), ConfigError);
}

TEST_CASE("sphere-gamma run writes outputs and a manifest") {
  const auto dir = scratch("gamma");
  const RunConfig c("sphere-gamma", {{"max_index", "8"}, {"out", dir.string()}});
  std::ostringstream log;
  CHECK(run(c, log) == kExitPass);
  CHECK(fs::exists(dir / "gamma.csv"));
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m.at("status") == "pass");
  CHECK(m.at("config_hash") == c.hash());
  CHECK(m.at("config").at("max_index") == "8");
  CHECK(m.at("verdicts").size() >= 3);
  CHECK(log.str().find("PASS gamma_laws") != std::string::npos);
}

TEST_CASE("outputs are byte identical across reruns and worker counts") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  REQUIRE(run(RunConfig("sample", {{"N", "6"}, {"count", "50"}, {"out", a.string()}, {"workers", "1"}}), log) == kExitPass);
  REQUIRE(run(RunConfig("sample", {{"N", "6"}, {"count", "50"}, {"out", b.string()}, {"workers", "3"}}), log) == kExitPass);
  CHECK(slurp(a / "ensemble.csv") == slurp(b / "ensemble.csv"));
  // rerun from the manifest
  const auto kv = read_config_file((a / "manifest.json").string());
  auto values = kv;
  values.erase("experiment");
  values["out"] = b.string();
  REQUIRE(run(RunConfig(kv.at("experiment"), values), log) == kExitPass);
  CHECK(slurp(a / "ensemble.csv") == slurp(b / "ensemble.csv"));
}

TEST_CASE("json format") {
  const auto dir = scratch("json");
  std::ostringstream log;
  REQUIRE(run(RunConfig("bessel-verify", {{"N", "8"}, {"format", "json"}, {"out", dir.string()}}), log) == kExitPass);
  const auto rows = nlohmann::json::parse(slurp(dir / "basis.json"));
  CHECK(rows.size() == 8);
  CHECK(rows[0].contains("z_n"));
}

TEST_CASE("failed checks and runtime errors map to exit codes") {
  const auto dir = scratch("fail");
  std::ostringstream log;
  // rough free-field datum at N=16: hamiltonian drift check is reported red
  CHECK(run(RunConfig("evolve", {{"N", "16"}, {"t", "0.05"}, {"out", dir.string()}}), log) == kExitCheckFailed);
  const auto err = scratch("err");
  CHECK(run(RunConfig("evolve", {{"N", "16"}, {"integrator", "strang_splitting"}, {"out", err.string()}}), log) ==
        kExitRuntimeError);
  const auto rec = nlohmann::json::parse(slurp(err / "error.json"));
  CHECK(rec.at("error").at("experiment") == "evolve");
  CHECK(rec.at("error").at("message").get<std::string>().find("dt*z_N^2") != std::string::npos);
  CHECK(error_record("a", "b", "c").at("error").at("type") == "a");
}

TEST_CASE("command line exit codes") {
  const std::string exe = GIBBSNLS_CLI;
  const auto dir = scratch("cli");
  CHECK(shell(exe + " sphere-gamma max_index=4 --out " + dir.string() + " > /dev/null") == 0);
  CHECK(shell(exe + " sample --set alpha=5 --set family=saturated --out " + dir.string() + " > /dev/null 2>&1") == 2);
  CHECK(shell(exe + " sample bogus=1 --out " + dir.string() + " > /dev/null 2>&1") == 2);
  CHECK(shell(exe + " sample N=3 count=5 --seed 9 --format json --out " + dir.string() + " > /dev/null") == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m.at("config").at("seed") == "9");
  CHECK(m.at("config").at("format") == "json");
}
