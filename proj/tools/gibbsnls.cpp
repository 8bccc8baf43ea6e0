#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gibbsnls/config.hpp"
#include "gibbsnls/run.hpp"

int main(int argc, char** argv) {
  using namespace gibbsnls;
  CLI::App app{"Gibbs measure and NLS flow experiments on the disc and S^3"};
  app.set_version_flag("--version", std::string("gibbsnls ") + GIBBSNLS_VERSION);

  std::string experiment;
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  std::string seed, out, workers, format;

  std::string names;
  for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "one of: " + names)->required();
  app.add_option("overrides", overrides, "key=value parameter overrides");
  app.add_option("--config", config_path, "key=value config file or a previous manifest.json");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--workers", workers, "worker threads (0: GIBBSNLS_WORKERS or all cores)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", sets, "key=value override (repeatable)");
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print configuration keys with generic defaults and exit");

  if (argc > 1 && std::string(argv[1]) == "--list-keys") {
    for (const auto& [k, v] : documented_keys()) std::cout << k << "=" << v << "\n";
    return 0;
  }
  CLI11_PARSE(app, argc, argv);

  try {
    std::map<std::string, std::string> values;
    if (!config_path.empty()) {
      values = read_config_file(config_path);
      const auto it = values.find("experiment");
      if (it != values.end() && it->second != experiment) {
        throw ConfigError("config file is for experiment '" + it->second + "', not '" + experiment + "'");
      }
    }
    for (const auto& o : overrides) values.insert_or_assign(parse_assignment(o).first, parse_assignment(o).second);
    for (const auto& o : sets) values.insert_or_assign(parse_assignment(o).first, parse_assignment(o).second);
    if (!seed.empty()) values["seed"] = seed;
    if (!out.empty()) values["out"] = out;
    if (!workers.empty()) values["workers"] = workers;
    if (!format.empty()) values["format"] = format;
    const RunConfig config(experiment, values);
    return run(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << error_record("config_error", e.what(), experiment).dump() << "\n";
    return kExitConfigError;
  }
}
