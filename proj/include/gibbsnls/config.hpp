#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gibbsnls {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiments exposed as subcommands.
const std::vector<std::string>& experiment_names();

/// Validated key=value configuration with defaults applied for one experiment.
class RunConfig {
 public:
  /// Applies defaults for `experiment`, then `values` (later sources win),
  /// then validates every key. Throws ConfigError naming the key.
  RunConfig(std::string experiment, const std::map<std::string, std::string>& values);

  [[nodiscard]] const std::string& experiment() const { return experiment_; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

  [[nodiscard]] std::string str(const std::string& key) const;
  [[nodiscard]] double real(const std::string& key) const;
  [[nodiscard]] long long integer(const std::string& key) const;
  [[nodiscard]] std::uint64_t seed() const;
  [[nodiscard]] std::vector<int> int_list(const std::string& key) const;
  [[nodiscard]] std::vector<double> real_list(const std::string& key) const;
  /// True when the key holds "auto".
  [[nodiscard]] bool is_auto(const std::string& key) const;
  [[nodiscard]] int workers() const;

  /// Canonical "key=value\n" lines in key order, experiment first.
  [[nodiscard]] std::string canonical() const;
  /// 64-bit FNV-1a of canonical(), as 16 hex digits.
  [[nodiscard]] std::string hash() const;

 private:
  void validate() const;

  std::string experiment_;
  std::map<std::string, std::string> values_;
};

/// Reads key=value lines ('#' comments, blank lines ignored). A file whose
/// first non-blank character is '{' is read as a run manifest and its
/// "config" object is returned, including "experiment".
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Splits "key=value"; throws ConfigError on malformed input.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

/// Documented keys with their generic defaults, for --help output.
std::vector<std::pair<std::string, std::string>> documented_keys();

}  // namespace gibbsnls
