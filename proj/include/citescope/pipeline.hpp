#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace citescope {

/// Bad configuration or usage; the command line maps it to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Key-value pipeline settings. Every known key always has a value.
class PipelineConfig {
 public:
  PipelineConfig();

  /// Throws ConfigError naming the key if it is unknown or the value does not parse.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  /// Relative paths resolve against base_dir. Empty values give nullopt.
  std::optional<std::filesystem::path> path(const std::string& key) const;
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;

  std::filesystem::path base_dir = ".";

  /// "key = value" lines in key order.
  std::string serialize() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Known keys with their defaults, in documentation order.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// "key = value" lines; '#' starts a comment line. Unknown keys throw ConfigError.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);

/// CITESCOPE_<KEY> overrides, key upper-cased with '.' as '_'. Unknown
/// CITESCOPE_ variables throw ConfigError.
void apply_environment(PipelineConfig& cfg, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> current_environment();

const std::vector<std::string>& subcommands();

/// Runs one stage, writing its artifacts under the configured output
/// directory. Throws ConfigError for usage problems, anything else for
/// runtime failures.
void run_stage(const std::string& name, const PipelineConfig& cfg);

}  // namespace citescope
