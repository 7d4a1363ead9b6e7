// Flat sectioned key-value configuration with environment-variable overrides,
// plus adapters into the typed config structs.

#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "lins/features.hpp"
#include "lins/filter.hpp"
#include "lins/simulator.hpp"

namespace lins {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config() = default;

  // Parse "key = value" lines under "[section]" headers; '#' starts a
  // comment. Unknown keys are rejected with line context when a known-key set
  // is enforced by the adapters below.
  static Config fromFile(const std::string& path);
  static Config fromString(const std::string& text, const std::string& origin = "<string>");

  // Environment variables of the form <prefix><SECTION>_<KEY> (upper-case)
  // override file values, e.g. LINS_FILTER_MAX_ITERATIONS.
  void applyEnvOverrides(const std::string& prefix = "LINS_");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string getString(const std::string& key, const std::string& def) const;
  double getDouble(const std::string& key, double def) const;
  int getInt(const std::string& key, int def) const;
  Eigen::Vector3d getVec3(const std::string& key, const Eigen::Vector3d& def) const;

  // Resolved "section.key = value" dump, sorted, for config echoing.
  std::string toString() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> value
};

// Typed views. Each reads its section and falls back to the struct defaults.
FilterConfig filterConfigFrom(const Config& cfg);
ExtractConfig extractConfigFrom(const Config& cfg);
Extrinsics extrinsicsFrom(const Config& cfg);
SimParams simParamsFrom(const Config& cfg);

// Default configuration text with every key documented inline.
std::string defaultConfigText();

}  // namespace lins
