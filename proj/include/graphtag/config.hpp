#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphtag/model.hpp"
#include "graphtag/training.hpp"

namespace graphtag {

// "key = value" settings. Later assignments win, so flags applied after the
// file override it. Unknown keys are rejected.
class RunConfig {
 public:
  static const std::vector<std::string>& known_keys();

  static RunConfig parse(std::istream& in, const std::string& source);
  static RunConfig read(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  // "key=value" form used by --set.
  void set_assignment(const std::string& assignment);
  std::optional<std::string> get(const std::string& key) const;
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Defaults for the mode (the "mode" key, else `fallback`) with overrides.
  ModelConfig model_config(Mode fallback) const;
  TrainConfig train_config() const;
  // Errors when a shape-affecting hyperparameter set here disagrees with
  // `loaded`; dropout rates and decoding options are ignored.
  void check_compatible(const ModelConfig& loaded) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace graphtag
