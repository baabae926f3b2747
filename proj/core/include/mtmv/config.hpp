#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtmv/market_model.hpp"
#include "mtmv/simulator.hpp"

namespace mtmv {

/// Configuration problem: carries the offending file and JSON location.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

struct OutputOptions {
  std::filesystem::path dir = ".";
  std::vector<std::string> formats = {"csv", "json"};
  bool timestamp = true;
  std::map<std::string, bool> figures;

  bool wants(const std::string& format) const;
  bool figure_enabled(const std::string& name) const;  // defaults to true
};

struct ExperimentConfig {
  ProblemSpec problem;
  SimulationConfig simulation;
  OutputOptions outputs;
  /// Reporting grid spacing for analytic paths (also the record spacing).
  double record_step = 1e-2;
};

/// Parses a JSON experiment document; errors carry the origin name plus a
/// line/field-precise location.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin);

/// Reads and parses a config file; a missing file raises ConfigError with
/// the path in the message.
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

}  // namespace mtmv
