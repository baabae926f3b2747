#include "mtmv/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mtmv {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& pointer,
                       const std::string& what) {
  throw ConfigError(origin + ": " + (pointer.empty() ? "/" : pointer) + ": " + what);
}

const json& require(const json& j, const std::string& origin, const std::string& pointer,
                    const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(origin, pointer, std::string("missing required field '") + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const std::string& origin, const std::string& pointer) {
  if (!j.is_number()) fail(origin, pointer, "expected a number");
  return j.get<double>();
}

/// Accepts a bare value or {"schedule": [[start, value], ...]}.
template <typename T, typename ParseValue>
PiecewiseConstant<T> schedule(const json& j, const std::string& origin,
                              const std::string& pointer, ParseValue parse_value) {
  if (j.is_object() && j.contains("schedule")) {
    const json& entries = j.at("schedule");
    if (!entries.is_array() || entries.empty()) {
      fail(origin, pointer + "/schedule", "expected a nonempty array of [start, value] pairs");
    }
    std::vector<double> starts;
    std::vector<T> values;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string at = pointer + "/schedule/" + std::to_string(i);
      const json& e = entries[i];
      if (!e.is_array() || e.size() != 2) fail(origin, at, "expected a [start, value] pair");
      starts.push_back(number(e[0], origin, at + "/0"));
      values.push_back(parse_value(e[1], at + "/1"));
    }
    try {
      return PiecewiseConstant<T>(std::move(starts), std::move(values));
    } catch (const std::invalid_argument& e) {
      fail(origin, pointer + "/schedule", e.what());
    }
  }
  return PiecewiseConstant<T>::constant(parse_value(j, pointer));
}

Eigen::VectorXd vector_value(const json& j, const std::string& origin,
                             const std::string& pointer) {
  if (j.is_number()) {
    Eigen::VectorXd v(1);
    v << j.get<double>();
    return v;
  }
  if (j.is_array() && !j.empty()) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = number(j[i], origin, pointer + "/" + std::to_string(i));
    }
    return v;
  }
  fail(origin, pointer, "expected a number or an array of numbers");
}

Eigen::MatrixXd matrix_value(const json& j, const std::string& origin,
                             const std::string& pointer) {
  if (j.is_number()) {
    Eigen::MatrixXd m(1, 1);
    m << j.get<double>();
    return m;
  }
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        fail(origin, pointer + "/" + std::to_string(r), "ragged volatility matrix");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = number(row[static_cast<std::size_t>(c)], origin,
                         pointer + "/" + std::to_string(r) + "/" + std::to_string(c));
      }
    }
    return m;
  }
  fail(origin, pointer, "expected a number or a matrix (array of rows)");
}

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

bool OutputOptions::wants(const std::string& format) const {
  for (const auto& f : formats) {
    if (f == format) return true;
  }
  return false;
}

bool OutputOptions::figure_enabled(const std::string& name) const {
  auto it = figures.find(name);
  return it == figures.end() ? true : it->second;
}

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(line_of_offset(text, e.byte)) +
                      ": " + e.what());
  }

  const json& market_j = require(doc, origin, "", "market");
  const double horizon = number(require(market_j, origin, "/market", "horizon"), origin,
                                "/market/horizon");
  auto rate = schedule<double>(
      require(market_j, origin, "/market", "rate"), origin, "/market/rate",
      [&](const json& j, const std::string& p) { return number(j, origin, p); });
  auto drift = schedule<Eigen::VectorXd>(
      require(market_j, origin, "/market", "drift"), origin, "/market/drift",
      [&](const json& j, const std::string& p) { return vector_value(j, origin, p); });
  auto vol = schedule<Eigen::MatrixXd>(
      require(market_j, origin, "/market", "vol"), origin, "/market/vol",
      [&](const json& j, const std::string& p) { return matrix_value(j, origin, p); });
  double delta = 1e-8;
  if (market_j.contains("delta")) {
    delta = number(market_j.at("delta"), origin, "/market/delta");
  }

  const json& cp_j = require(doc, origin, "", "checkpoints");
  if (!cp_j.is_array() || cp_j.size() < 2) {
    fail(origin, "/checkpoints", "expected an array of at least two times");
  }
  std::vector<double> checkpoints;
  for (std::size_t i = 0; i < cp_j.size(); ++i) {
    checkpoints.push_back(number(cp_j[i], origin, "/checkpoints/" + std::to_string(i)));
  }

  const double y = number(require(doc, origin, "", "initial_wealth"), origin,
                          "/initial_wealth");

  const json& targets_j = require(doc, origin, "", "targets");
  if (!targets_j.is_array() || targets_j.size() + 1 != checkpoints.size()) {
    fail(origin, "/targets", "expected one mean target per checkpoint after t_0");
  }
  std::vector<double> targets;
  for (std::size_t i = 0; i < targets_j.size(); ++i) {
    targets.push_back(number(targets_j[i], origin, "/targets/" + std::to_string(i)));
  }

  std::optional<MarketModel> market;
  try {
    market.emplace(horizon, std::move(rate), std::move(drift), std::move(vol), delta);
  } catch (const std::invalid_argument& e) {
    fail(origin, "/market", e.what());
  }
  std::optional<ProblemSpec> problem;
  try {
    problem.emplace(std::move(*market), std::move(checkpoints), y, std::move(targets));
  } catch (const std::invalid_argument& e) {
    fail(origin, "/checkpoints", e.what());
  }

  SimulationConfig sim;
  double record_step = 1e-2;
  if (doc.contains("simulation")) {
    const json& s = doc.at("simulation");
    if (!s.is_object()) fail(origin, "/simulation", "expected an object");
    if (s.contains("paths")) {
      const double v = number(s.at("paths"), origin, "/simulation/paths");
      if (v < 1) fail(origin, "/simulation/paths", "need at least one path");
      sim.n_paths = static_cast<std::int64_t>(v);
    }
    if (s.contains("step")) {
      sim.step = number(s.at("step"), origin, "/simulation/step");
      if (!(sim.step > 0)) fail(origin, "/simulation/step", "step must be positive");
    }
    if (s.contains("seed")) {
      sim.seed = static_cast<std::uint64_t>(number(s.at("seed"), origin, "/simulation/seed"));
    }
    if (s.contains("record_step")) {
      record_step = number(s.at("record_step"), origin, "/simulation/record_step");
      if (!(record_step > 0)) fail(origin, "/simulation/record_step", "must be positive");
    }
    if (s.contains("mdd_horizons")) {
      const json& h = s.at("mdd_horizons");
      if (!h.is_array()) fail(origin, "/simulation/mdd_horizons", "expected an array");
      for (std::size_t i = 0; i < h.size(); ++i) {
        sim.mdd_horizons.push_back(
            number(h[i], origin, "/simulation/mdd_horizons/" + std::to_string(i)));
      }
    }
  }
  sim.record_grid = make_record_grid(problem->market().horizon(), record_step);

  OutputOptions outputs;
  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    if (!o.is_object()) fail(origin, "/outputs", "expected an object");
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) fail(origin, "/outputs/dir", "expected a string");
      outputs.dir = o.at("dir").get<std::string>();
    }
    if (o.contains("formats")) {
      const json& f = o.at("formats");
      if (!f.is_array()) fail(origin, "/outputs/formats", "expected an array of strings");
      outputs.formats.clear();
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f[i].is_string()) {
          fail(origin, "/outputs/formats/" + std::to_string(i), "expected a string");
        }
        outputs.formats.push_back(f[i].get<std::string>());
      }
    }
    if (o.contains("timestamp")) {
      if (!o.at("timestamp").is_boolean()) {
        fail(origin, "/outputs/timestamp", "expected a boolean");
      }
      outputs.timestamp = o.at("timestamp").get<bool>();
    }
    if (o.contains("figures")) {
      const json& figs = o.at("figures");
      if (!figs.is_object()) fail(origin, "/outputs/figures", "expected an object");
      for (const auto& [key, value] : figs.items()) {
        if (!value.is_boolean()) fail(origin, "/outputs/figures/" + key, "expected a boolean");
        outputs.figures[key] = value.get<bool>();
      }
    }
  }

  return ExperimentConfig{std::move(*problem), std::move(sim), std::move(outputs),
                          record_step};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) {
    throw ConfigError("cannot open config file " + file.string());
  }
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_experiment_config(buffer.str(), file.filename().string());
}

}  // namespace mtmv
