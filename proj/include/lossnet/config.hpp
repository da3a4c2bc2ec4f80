#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lossnet/distributions.hpp"
#include "lossnet/engine.hpp"
#include "lossnet/exact.hpp"
#include "lossnet/model.hpp"

namespace lossnet {

/// Malformed or invalid experiment configuration. The message starts with
/// the JSON path (or line:column for syntax errors).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  /// First capacity; empty means "auto" (ceil of the largest offered load plus one step).
  std::optional<std::int64_t> capacity_start;
  std::int64_t capacity_step = 100;
  std::int64_t capacity_count = 1;
};

struct OutputPaths {
  std::string csv_path = "sweep.csv";
  std::string plot_data_path = "sweep.plot.dat";
};

struct ExperimentConfig {
  NetworkModel model;
  SweepSpec sweep;
  SimConfig sim;
  OutputPaths outputs;
  /// Explicit product-form instance for the `exact` subcommand.
  std::optional<ErlangInstance> exact_instance;
  std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
};

namespace config_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

inline double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline std::int64_t integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  fail(path, "expected an integer");
}

inline std::int64_t integer(const json& obj, const std::string& key, const std::string& path) {
  return integer(require(obj, key, path), path + "." + key);
}

inline std::uint64_t unsigned_integer(const json& obj, const std::string& key, const std::string& path) {
  const std::int64_t v = integer(obj, key, path);
  if (v < 0) fail(path + "." + key, "must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

inline std::string family(const json& obj, const std::string& path) {
  const json& f = require(obj, "family", path);
  if (!f.is_string()) fail(path + ".family", "expected a string");
  return f.get<std::string>();
}

template <class F>
auto guarded(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const DistributionError& e) {
    fail(path, e.what());
  }
}

}  // namespace config_detail

inline DemandDistribution parse_demand(const nlohmann::json& j, const std::string& path) {
  using namespace config_detail;
  const std::string fam = family(j, path);
  return guarded(path, [&] {
    if (fam == "truncated_power_law") {
      return build_truncated_power_law(number(j, "coef", path), number(j, "exponent", path),
                                       integer(j, "cutoff", path));
    }
    if (fam == "atom_plus_stretched_exp") {
      return build_atom_plus_stretched_exp(number(j, "atom_mass", path), integer(j, "atom_value", path),
                                           number(j, "coef", path), integer(j, "cutoff", path));
    }
    if (fam == "truncated_geometric") {
      return build_truncated_geometric(number(j, "ratio", path), integer(j, "cutoff", path));
    }
    if (fam == "deterministic") return build_deterministic_demand(integer(j, "value", path));
    fail(path + ".family", "unknown demand family '" + fam + "'");
  });
}

inline HoldingDistribution parse_holding(const nlohmann::json& j, const std::string& path) {
  using namespace config_detail;
  const std::string fam = family(j, path);
  return guarded(path, [&]() -> HoldingDistribution {
    if (fam == "exponential") {
      const bool has_mean = j.contains("mean");
      const bool has_rate = j.contains("rate");
      if (has_mean == has_rate) fail(path, "exponential needs exactly one of 'mean' or 'rate'");
      return has_mean ? make_exponential(number(j, "mean", path)) : make_exponential(1.0 / number(j, "rate", path));
    }
    if (fam == "deterministic") return make_deterministic(number(j, "value", path));
    if (fam == "uniform") return make_uniform(number(j, "lo", path), number(j, "hi", path));
    fail(path + ".family", "unknown holding family '" + fam + "'");
  });
}

inline ArrivalSpec parse_arrival(const nlohmann::json& j, const std::string& path) {
  using namespace config_detail;
  const std::string fam = family(j, path);
  if (fam == "poisson") return PoissonArrivals{number(j, "rate", path)};
  if (fam == "fixed_interval") return FixedIntervalArrivals{number(j, "spacing", path)};
  if (fam == "renewal") return RenewalArrivals{parse_holding(require(j, "interarrival", path), path + ".interarrival")};
  fail(path + ".family", "unknown arrival family '" + fam + "'");
}

/// Parses and validates a model description.
inline NetworkModel parse_model(const nlohmann::json& j, const std::string& path = "model") {
  using namespace config_detail;
  NetworkModel m;
  m.arrival = parse_arrival(require(j, "arrival", path), path + ".arrival");

  const json& caps = require(j, "capacities", path);
  if (!caps.is_array()) fail(path + ".capacities", "expected an array");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    m.capacities.push_back(integer(caps[i], path + ".capacities[" + std::to_string(i) + "]"));
  }

  const json& classes = require(j, "classes", path);
  if (!classes.is_array()) fail(path + ".classes", "expected an array");
  for (std::size_t l = 0; l < classes.size(); ++l) {
    const std::string cp = path + ".classes[" + std::to_string(l) + "]";
    const json& c = classes[l];
    RequestClass rc;
    rc.probability = number(c, "probability", cp);
    const json& demands = require(c, "demands", cp);
    if (!demands.is_array()) fail(cp + ".demands", "expected an array");
    for (std::size_t i = 0; i < demands.size(); ++i) {
      rc.demands.push_back(parse_demand(demands[i], cp + ".demands[" + std::to_string(i) + "]"));
    }
    rc.holding = parse_holding(require(c, "holding", cp), cp + ".holding");
    if (c.contains("delay")) rc.delay = parse_holding(c.at("delay"), cp + ".delay");
    m.classes.push_back(std::move(rc));
  }

  const auto violations = validate(m);
  if (!violations.empty()) {
    std::string msg = "invalid model";
    for (const auto& v : violations) msg += "\n  " + path + "." + to_string(v);
    throw ConfigError(msg);
  }
  return m;
}

inline ErlangInstance parse_exact_instance(const nlohmann::json& j, const std::string& path = "exact") {
  using namespace config_detail;
  ErlangInstance inst;
  const json& rows = require(j, "demand_matrix", path);
  if (!rows.is_array()) fail(path + ".demand_matrix", "expected an array of rows");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::string rp = path + ".demand_matrix[" + std::to_string(k) + "]";
    if (!rows[k].is_array()) fail(rp, "expected an array");
    std::vector<std::int64_t> row;
    for (std::size_t l = 0; l < rows[k].size(); ++l) row.push_back(integer(rows[k][l], rp + "[" + std::to_string(l) + "]"));
    inst.demand_matrix.push_back(std::move(row));
  }
  const json& caps = require(j, "capacities", path);
  if (!caps.is_array()) fail(path + ".capacities", "expected an array");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    inst.capacities.push_back(integer(caps[i], path + ".capacities[" + std::to_string(i) + "]"));
  }
  const json& rho = require(j, "intensities", path);
  if (!rho.is_array()) fail(path + ".intensities", "expected an array");
  for (std::size_t l = 0; l < rho.size(); ++l) {
    if (!rho[l].is_number()) fail(path + ".intensities[" + std::to_string(l) + "]", "expected a number");
    inst.intensities.push_back(rho[l].get<double>());
  }
  try {
    inst.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return inst;
}

namespace config_detail {
inline ExperimentConfig parse_root(const nlohmann::json& root);
}  // namespace config_detail

/// Parses an experiment config from JSON text. Sections other than "model"
/// are optional and fall back to the desk-scale defaults.
inline ExperimentConfig parse_experiment(const std::string& text) {
  using namespace config_detail;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  if (!root.is_object()) fail("$", "expected a top-level object");
  try {
    return config_detail::parse_root(root);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("$: ") + e.what());
  }
}

namespace config_detail {

inline ExperimentConfig parse_root(const json& root) {
  ExperimentConfig cfg;
  cfg.model = parse_model(require(root, "model", "$"), "model");

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    if (s.contains("capacity_start")) {
      const json& start = s.at("capacity_start");
      if (start.is_string()) {
        if (start.get<std::string>() != "auto") fail("sweep.capacity_start", "expected an integer or \"auto\"");
        cfg.sweep.capacity_start.reset();
      } else {
        cfg.sweep.capacity_start = integer(start, "sweep.capacity_start");
      }
    } else {
      cfg.sweep.capacity_start = cfg.model.capacities.front();
    }
    if (s.contains("capacity_step")) cfg.sweep.capacity_step = integer(s, "capacity_step", "sweep");
    if (s.contains("capacity_count")) cfg.sweep.capacity_count = integer(s, "capacity_count", "sweep");
    if (cfg.sweep.capacity_step <= 0) fail("sweep.capacity_step", "must be positive");
    if (cfg.sweep.capacity_count < 1) fail("sweep.capacity_count", "must be at least 1");
    if (cfg.sweep.capacity_start && *cfg.sweep.capacity_start <= 0) fail("sweep.capacity_start", "must be positive");
  } else {
    cfg.sweep.capacity_start = cfg.model.capacities.front();
  }

  if (root.contains("sim")) {
    const json& s = root.at("sim");
    if (s.contains("warmup_arrivals")) cfg.sim.warmup_arrivals = unsigned_integer(s, "warmup_arrivals", "sim");
    if (s.contains("measured_arrivals")) cfg.sim.measured_arrivals = unsigned_integer(s, "measured_arrivals", "sim");
    if (s.contains("seed")) cfg.sim.seed = unsigned_integer(s, "seed", "sim");
    if (s.contains("replications")) {
      cfg.sim.replications = static_cast<std::uint32_t>(unsigned_integer(s, "replications", "sim"));
    }
    if (cfg.sim.measured_arrivals < 1) fail("sim.measured_arrivals", "must be at least 1");
    if (cfg.sim.replications < 1) fail("sim.replications", "must be at least 1");
  }

  if (root.contains("outputs")) {
    const json& o = root.at("outputs");
    if (o.contains("csv_path")) cfg.outputs.csv_path = o.at("csv_path").get<std::string>();
    if (o.contains("plot_data_path")) cfg.outputs.plot_data_path = o.at("plot_data_path").get<std::string>();
  }

  if (root.contains("exact")) {
    const json& e = root.at("exact");
    if (e.contains("enumeration_limit")) cfg.enumeration_limit = unsigned_integer(e, "enumeration_limit", "exact");
    if (e.contains("demand_matrix")) cfg.exact_instance = parse_exact_instance(e, "exact");
  }
  return cfg;
}

}  // namespace config_detail

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_experiment(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ":" + e.what());
  }
}

}  // namespace lossnet
