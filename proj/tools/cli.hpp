#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lossnet/lossnet.hpp"

namespace lossnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> warmup;
  std::optional<std::uint64_t> measure;
  std::optional<std::uint32_t> replications;
};

/// Flag beats LOSSNET_SEED, which beats the config file.
inline void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (const char* env = std::getenv("LOSSNET_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      cfg.sim.seed = v;
    } catch (const std::exception&) {
      throw UsageError(std::string("LOSSNET_SEED is not an unsigned integer: ") + env);
    }
  }
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.warmup) cfg.sim.warmup_arrivals = *o.warmup;
  if (o.measure) {
    if (*o.measure == 0) throw UsageError("--measure must be at least 1");
    cfg.sim.measured_arrivals = *o.measure;
  }
  if (o.replications) {
    if (*o.replications == 0) throw UsageError("--replications must be at least 1");
    cfg.sim.replications = *o.replications;
  }
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path);
}

inline std::string join_indices(const std::vector<std::size_t>& v) {
  std::string s = "{";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += std::to_string(v[k] + 1);
  }
  return s + "}";
}

inline int cmd_simulate(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& out) {
  const BlockingEstimate est = estimate(cfg.model, cfg.sim);
  out << "capacities:";
  for (auto c : cfg.model.capacities) out << ' ' << c;
  out << "\nreplications: " << est.replication_count << " x " << cfg.sim.measured_arrivals
      << " measured arrivals (warm-up " << cfg.sim.warmup_arrivals << ", seed " << cfg.sim.seed << ")\n";
  out << "p_hat: " << format_number(est.p_hat) << "\nstd_err: " << format_number(est.std_err) << '\n';
  for (std::size_t l = 0; l < est.p_hat_class.size(); ++l) {
    out << "class " << l + 1 << " p_hat: " << format_number(est.p_hat_class[l]) << '\n';
  }
  if (!out_path.empty()) {
    nlohmann::json j;
    j["p_hat"] = est.p_hat;
    j["std_err"] = est.std_err;
    j["p_hat_class"] = est.p_hat_class;
    j["replication_count"] = est.replication_count;
    for (const auto& r : est.replications) {
      nlohmann::json rep;
      rep["arrivals"] = r.arrivals_total;
      rep["blocked"] = r.blocked_total();
      j["replications"].push_back(rep);
    }
    write_file(out_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

inline int cmd_asymptote(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& out,
                         std::ostream& err) {
  const TailClassification cls = classify_tails(cfg.model);
  const AsymptoteResult res = network_asymptote(cfg.model, cls);
  nlohmann::json j;
  for (std::size_t i = 0; i < cls.resources.size(); ++i) {
    const auto& r = cls.resources[i];
    out << "resource " << i + 1 << " (C=" << cfg.model.capacities[i] << "): heavy " << join_indices(r.heavy)
        << ", light " << join_indices(r.light);
    nlohmann::json jr;
    jr["capacity"] = cfg.model.capacities[i];
    jr["heavy"] = nlohmann::json::array();
    jr["light"] = r.light;
    for (std::size_t k = 0; k < r.heavy.size(); ++k) {
      jr["heavy"].push_back({{"class", r.heavy[k]}, {"coefficient", r.coefficients[k]}});
    }
    if (r.reference) {
      const auto& ref = cfg.model.classes[*r.reference].demands[i];
      out << ", reference class " << *r.reference + 1 << " " << to_string(ref.tail_family())
          << ", tail(C)=" << format_number(ref.tail(cfg.model.capacities[i]));
      jr["reference"] = *r.reference;
    }
    out << '\n';
    j["resources"].push_back(jr);
  }
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';
  out << "asymptote: " << format_number(res.value) << '\n';
  j["value"] = res.value;
  j["warnings"] = res.warnings;
  if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
  return kExitOk;
}

inline int cmd_exact(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& out) {
  std::optional<ErlangInstance> inst = cfg.exact_instance;
  std::vector<std::size_t> kept;
  if (!inst) {
    inst = erlang_instance_for(cfg.model, &kept);
    if (!inst) {
      throw UsageError(
          "exact needs an 'exact' instance in the config or a Poisson model with deterministic demands and no "
          "reservations");
    }
  } else {
    for (std::size_t l = 0; l < inst->classes(); ++l) kept.push_back(l);
  }
  const auto b = per_class_blocking(*inst, cfg.enumeration_limit);
  nlohmann::json j;
  for (std::size_t k = 0; k < b.size(); ++k) {
    out << "class " << kept[k] + 1 << " blocking: " << format_number(b[k]) << '\n';
    j["per_class_blocking"].push_back(b[k]);
  }
  if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
  return kExitOk;
}

inline std::string plot_path_for(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.find_last_of('/');
  const std::string stem =
      (dot != std::string::npos && (slash == std::string::npos || dot > slash)) ? csv_path.substr(0, dot) : csv_path;
  return stem + ".plot.dat";
}

inline int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& out) {
  const auto rows = run_sweep(cfg);
  const std::string csv_path = out_path.empty() ? cfg.outputs.csv_path : out_path;
  const std::string plot_path = out_path.empty() ? cfg.outputs.plot_data_path : plot_path_for(out_path);
  write_file(csv_path, sweep_csv(rows));
  write_file(plot_path, sweep_plot_data(rows));

  out << std::left << std::setw(10) << "capacity" << std::setw(20) << "p_sim" << std::setw(20) << "std_err"
      << std::setw(20) << "p_asym" << "p_exact\n";
  for (const auto& r : rows) {
    out << std::setw(10) << r.capacity << std::setw(20) << format_number(r.p_sim) << std::setw(20)
        << format_number(r.std_err) << std::setw(20) << format_number(r.p_asym)
        << (r.p_exact ? format_number(*r.p_exact) : "-") << '\n';
  }
  out << "wrote " << csv_path << " and " << plot_path << '\n';
  return kExitOk;
}

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loss-network blocking: simulation, asymptotes, exact formulas", "lossnet"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  Overrides ov;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_path, "Output file");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seed", ov.seed, "Base seed (overrides LOSSNET_SEED and the config)");
    sub->add_option("--warmup", ov.warmup, "Warm-up arrivals per replication");
    sub->add_option("--measure", ov.measure, "Measured arrivals per replication");
    sub->add_option("--replications", ov.replications, "Independent replications");
  };

  auto* simulate = app.add_subcommand("simulate", "Estimate blocking at the configured capacities");
  auto* asymptote = app.add_subcommand("asymptote", "Tail classification and asymptotic blocking");
  auto* exact = app.add_subcommand("exact", "Exact per-class blocking (product form)");
  auto* sweep = app.add_subcommand("sweep", "Capacity sweep: simulation vs asymptote vs exact");
  for (auto* s : {simulate, asymptote, exact, sweep}) add_common(s);
  add_sim(simulate);
  add_sim(sweep);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    ExperimentConfig cfg = load_experiment(config_path);
    apply_overrides(cfg, ov);
    if (*simulate) return cmd_simulate(cfg, out_path, out);
    if (*asymptote) return cmd_asymptote(cfg, out_path, out, err);
    if (*exact) return cmd_exact(cfg, out_path, out);
    return cmd_sweep(cfg, out_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "runtime fault: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace lossnet::cli
