#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lossnet/asymptotics.hpp"
#include "lossnet/config.hpp"
#include "lossnet/engine.hpp"
#include "lossnet/exact.hpp"
#include "lossnet/model.hpp"

namespace lossnet {

inline constexpr const char* kSweepCsvHeader = "capacity,p_sim,std_err,p_asym,p_exact,log10_sim,log10_asym";

struct SweepRow {
  std::int64_t capacity = 0;
  double p_sim = 0.0;
  double std_err = 0.0;
  double p_asym = 0.0;
  std::optional<double> p_exact;
  std::optional<double> log10_sim;
  std::optional<double> log10_asym;
};

/// First capacity of the sweep; "auto" is ceil(max offered load) + step.
inline std::int64_t resolve_sweep_start(const ExperimentConfig& cfg) {
  if (cfg.sweep.capacity_start) return *cfg.sweep.capacity_start;
  double top = 0.0;
  for (double x : offered_load(cfg.model)) top = std::max(top, x);
  return static_cast<std::int64_t>(std::ceil(top)) + cfg.sweep.capacity_step;
}

/// Product-form instance of a Poisson model whose demands are all point
/// masses, with rho_l = rate * p_l * E[holding_l]. Classes without demand or
/// with zero probability are dropped. Empty when the model does not qualify.
inline std::optional<ErlangInstance> erlang_instance_for(const NetworkModel& model,
                                                         std::vector<std::size_t>* kept = nullptr) {
  const auto* poisson = std::get_if<PoissonArrivals>(&model.arrival);
  if (!poisson || model.has_reservations()) return std::nullopt;
  ErlangInstance inst;
  inst.capacities = model.capacities;
  inst.demand_matrix.assign(model.pool_count(), {});
  for (std::size_t l = 0; l < model.class_count(); ++l) {
    const auto& c = model.classes[l];
    bool uses = false;
    for (const auto& d : c.demands) {
      if (!d.is_point_mass()) return std::nullopt;
      uses = uses || d.support_max() > 0;
    }
    if (!uses || c.probability == 0.0) continue;
    const double rho = poisson->rate * c.probability * mean_holding(c.holding);
    if (!(rho > 0.0)) return std::nullopt;
    for (std::size_t i = 0; i < model.pool_count(); ++i) inst.demand_matrix[i].push_back(c.demands[i].support_max());
    inst.intensities.push_back(rho);
    if (kept) kept->push_back(l);
  }
  if (inst.intensities.empty()) return std::nullopt;
  return inst;
}

/// Exact overall blocking sum_l p_l B_l when the model admits the product
/// form and the state space fits within the limit.
inline std::optional<double> exact_overall_blocking(const NetworkModel& model,
                                                    std::uint64_t limit = kDefaultEnumerationLimit) {
  std::vector<std::size_t> kept;
  const auto inst = erlang_instance_for(model, &kept);
  if (!inst) return std::nullopt;
  try {
    const auto b = per_class_blocking(*inst, limit);
    double p = 0.0;
    for (std::size_t k = 0; k < kept.size(); ++k) p += model.classes[kept[k]].probability * b[k];
    return p;
  } catch (const EnumerationLimitExceeded&) {
    return std::nullopt;
  }
}

inline std::optional<double> log10_if_positive(double p) {
  if (p > 0.0) return std::log10(p);
  return std::nullopt;
}

/// One row per capacity; every pool takes the same capacity. Replications of
/// all points run concurrently; rows come back in capacity order.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, unsigned threads = 0) {
  const std::int64_t start = resolve_sweep_start(cfg);
  const auto points = static_cast<std::size_t>(cfg.sweep.capacity_count);
  const std::size_t reps = cfg.sim.replications;

  std::vector<NetworkModel> models;
  for (std::size_t j = 0; j < points; ++j) {
    models.push_back(cfg.model.with_uniform_capacity(start + static_cast<std::int64_t>(j) * cfg.sweep.capacity_step));
  }

  std::vector<Counters> counters(points * reps);
  detail::parallel_for(
      counters.size(),
      [&](std::size_t job) { counters[job] = run_replication(models[job / reps], cfg.sim, job % reps); }, threads);

  std::vector<SweepRow> rows;
  for (std::size_t j = 0; j < points; ++j) {
    std::vector<Counters> mine(counters.begin() + static_cast<std::ptrdiff_t>(j * reps),
                               counters.begin() + static_cast<std::ptrdiff_t>((j + 1) * reps));
    const BlockingEstimate est = aggregate(std::move(mine));
    SweepRow row;
    row.capacity = models[j].capacities.front();
    row.p_sim = est.p_hat;
    row.std_err = est.std_err;
    row.p_asym = network_asymptote(models[j], classify_tails(models[j])).value;
    row.p_exact = exact_overall_blocking(models[j], cfg.enumeration_limit);
    row.log10_sim = log10_if_positive(row.p_sim);
    row.log10_asym = log10_if_positive(row.p_asym);
    rows.push_back(row);
  }
  return rows;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : std::string{}; }

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.capacity);
    out += ',' + format_number(r.p_sim);
    out += ',' + format_number(r.std_err);
    out += ',' + format_number(r.p_asym);
    out += ',' + format_optional(r.p_exact);
    out += ',' + format_optional(r.log10_sim);
    out += ',' + format_optional(r.log10_asym);
    out += '\n';
  }
  return out;
}

/// Two-column (capacity, log10 p) blocks, one per curve, separated by two
/// blank lines so gnuplot can address them with `index`.
inline std::string sweep_plot_data(const std::vector<SweepRow>& rows) {
  std::string out;
  auto block = [&](const char* name, auto&& value) {
    if (!out.empty()) out += "\n\n";
    out += "# curve: ";
    out += name;
    out += "\n# capacity log10_p\n";
    for (const auto& r : rows) {
      const std::optional<double> v = value(r);
      if (v) out += std::to_string(r.capacity) + ' ' + format_number(*v) + '\n';
    }
  };
  block("simulation", [](const SweepRow& r) { return r.log10_sim; });
  block("asymptote", [](const SweepRow& r) { return r.log10_asym; });
  bool any_exact = false;
  for (const auto& r : rows) any_exact = any_exact || r.p_exact.has_value();
  if (any_exact) {
    block("exact", [](const SweepRow& r) { return r.p_exact ? log10_if_positive(*r.p_exact) : std::nullopt; });
  }
  return out;
}

}  // namespace lossnet
