#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lossnet/distributions.hpp"

namespace lossnet {

struct PoissonArrivals {
  double rate;
};

struct FixedIntervalArrivals {
  double spacing;
};

struct RenewalArrivals {
  HoldingDistribution interarrival;
};

using ArrivalSpec = std::variant<PoissonArrivals, FixedIntervalArrivals, RenewalArrivals>;

/// Long-run arrival rate.
inline double arrival_rate(const ArrivalSpec& a) {
  if (const auto* p = std::get_if<PoissonArrivals>(&a)) return p->rate;
  if (const auto* f = std::get_if<FixedIntervalArrivals>(&a)) return 1.0 / f->spacing;
  return 1.0 / mean_holding(std::get<RenewalArrivals>(a).interarrival);
}

template <class Stream>
double sample_interarrival(const ArrivalSpec& a, Stream& rng) {
  if (const auto* p = std::get_if<PoissonArrivals>(&a)) return -std::log1p(-rng.uniform()) / p->rate;
  if (const auto* f = std::get_if<FixedIntervalArrivals>(&a)) return f->spacing;
  return sample_holding(std::get<RenewalArrivals>(a).interarrival, rng);
}

struct RequestClass {
  double probability = 1.0;
  /// One law per resource pool; Deterministic(0) for pools the class does not use.
  std::vector<DemandDistribution> demands;
  HoldingDistribution holding = Exponential{1.0};
  /// Lead time between arrival and start of occupancy (advance reservation).
  std::optional<HoldingDistribution> delay;
};

struct NetworkModel {
  ArrivalSpec arrival = PoissonArrivals{1.0};
  std::vector<RequestClass> classes;
  std::vector<std::int64_t> capacities;

  std::size_t pool_count() const { return capacities.size(); }
  std::size_t class_count() const { return classes.size(); }

  bool has_reservations() const {
    for (const auto& c : classes) {
      if (c.delay) return true;
    }
    return false;
  }

  /// Copy with every pool set to the same capacity.
  NetworkModel with_uniform_capacity(std::int64_t capacity) const {
    NetworkModel m = *this;
    for (auto& c : m.capacities) c = capacity;
    return m;
  }
};

struct Violation {
  std::string path;
  std::string message;
};

inline std::string to_string(const Violation& v) { return v.path + ": " + v.message; }

/// Every invariant violation of the model; empty when valid.
inline std::vector<Violation> validate(const NetworkModel& model) {
  std::vector<Violation> out;
  auto fmt = [](double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
  };

  if (const auto* p = std::get_if<PoissonArrivals>(&model.arrival)) {
    if (!(p->rate > 0.0) || !std::isfinite(p->rate)) out.push_back({"arrival.rate", "must be positive"});
  } else if (const auto* f = std::get_if<FixedIntervalArrivals>(&model.arrival)) {
    if (!(f->spacing > 0.0) || !std::isfinite(f->spacing)) {
      out.push_back({"arrival.spacing", "must be positive"});
    }
  } else {
    const double m = mean_holding(std::get<RenewalArrivals>(model.arrival).interarrival);
    if (!(m > 0.0) || !std::isfinite(m)) {
      out.push_back({"arrival.interarrival", "mean must be finite and positive"});
    }
  }

  if (model.capacities.empty()) out.push_back({"capacities", "at least one resource pool is required"});
  for (std::size_t i = 0; i < model.capacities.size(); ++i) {
    if (model.capacities[i] <= 0) {
      out.push_back({"capacities[" + std::to_string(i) + "]", "must be a positive integer"});
    }
  }

  if (model.classes.empty()) out.push_back({"classes", "at least one request class is required"});
  double total = 0.0;
  for (std::size_t l = 0; l < model.classes.size(); ++l) {
    const auto& c = model.classes[l];
    const std::string path = "classes[" + std::to_string(l) + "]";
    if (!(c.probability >= 0.0 && c.probability <= 1.0)) {
      out.push_back({path + ".probability", "must lie in [0,1], got " + fmt(c.probability)});
    }
    total += c.probability;
    if (c.demands.size() != model.capacities.size()) {
      out.push_back({path + ".demands", "has " + std::to_string(c.demands.size()) + " entries but the model has " +
                                            std::to_string(model.capacities.size()) + " resource pools"});
    }
    const double h = mean_holding(c.holding);
    if (!std::isfinite(h) || h < 0.0) out.push_back({path + ".holding", "mean must be finite"});
    if (c.delay && !std::isfinite(mean_holding(*c.delay))) {
      out.push_back({path + ".delay", "mean must be finite"});
    }
  }
  if (!model.classes.empty() && std::abs(total - 1.0) > kMassTolerance) {
    out.push_back({"classes", "class probabilities sum to " + fmt(total)});
  }
  return out;
}

/// Mean engaged capacity per pool: rate * sum_l p_l * E[holding_l] * E[demand_{l,i}].
inline std::vector<double> offered_load(const NetworkModel& model) {
  const double rate = arrival_rate(model.arrival);
  std::vector<double> load(model.pool_count(), 0.0);
  for (const auto& c : model.classes) {
    const double weight = c.probability * mean_holding(c.holding);
    for (std::size_t i = 0; i < load.size() && i < c.demands.size(); ++i) {
      load[i] += weight * c.demands[i].mean();
    }
  }
  for (auto& x : load) x *= rate;
  return load;
}

}  // namespace lossnet
