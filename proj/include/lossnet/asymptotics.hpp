#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossnet/distributions.hpp"
#include "lossnet/model.hpp"

namespace lossnet {

/// Two subexponential tails that the declared order cannot rank.
class HeavyTieUnorderable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Split of the classes using one resource into dominant heavy tails and the rest.
struct ResourceTails {
  /// Classes whose tail is proportional to the reference tail F_i.
  std::vector<std::size_t> heavy;
  /// Classes with nonzero demand whose tails are dominated by F_i.
  std::vector<std::size_t> light;
  /// Member of `heavy` whose demand law defines F_i; empty when heavy is.
  std::optional<std::size_t> reference;
  /// c_{l,i}, parallel to `heavy`; 1 for the reference class.
  std::vector<double> coefficients;
};

struct TailClassification {
  std::vector<ResourceTails> resources;
};

/// Partitions the classes of every resource by declared tail family.
///
/// The heaviest family among classes with nonzero demand on pool i becomes
/// F_i. When it is subexponential, every class with a proportional family
/// (same variant and shape) joins the heavy set with coefficient relative to
/// the lowest-indexed such class; lighter classes, including lighter
/// subexponential ones, go to the light set. Dominance is decided from the
/// declared families, never by comparing numeric tails.
inline TailClassification classify_tails(const NetworkModel& model) {
  TailClassification out;
  out.resources.resize(model.pool_count());
  for (std::size_t i = 0; i < model.pool_count(); ++i) {
    auto& r = out.resources[i];
    std::vector<std::size_t> users;
    for (std::size_t l = 0; l < model.class_count(); ++l) {
      if (model.classes[l].demands[i].tail(0) > 0.0) users.push_back(l);
    }
    if (users.empty()) continue;

    std::size_t top = users.front();
    for (std::size_t l : users) {
      if (heavier_than(model.classes[l].demands[i].tail_family(), model.classes[top].demands[i].tail_family())) {
        top = l;
      }
    }
    const TailFamily& heaviest = model.classes[top].demands[i].tail_family();
    if (!is_subexponential(heaviest)) {
      r.light = users;
      continue;
    }
    for (std::size_t l : users) {
      const TailFamily& f = model.classes[l].demands[i].tail_family();
      if (proportional(f, heaviest)) {
        if (heaviest.index() != f.index()) {
          throw HeavyTieUnorderable("resource " + std::to_string(i) + ": " + to_string(f) + " and " +
                                    to_string(heaviest) + " cannot be ordered");
        }
        r.heavy.push_back(l);
      } else {
        r.light.push_back(l);
      }
    }
    r.reference = r.heavy.front();
    const double ref = tail_coefficient(model.classes[*r.reference].demands[i].tail_family());
    for (std::size_t l : r.heavy) {
      r.coefficients.push_back(tail_coefficient(model.classes[l].demands[i].tail_family()) / ref);
    }
  }
  return out;
}

struct AsymptoteResult {
  double value = 0.0;
  /// Hypotheses that failed; the value is still returned.
  std::vector<std::string> warnings;
};

/// P[B > C], the blocking asymptote of a single pool with or without
/// advance reservations.
inline AsymptoteResult single_pool_asymptote(const DemandDistribution& demand, std::int64_t capacity) {
  AsymptoteResult r{demand.tail(capacity), {}};
  if (!is_subexponential(demand.tail_family())) {
    r.warnings.push_back("demand tail " + to_string(demand.tail_family()) +
                         " is not subexponential; the asymptote is not justified");
  }
  return r;
}

/// sum_i sum_{l in H_i} p_l c_{l,i} P[F_i > C_i], with F_i the reference
/// class's concrete demand law on pool i.
inline AsymptoteResult network_asymptote(const NetworkModel& model, const TailClassification& classification) {
  if (classification.resources.size() != model.pool_count()) {
    throw std::invalid_argument("network_asymptote: classification does not match the model");
  }
  AsymptoteResult r;
  bool any_heavy = false;
  for (std::size_t i = 0; i < model.pool_count(); ++i) {
    const auto& res = classification.resources[i];
    if (res.heavy.empty()) continue;
    any_heavy = true;
    const double ref_tail = model.classes[*res.reference].demands[i].tail(model.capacities[i]);
    for (std::size_t k = 0; k < res.heavy.size(); ++k) {
      r.value += model.classes[res.heavy[k]].probability * res.coefficients[k] * ref_tail;
    }
  }
  if (!any_heavy) {
    r.warnings.push_back("no resource carries a subexponential demand; the network asymptote's hypotheses fail");
  }
  return r;
}

}  // namespace lossnet
