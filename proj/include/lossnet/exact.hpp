#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lossnet {

/// Default cap on |S(C)| for product-form enumeration.
inline constexpr std::uint64_t kDefaultEnumerationLimit = 10'000'000;

class EnumerationLimitExceeded : public std::runtime_error {
public:
  explicit EnumerationLimitExceeded(std::uint64_t limit)
      : std::runtime_error("state space exceeds the enumeration limit of " + std::to_string(limit) + " states"),
        limit_(limit) {}

  std::uint64_t limit() const { return limit_; }

private:
  std::uint64_t limit_;
};

/// Erlang-B blocking via E(rho, c) = rho E(rho, c-1) / (c + rho E(rho, c-1)), E(rho, 0) = 1.
inline double erlang_b(double rho, std::int64_t capacity) {
  if (!(rho >= 0.0)) throw std::invalid_argument("erlang_b: rho must be nonnegative");
  double e = 1.0;
  for (std::int64_t c = 1; c <= capacity; ++c) e = rho * e / (static_cast<double>(c) + rho * e);
  return e;
}

/// Poisson loss network with fixed demand vectors.
struct ErlangInstance {
  /// demand_matrix[k][l] = units of resource k held by one class-l call.
  std::vector<std::vector<std::int64_t>> demand_matrix;
  std::vector<std::int64_t> capacities;
  std::vector<double> intensities;

  std::size_t resources() const { return demand_matrix.size(); }
  std::size_t classes() const { return intensities.size(); }

  void validate() const {
    if (demand_matrix.empty() || demand_matrix.size() != capacities.size()) {
      throw std::invalid_argument("ErlangInstance: demand matrix needs one row per capacity");
    }
    for (const auto& row : demand_matrix) {
      if (row.size() != intensities.size()) {
        throw std::invalid_argument("ErlangInstance: demand matrix needs one column per intensity");
      }
      for (auto a : row) {
        if (a < 0) throw std::invalid_argument("ErlangInstance: demands must be nonnegative");
      }
    }
    for (std::size_t l = 0; l < intensities.size(); ++l) {
      if (!(intensities[l] > 0.0)) throw std::invalid_argument("ErlangInstance: intensities must be positive");
      bool used = false;
      for (const auto& row : demand_matrix) used = used || row[l] > 0;
      if (!used) {
        throw std::invalid_argument("ErlangInstance: class " + std::to_string(l) + " uses no resource");
      }
    }
  }
};

namespace detail {

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += (std::abs(sum_) >= std::abs(x)) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Enumerator {
  const ErlangInstance& inst;
  std::vector<std::int64_t> free;
  std::uint64_t limit;
  std::uint64_t states = 0;
  CompensatedSum total;

  // Lexicographic walk over n_l for l = cls..M-1; weight carries prod rho^n / n!.
  void walk(std::size_t cls, double weight) {
    if (cls == inst.classes()) {
      if (++states > limit) throw EnumerationLimitExceeded(limit);
      total.add(weight);
      return;
    }
    const double rho = inst.intensities[cls];
    std::int64_t n = 0;
    double w = weight;
    while (true) {
      walk(cls + 1, w);
      bool fits = true;
      for (std::size_t k = 0; k < inst.resources(); ++k) {
        if (inst.demand_matrix[k][cls] > free[k]) fits = false;
      }
      if (!fits) break;
      for (std::size_t k = 0; k < inst.resources(); ++k) free[k] -= inst.demand_matrix[k][cls];
      ++n;
      w *= rho / static_cast<double>(n);
    }
    for (std::size_t k = 0; k < inst.resources(); ++k) free[k] += n * inst.demand_matrix[k][cls];
  }
};

}  // namespace detail

/// G(C) = sum over {n : A n <= C} of prod_l rho_l^n_l / n_l!.
/// Zero when any capacity coordinate is negative.
inline double normalization_constant(const ErlangInstance& inst, std::span<const std::int64_t> capacities,
                                     std::uint64_t limit = kDefaultEnumerationLimit) {
  inst.validate();
  if (capacities.size() != inst.resources()) {
    throw std::invalid_argument("normalization_constant: capacity vector has the wrong length");
  }
  for (auto c : capacities) {
    if (c < 0) return 0.0;
  }
  detail::Enumerator e{inst, {capacities.begin(), capacities.end()}, limit};
  e.walk(0, 1.0);
  return e.total.value();
}

/// Per-class blocking B_l = 1 - G(C - A e_l) / G(C).
inline std::vector<double> per_class_blocking(const ErlangInstance& inst,
                                              std::uint64_t limit = kDefaultEnumerationLimit) {
  const double g = normalization_constant(inst, inst.capacities, limit);
  std::vector<double> out(inst.classes());
  for (std::size_t l = 0; l < inst.classes(); ++l) {
    std::vector<std::int64_t> reduced(inst.capacities);
    for (std::size_t k = 0; k < inst.resources(); ++k) reduced[k] -= inst.demand_matrix[k][l];
    const double gl = normalization_constant(inst, reduced, limit);
    out[l] = gl == 0.0 ? 1.0 : std::clamp(1.0 - gl / g, 0.0, 1.0);
  }
  return out;
}

/// Single-resource multirate blocking via the occupancy recursion
/// g(0) = 1, j g(j) = sum_l a_l rho_l g(j - a_l).
inline std::vector<double> kaufman_roberts(std::int64_t capacity, std::span<const std::int64_t> demands,
                                           std::span<const double> intensities) {
  if (capacity < 0) throw std::invalid_argument("kaufman_roberts: capacity must be nonnegative");
  if (demands.size() != intensities.size()) {
    throw std::invalid_argument("kaufman_roberts: demands and intensities differ in length");
  }
  for (std::size_t l = 0; l < demands.size(); ++l) {
    if (demands[l] <= 0 || !(intensities[l] > 0.0)) {
      throw std::invalid_argument("kaufman_roberts: demands and intensities must be positive");
    }
  }
  const auto cap = static_cast<std::size_t>(capacity);
  std::vector<double> g(cap + 1, 0.0);
  g[0] = 1.0;
  for (std::size_t j = 1; j <= cap; ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < demands.size(); ++l) {
      const auto a = static_cast<std::size_t>(demands[l]);
      if (a <= j) s += static_cast<double>(a) * intensities[l] * g[j - a];
    }
    g[j] = s / static_cast<double>(j);
    if (g[j] > 1e250) {
      for (std::size_t i = 0; i <= j; ++i) g[i] *= 1e-250;
    }
  }
  detail::CompensatedSum norm;
  for (double x : g) norm.add(x);
  std::vector<double> out(demands.size());
  for (std::size_t l = 0; l < demands.size(); ++l) {
    const auto a = static_cast<std::size_t>(demands[l]);
    if (a > cap) {
      out[l] = 1.0;
      continue;
    }
    detail::CompensatedSum blocked;
    for (std::size_t j = cap - a + 1; j <= cap; ++j) blocked.add(g[j]);
    out[l] = blocked.value() / norm.value();
  }
  return out;
}

}  // namespace lossnet
