#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lossnet/random.hpp"

namespace lossnet {

/// Absolute tolerance for probability-mass checks.
inline constexpr double kMassTolerance = 1e-12;

class DistributionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Tail families
// ---------------------------------------------------------------------------

/// Survival function ~ coefficient * x^-index.
/// Locale-independent decimal with 12 significant digits.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

struct RegularlyVarying {
  double index;
  double coefficient;
  friend bool operator==(const RegularlyVarying&, const RegularlyVarying&) = default;
};

/// Survival function ~ coefficient * exp(-x^shape) up to lower-order factors, 0 < shape < 1.
struct StretchedExponential {
  double shape;
  double coefficient;
  friend bool operator==(const StretchedExponential&, const StretchedExponential&) = default;
};

struct LightTailed {
  friend bool operator==(const LightTailed&, const LightTailed&) = default;
};

struct Bounded {
  friend bool operator==(const Bounded&, const Bounded&) = default;
};

/// Declared asymptotic tail of the untruncated parent law.
using TailFamily = std::variant<RegularlyVarying, StretchedExponential, LightTailed, Bounded>;

inline TailFamily make_regularly_varying(double index, double coefficient) {
  if (!(index > 0.0) || !(coefficient > 0.0)) {
    throw DistributionError("RegularlyVarying requires index > 0 and coefficient > 0");
  }
  return RegularlyVarying{index, coefficient};
}

inline TailFamily make_stretched_exponential(double shape, double coefficient) {
  if (!(shape > 0.0 && shape < 1.0) || !(coefficient > 0.0)) {
    throw DistributionError("StretchedExponential requires 0 < shape < 1 and coefficient > 0");
  }
  return StretchedExponential{shape, coefficient};
}

inline bool is_subexponential(const TailFamily& f) {
  return std::holds_alternative<RegularlyVarying>(f) ||
         std::holds_alternative<StretchedExponential>(f);
}

namespace detail {

inline int family_rank(const TailFamily& f) {
  // Index order of the variant is heaviest-first.
  return 3 - static_cast<int>(f.index());
}

}  // namespace detail

/// Strict order "a has an asymptotically heavier tail than b".
/// Equal-parameter families (coefficients aside) are neither heavier nor lighter.
inline bool heavier_than(const TailFamily& a, const TailFamily& b) {
  const int ra = detail::family_rank(a);
  const int rb = detail::family_rank(b);
  if (ra != rb) return ra > rb;
  if (const auto* rv = std::get_if<RegularlyVarying>(&a)) {
    return rv->index < std::get<RegularlyVarying>(b).index;
  }
  if (const auto* se = std::get_if<StretchedExponential>(&a)) {
    return se->shape < std::get<StretchedExponential>(b).shape;
  }
  return false;
}

/// Same variant and shape parameters, so the tails are asymptotically proportional.
inline bool proportional(const TailFamily& a, const TailFamily& b) {
  return !heavier_than(a, b) && !heavier_than(b, a);
}

/// Declared tail coefficient; 0 for families without one.
inline double tail_coefficient(const TailFamily& f) {
  if (const auto* rv = std::get_if<RegularlyVarying>(&f)) return rv->coefficient;
  if (const auto* se = std::get_if<StretchedExponential>(&f)) return se->coefficient;
  return 0.0;
}

inline std::string to_string(const TailFamily& f) {
  struct Visitor {
    std::string operator()(const RegularlyVarying& v) const {
      return "RegularlyVarying(index=" + format_number(v.index) +
             ", coefficient=" + format_number(v.coefficient) + ")";
    }
    std::string operator()(const StretchedExponential& v) const {
      return "StretchedExponential(shape=" + format_number(v.shape) +
             ", coefficient=" + format_number(v.coefficient) + ")";
    }
    std::string operator()(const LightTailed&) const { return "LightTailed"; }
    std::string operator()(const Bounded&) const { return "Bounded"; }
  };
  return std::visit(Visitor{}, f);
}

// ---------------------------------------------------------------------------
// Demand distributions
// ---------------------------------------------------------------------------

/// Finite distribution over demand sizes 0..support_max.
///
/// Immutable after construction. The cumulative table backs both tail queries
/// and inverse-CDF sampling.
class DemandDistribution {
public:
  /// Builds from an explicit pmf. Entries must be nonnegative and sum to 1.
  static DemandDistribution from_pmf(std::vector<double> pmf, TailFamily family) {
    return DemandDistribution{std::move(pmf), family};
  }

  std::int64_t support_max() const { return static_cast<std::int64_t>(pmf_.size()) - 1; }
  std::span<const double> pmf() const { return pmf_; }
  std::span<const double> cum() const { return cum_; }
  const TailFamily& tail_family() const { return family_; }

  double pmf(std::int64_t i) const {
    return (i < 0 || i > support_max()) ? 0.0 : pmf_[static_cast<std::size_t>(i)];
  }

  /// P[B > x].
  double tail(std::int64_t x) const {
    if (x < 0) return 1.0;
    if (x >= support_max()) return 0.0;
    return 1.0 - cum_[static_cast<std::size_t>(x)];
  }

  double mean() const { return mean_; }

  bool is_point_mass() const { return point_mass_; }

  /// Inverse-CDF draw: the smallest i with cum[i] > u.
  template <class Stream>
  std::int64_t sample(Stream& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) return support_max();
    return static_cast<std::int64_t>(it - cum_.begin());
  }

private:
  DemandDistribution(std::vector<double> pmf, TailFamily family)
      : pmf_{std::move(pmf)}, family_{family} {
    if (pmf_.empty()) throw DistributionError("demand pmf must be nonempty");
    double sum = 0.0;
    double comp = 0.0;
    cum_.resize(pmf_.size());
    int positive = 0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) {
      const double p = pmf_[i];
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw DistributionError("demand pmf entry " + std::to_string(i) + " is negative or not finite");
      }
      if (p > 0.0) ++positive;
      // Neumaier summation keeps the running cumulative accurate for wide supports.
      const double t = sum + p;
      comp += (std::abs(sum) >= p) ? (sum - t) + p : (p - t) + sum;
      sum = t;
      cum_[i] = std::min(1.0, sum + comp);
    }
    if (std::abs(sum + comp - 1.0) > kMassTolerance) {
      throw DistributionError("demand pmf sums to " + format_number(sum + comp) + ", not 1");
    }
    for (std::size_t i = 1; i < cum_.size(); ++i) cum_[i] = std::max(cum_[i], cum_[i - 1]);
    cum_.back() = 1.0;
    point_mass_ = positive == 1;

    double m = 0.0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) m += static_cast<double>(i) * pmf_[i];
    mean_ = m;
  }

  std::vector<double> pmf_;
  std::vector<double> cum_;
  TailFamily family_;
  double mean_ = 0.0;
  bool point_mass_ = false;
};

namespace detail {

/// Puts 1 - sum(pmf[0..cutoff-1]) at pmf[cutoff]; rejects a negative remainder.
inline void absorb_remainder(std::vector<double>& pmf, std::size_t cutoff) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < cutoff; ++i) {
    const double t = sum + pmf[i];
    comp += (std::abs(sum) >= pmf[i]) ? (sum - t) + pmf[i] : (pmf[i] - t) + sum;
    sum = t;
  }
  double remainder = 1.0 - (sum + comp);
  if (remainder < -kMassTolerance) {
    throw DistributionError("parameters leave negative remainder mass " + format_number(remainder) +
                            " at the cutoff");
  }
  pmf[cutoff] += std::max(0.0, remainder);
}

}  // namespace detail

/// pmf[i] = coef * i^-exponent for 1 <= i < cutoff; the remainder sits at cutoff.
inline DemandDistribution build_truncated_power_law(double coef, double exponent, std::int64_t cutoff) {
  if (!(coef > 0.0)) throw DistributionError("truncated_power_law: coef must be positive");
  if (!(exponent > 1.0)) throw DistributionError("truncated_power_law: exponent must exceed 1");
  if (cutoff < 1) throw DistributionError("truncated_power_law: cutoff must be positive");
  const auto n = static_cast<std::size_t>(cutoff);
  std::vector<double> pmf(n + 1, 0.0);
  for (std::size_t i = 1; i < n; ++i) pmf[i] = coef * std::pow(static_cast<double>(i), -exponent);
  detail::absorb_remainder(pmf, n);
  // sum_{i>x} coef*i^-a ~ coef/(a-1) * x^-(a-1)
  return DemandDistribution::from_pmf(std::move(pmf),
                                      make_regularly_varying(exponent - 1.0, coef / (exponent - 1.0)));
}

/// Atom of atom_mass at atom_value plus coef * exp(-sqrt(i)) for 2 <= i < cutoff;
/// the remainder sits at cutoff.
inline DemandDistribution build_atom_plus_stretched_exp(double atom_mass, std::int64_t atom_value, double coef,
                                                        std::int64_t cutoff) {
  if (!(atom_mass >= 0.0 && atom_mass <= 1.0)) {
    throw DistributionError("atom_plus_stretched_exp: atom_mass must be a probability");
  }
  if (atom_value < 1) throw DistributionError("atom_plus_stretched_exp: atom_value must be positive");
  if (!(coef >= 0.0)) throw DistributionError("atom_plus_stretched_exp: coef must be nonnegative");
  if (cutoff < 1 || atom_value > cutoff) {
    throw DistributionError("atom_plus_stretched_exp: cutoff must be positive and at least atom_value");
  }
  const auto n = static_cast<std::size_t>(cutoff);
  std::vector<double> pmf(n + 1, 0.0);
  pmf[static_cast<std::size_t>(atom_value)] = atom_mass;
  for (std::size_t i = 2; i < n; ++i) pmf[i] += coef * std::exp(-std::sqrt(static_cast<double>(i)));
  detail::absorb_remainder(pmf, n);
  // Without the stretched-exponential part the law is a finite atom.
  const TailFamily family = coef > 0.0 ? make_stretched_exponential(0.5, coef) : TailFamily{Bounded{}};
  return DemandDistribution::from_pmf(std::move(pmf), family);
}

/// pmf[i] = ratio^(i-1) * (1 - ratio) for 1 <= i < cutoff; the remainder sits at cutoff.
inline DemandDistribution build_truncated_geometric(double ratio, std::int64_t cutoff) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DistributionError("truncated_geometric: ratio must lie in (0,1)");
  if (cutoff < 2) throw DistributionError("truncated_geometric: cutoff must be at least 2");
  const auto n = static_cast<std::size_t>(cutoff);
  std::vector<double> pmf(n + 1, 0.0);
  double term = 1.0 - ratio;
  for (std::size_t i = 1; i < n; ++i) {
    pmf[i] = term;
    term *= ratio;
  }
  detail::absorb_remainder(pmf, n);
  return DemandDistribution::from_pmf(std::move(pmf), LightTailed{});
}

inline DemandDistribution build_deterministic_demand(std::int64_t value) {
  if (value < 0) throw DistributionError("deterministic demand must be nonnegative");
  std::vector<double> pmf(static_cast<std::size_t>(value) + 1, 0.0);
  pmf.back() = 1.0;
  return DemandDistribution::from_pmf(std::move(pmf), Bounded{});
}

inline double tail(const DemandDistribution& dist, std::int64_t x) { return dist.tail(x); }
inline double mean(const DemandDistribution& dist) { return dist.mean(); }

template <class Stream>
std::int64_t sample_demand(const DemandDistribution& dist, Stream& rng) {
  return dist.sample(rng);
}

// ---------------------------------------------------------------------------
// Holding times (also used for reservation delays and renewal interarrivals)
// ---------------------------------------------------------------------------

struct Exponential {
  double mean;
  friend bool operator==(const Exponential&, const Exponential&) = default;
};

struct Deterministic {
  double value;
  friend bool operator==(const Deterministic&, const Deterministic&) = default;
};

/// Uniform on [lo, hi).
struct UniformContinuous {
  double lo;
  double hi;
  friend bool operator==(const UniformContinuous&, const UniformContinuous&) = default;
};

using HoldingDistribution = std::variant<Exponential, Deterministic, UniformContinuous>;

inline HoldingDistribution make_exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw DistributionError("exponential mean must be positive");
  return Exponential{mean};
}

inline HoldingDistribution make_deterministic(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DistributionError("deterministic value must be nonnegative");
  }
  return Deterministic{value};
}

inline HoldingDistribution make_uniform(double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw DistributionError("uniform requires 0 <= lo < hi");
  }
  return UniformContinuous{lo, hi};
}

inline double mean_holding(const HoldingDistribution& h) {
  struct Visitor {
    double operator()(const Exponential& e) const { return e.mean; }
    double operator()(const Deterministic& d) const { return d.value; }
    double operator()(const UniformContinuous& u) const { return 0.5 * (u.lo + u.hi); }
  };
  return std::visit(Visitor{}, h);
}

template <class Stream>
double sample_holding(const HoldingDistribution& h, Stream& rng) {
  if (const auto* e = std::get_if<Exponential>(&h)) return -e->mean * std::log1p(-rng.uniform());
  if (const auto* d = std::get_if<Deterministic>(&h)) return d->value;
  const auto& u = std::get<UniformContinuous>(h);
  return u.lo + (u.hi - u.lo) * rng.uniform();
}

inline std::string to_string(const HoldingDistribution& h) {
  struct Visitor {
    std::string operator()(const Exponential& e) const { return "Exponential(mean=" + format_number(e.mean) + ")"; }
    std::string operator()(const Deterministic& d) const {
      return "Deterministic(" + format_number(d.value) + ")";
    }
    std::string operator()(const UniformContinuous& u) const {
      return "Uniform(" + format_number(u.lo) + ", " + format_number(u.hi) + ")";
    }
  };
  return std::visit(Visitor{}, h);
}

}  // namespace lossnet
