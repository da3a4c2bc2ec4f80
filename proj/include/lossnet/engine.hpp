#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lossnet/distributions.hpp"
#include "lossnet/model.hpp"
#include "lossnet/random.hpp"
#include "lossnet/timeline.hpp"

namespace lossnet {

class SimulationFault : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when committed capacity leaves [0, C_i] in some pool.
class CapacityViolation : public SimulationFault {
public:
  using SimulationFault::SimulationFault;
};

struct SimConfig {
  std::uint64_t warmup_arrivals = 100'000;
  std::uint64_t measured_arrivals = 10'000'000;
  std::uint64_t seed = 1;
  std::uint32_t replications = 4;
  /// Check capacity safety after every admission and release.
  bool check_invariants = true;
};

struct ClassCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t blocked = 0;
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Post-warm-up counts of one replication.
struct Counters {
  std::uint64_t arrivals_total = 0;
  std::vector<ClassCounts> classes;
  /// Number of capacity-safety checks performed (all of them passed).
  std::uint64_t capacity_checks = 0;

  std::uint64_t blocked_total() const {
    std::uint64_t b = 0;
    for (const auto& c : classes) b += c.blocked;
    return b;
  }

  double blocked_fraction() const {
    return arrivals_total == 0 ? 0.0 : static_cast<double>(blocked_total()) / static_cast<double>(arrivals_total);
  }

  /// arrivals = accepted + blocked per class, and the class arrivals add up.
  bool conserved() const {
    std::uint64_t sum = 0;
    for (const auto& c : classes) {
      if (c.arrivals != c.accepted + c.blocked) return false;
      sum += c.arrivals;
    }
    return sum == arrivals_total;
  }

  friend bool operator==(const Counters&, const Counters&) = default;
};

struct BlockingEstimate {
  double p_hat = 0.0;
  std::vector<double> p_hat_class;
  double std_err = 0.0;
  std::uint32_t replication_count = 0;
  std::vector<Counters> replications;
};

enum class Admission { Accept, Block };

/// Accepts iff engaged_i + b_i <= C_i for every pool.
inline Admission admit_immediate(std::span<const std::int64_t> engaged, std::span<const std::int64_t> demands,
                                 std::span<const std::int64_t> capacities) {
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    if (engaged[i] + demands[i] > capacities[i]) return Admission::Block;
  }
  return Admission::Accept;
}

/// Accepts iff, in every pool, the committed level over [start, end) stays
/// within C_i - b_i. On acceptance commits b_i over [start, end).
inline Admission admit_reserved(ReservationTimeline& timeline, double start, double end,
                                std::span<const std::int64_t> demands, std::span<const std::int64_t> capacities) {
  const bool empty = !(start < end);
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    if (demands[i] == 0) continue;
    const std::int64_t peak = empty ? 0 : timeline.max_committed(i, start, end);
    if (peak + demands[i] > capacities[i]) return Admission::Block;
  }
  for (std::size_t i = 0; i < capacities.size(); ++i) timeline.commit(i, start, end, demands[i]);
  return Admission::Accept;
}

/// Observer that ignores every admission decision.
struct NoObserver {
  void operator()(std::uint64_t /*arrival*/, std::size_t /*cls*/, Admission /*decision*/) const {}
};

namespace detail {

struct Event {
  double time;
  std::uint8_t kind;  // 0 = release, 1 = arrival
  std::uint64_t seq;
  std::uint32_t slot;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

inline constexpr std::uint8_t kRelease = 0;
inline constexpr std::uint8_t kArrival = 1;

/// Fixed-width slots holding the demand vectors of requests in service.
class DemandSlab {
public:
  explicit DemandSlab(std::size_t width) : width_(width) {}

  std::uint32_t store(std::span<const std::int64_t> demands) {
    std::uint32_t slot;
    if (!free_.empty()) {
      slot = free_.back();
      free_.pop_back();
    } else {
      slot = static_cast<std::uint32_t>(data_.size() / width_);
      data_.resize(data_.size() + width_);
    }
    std::copy(demands.begin(), demands.end(), data_.begin() + static_cast<std::ptrdiff_t>(slot * width_));
    return slot;
  }

  std::span<const std::int64_t> get(std::uint32_t slot) const {
    return {data_.data() + slot * width_, width_};
  }

  void release(std::uint32_t slot) { free_.push_back(slot); }

private:
  std::size_t width_;
  std::vector<std::int64_t> data_;
  std::vector<std::uint32_t> free_;
};

inline std::vector<double> class_cdf(const NetworkModel& model) {
  std::vector<double> cdf;
  double s = 0.0;
  for (const auto& c : model.classes) {
    s += c.probability;
    cdf.push_back(s);
  }
  return cdf;
}

template <class Stream>
std::size_t sample_class(std::span<const double> cdf, Stream& rng) {
  if (cdf.size() == 1) return 0;
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace detail

/// Simulates warmup_arrivals + measured_arrivals arrivals starting from an
/// empty system and counts the measured ones.
///
/// Events are ordered by (time, kind, sequence) with releases ahead of
/// arrivals at equal times. Models with any reservation delay run on the
/// ReservationTimeline; others on per-pool engaged counters. The observer is
/// called for every arrival, warm-up included.
template <class Observer = NoObserver>
Counters run_replication(const NetworkModel& model, const SimConfig& cfg, std::uint64_t replication_index,
                         Observer&& observer = {}) {
  const std::size_t pools = model.pool_count();
  const std::uint64_t rep_seed = RandomStream::split(cfg.seed, replication_index);
  auto arrivals_rng = RandomStream::for_stream(rep_seed, StreamId::Arrivals);
  auto class_rng = RandomStream::for_stream(rep_seed, StreamId::ClassLabels);
  auto demand_rng = RandomStream::for_stream(rep_seed, StreamId::Demands);
  auto holding_rng = RandomStream::for_stream(rep_seed, StreamId::Holding);
  auto delay_rng = RandomStream::for_stream(rep_seed, StreamId::Delays);

  const auto cdf = detail::class_cdf(model);
  const std::span<const std::int64_t> caps{model.capacities};
  const bool reserved = model.has_reservations();

  Counters counters;
  counters.classes.resize(model.class_count());

  std::vector<std::int64_t> engaged(pools, 0);
  std::vector<std::int64_t> demands(pools, 0);
  ReservationTimeline timeline(reserved ? pools : 0);
  detail::DemandSlab slab(pools);
  std::priority_queue<detail::Event, std::vector<detail::Event>, detail::EventAfter> queue;
  std::uint64_t seq = 0;

  const std::uint64_t total = cfg.warmup_arrivals + cfg.measured_arrivals;
  if (total == 0) return counters;

  auto check_engaged = [&] {
    ++counters.capacity_checks;
    for (std::size_t i = 0; i < pools; ++i) {
      if (engaged[i] < 0 || engaged[i] > caps[i]) {
        throw CapacityViolation("engaged capacity " + std::to_string(engaged[i]) + " outside [0, " +
                                std::to_string(caps[i]) + "] in pool " + std::to_string(i));
      }
    }
  };

  queue.push({sample_interarrival(model.arrival, arrivals_rng), detail::kArrival, seq++, 0});
  double clock = 0.0;
  std::uint64_t n = 0;

  while (n < total) {
    const detail::Event ev = queue.top();
    queue.pop();
    if (ev.time < clock) {
      throw SimulationFault("event time decreased from " + format_number(clock) + " to " +
                            format_number(ev.time));
    }
    clock = ev.time;

    if (ev.kind == detail::kRelease) {
      const auto held = slab.get(ev.slot);
      for (std::size_t i = 0; i < pools; ++i) engaged[i] -= held[i];
      slab.release(ev.slot);
      if (cfg.check_invariants) check_engaged();
      continue;
    }

    const std::size_t cls = detail::sample_class(cdf, class_rng);
    const auto& rc = model.classes[cls];
    for (std::size_t i = 0; i < pools; ++i) demands[i] = rc.demands[i].sample(demand_rng);
    const double holding = sample_holding(rc.holding, holding_rng);

    Admission decision;
    if (reserved) {
      const double delay = rc.delay ? sample_holding(*rc.delay, delay_rng) : 0.0;
      timeline.advance(clock);
      const double start = clock + delay;
      decision = admit_reserved(timeline, start, start + holding, demands, caps);
      if (cfg.check_invariants) {
        ++counters.capacity_checks;
        if (!timeline.within_bounds(caps)) {
          throw CapacityViolation("reservation timeline leaves [0, C] after arrival " + std::to_string(n));
        }
      }
    } else {
      decision = admit_immediate(engaged, demands, caps);
      if (decision == Admission::Accept) {
        for (std::size_t i = 0; i < pools; ++i) engaged[i] += demands[i];
        if (cfg.check_invariants) check_engaged();
        queue.push({clock + holding, detail::kRelease, seq++, slab.store(demands)});
      }
    }

    observer(n, cls, decision);
    if (n >= cfg.warmup_arrivals) {
      auto& cc = counters.classes[cls];
      ++counters.arrivals_total;
      ++cc.arrivals;
      if (decision == Admission::Accept) {
        ++cc.accepted;
      } else {
        ++cc.blocked;
      }
    }
    ++n;
    if (n < total) queue.push({clock + sample_interarrival(model.arrival, arrivals_rng), detail::kArrival, seq++, 0});
  }
  return counters;
}

namespace detail {

/// Runs fn(0..count-1) on up to `threads` workers (0 = hardware concurrency).
/// The first exception thrown by any task is rethrown after all workers join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Aggregates per-replication counters: p_hat is the mean blocked fraction,
/// std_err the sample standard deviation over sqrt(replications).
inline BlockingEstimate aggregate(std::vector<Counters> reps) {
  BlockingEstimate est;
  est.replication_count = static_cast<std::uint32_t>(reps.size());
  if (reps.empty()) return est;
  const std::size_t classes = reps.front().classes.size();
  const double r = static_cast<double>(reps.size());

  double sum = 0.0;
  for (const auto& c : reps) sum += c.blocked_fraction();
  est.p_hat = sum / r;
  if (reps.size() > 1) {
    double ss = 0.0;
    for (const auto& c : reps) {
      const double d = c.blocked_fraction() - est.p_hat;
      ss += d * d;
    }
    est.std_err = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
  }

  est.p_hat_class.assign(classes, 0.0);
  for (std::size_t l = 0; l < classes; ++l) {
    double s = 0.0;
    int used = 0;
    for (const auto& c : reps) {
      if (c.classes[l].arrivals == 0) continue;
      s += static_cast<double>(c.classes[l].blocked) / static_cast<double>(c.classes[l].arrivals);
      ++used;
    }
    est.p_hat_class[l] = used == 0 ? 0.0 : s / used;
  }
  est.replications = std::move(reps);
  return est;
}

/// Runs cfg.replications independent replications (concurrently when
/// threads allow) and aggregates them.
inline BlockingEstimate estimate(const NetworkModel& model, const SimConfig& cfg, unsigned threads = 0) {
  if (cfg.replications == 0) throw std::invalid_argument("replications must be at least 1");
  if (cfg.measured_arrivals == 0) throw std::invalid_argument("measured_arrivals must be at least 1");
  std::vector<Counters> reps(cfg.replications);
  detail::parallel_for(
      reps.size(), [&](std::size_t r) { reps[r] = run_replication(model, cfg, r); }, threads);
  return aggregate(std::move(reps));
}

}  // namespace lossnet
