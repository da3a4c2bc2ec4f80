#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace lossnet {

/// Committed capacity of each pool as a right-continuous step function of time.
///
/// Each pool keeps a base level plus an ordered map of signed deltas. A delta
/// at time t applies on [t, next change), so a release at t frees capacity for
/// a commitment starting at t. Entries at or before the current time can be
/// folded into the base level with advance().
class ReservationTimeline {
public:
  explicit ReservationTimeline(std::size_t pools) : pools_(pools) {}

  std::size_t pool_count() const { return pools_.size(); }

  /// Folds every delta with time <= now into the base level.
  void advance(double now) {
    for (auto& p : pools_) {
      auto it = p.deltas.begin();
      while (it != p.deltas.end() && it->first <= now) {
        p.base += it->second;
        it = p.deltas.erase(it);
      }
    }
  }

  /// Committed level of one pool at time t.
  std::int64_t committed_at(std::size_t pool, double t) const {
    const auto& p = pools_[pool];
    std::int64_t level = p.base;
    for (auto it = p.deltas.begin(); it != p.deltas.end() && it->first <= t; ++it) level += it->second;
    return level;
  }

  /// Maximum committed level over [start, end). Empty interval yields the level at start.
  std::int64_t max_committed(std::size_t pool, double start, double end) const {
    const auto& p = pools_[pool];
    std::int64_t level = p.base;
    auto it = p.deltas.begin();
    for (; it != p.deltas.end() && it->first <= start; ++it) level += it->second;
    std::int64_t peak = level;
    for (; it != p.deltas.end() && it->first < end; ++it) {
      level += it->second;
      peak = std::max(peak, level);
    }
    return peak;
  }

  /// Adds amount on [start, end).
  void commit(std::size_t pool, double start, double end, std::int64_t amount) {
    if (amount == 0 || !(start < end)) return;
    auto& d = pools_[pool].deltas;
    add_delta(d, start, amount);
    add_delta(d, end, -amount);
  }

  /// True when every prefix level of every pool lies in [0, capacities[i]].
  bool within_bounds(std::span<const std::int64_t> capacities) const {
    for (std::size_t i = 0; i < pools_.size(); ++i) {
      std::int64_t level = pools_[i].base;
      if (level < 0 || level > capacities[i]) return false;
      for (const auto& [t, delta] : pools_[i].deltas) {
        level += delta;
        if (level < 0 || level > capacities[i]) return false;
      }
    }
    return true;
  }

  /// Sum of all pending deltas in one pool (0 once every commitment is matched by its release).
  std::int64_t pending_balance(std::size_t pool) const {
    std::int64_t s = 0;
    for (const auto& [t, delta] : pools_[pool].deltas) s += delta;
    return s;
  }

  std::int64_t base_level(std::size_t pool) const { return pools_[pool].base; }

  std::size_t pending_events() const {
    std::size_t n = 0;
    for (const auto& p : pools_) n += p.deltas.size();
    return n;
  }

private:
  struct Pool {
    std::int64_t base = 0;
    std::map<double, std::int64_t> deltas;
  };

  static void add_delta(std::map<double, std::int64_t>& d, double t, std::int64_t amount) {
    auto [it, inserted] = d.try_emplace(t, amount);
    if (!inserted) {
      it->second += amount;
      if (it->second == 0) d.erase(it);
    }
  }

  std::vector<Pool> pools_;
};

}  // namespace lossnet
