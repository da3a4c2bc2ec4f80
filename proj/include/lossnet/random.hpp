#pragma once

#include <cstdint>
#include <random>

namespace lossnet {

/// SplitMix64 finalizer. Used to derive independent seeds from (seed, index) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stochastic inputs of one replication. Each gets its own substream so that
/// adding or removing one source (e.g. reservation delays) leaves the others intact.
enum class StreamId : std::uint64_t {
  Arrivals = 1,
  ClassLabels = 2,
  Demands = 3,
  Holding = 4,
  Delays = 5,
};

/// Single-owner 64-bit random stream with an explicit seed.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform variates are built from the top 53 bits directly, so a
/// given seed yields the same doubles on every platform.
class RandomStream {
public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : engine_{splitmix64(seed)} {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Seed of an independent child stream. Pure function of (parent seed, index).
  static std::uint64_t split(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  }

  static RandomStream for_stream(std::uint64_t replication_seed, StreamId id) {
    return RandomStream{split(replication_seed, static_cast<std::uint64_t>(id))};
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace lossnet
