#pragma once

#include <cstdint>
#include <random>

namespace fpcocoa {

/// Seeded random stream. Streams are passed by value or reference but never
/// shared between workers; parallel code derives one child per work item.
class SeedStream {
 public:
  using Engine = std::mt19937_64;

  explicit SeedStream(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Child stream for work item `index`. Depends only on (seed, index), so
  /// results do not depend on which worker runs the item or in what order.
  SeedStream child(std::uint64_t index) const;

  /// Child stream keyed by a label, for named sub-streams ("ground-truth", ...).
  SeedStream child(const char* label) const;

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  bool coin() { return (engine_() >> 63) != 0; }
  std::uint64_t next() { return engine_(); }
  Engine& engine() { return engine_; }

 private:
  static std::uint64_t mix(std::uint64_t x);

  std::uint64_t seed_;
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fpcocoa
