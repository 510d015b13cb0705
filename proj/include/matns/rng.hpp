#pragma once

#include <cstdint>
#include <random>

namespace matns {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Child seed for stream `index` under `master`:
/// splitmix64(master + 0x9E3779B97F4A7C15 * (index + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seeded stream with platform-independent uniform and normal variates
/// (53-bit uniforms from mt19937_64, Box-Muller normals).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  std::uint64_t next_u64() noexcept { return engine_(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  Rng child(std::uint64_t index) const noexcept { return Rng(derive_seed(seed_, index)); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace matns
