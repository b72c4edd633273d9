#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fpr {

/// Streams drawn from one root seed.
enum class StreamRole : std::uint64_t { Path = 1, Uniform = 2, Bridge = 3, Simulation = 4 };

/// Counter-based generator: draw n of stream s is splitmix64(key(s) + n * golden),
/// so any draw can be recomputed from (root seed, role, index, counter).
class CounterRng {
 public:
  CounterRng(std::uint64_t root, StreamRole role, std::uint64_t index, std::uint64_t sub = 0)
      : key_(mix(mix(mix(root ^ 0x243f6a8885a308d3ULL) + static_cast<std::uint64_t>(role)) +
                 index) ^
             mix(sub + 0x13198a2e03707344ULL)) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the sine branch is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fpr
