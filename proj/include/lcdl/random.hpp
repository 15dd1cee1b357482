#pragma once

#include <cstdint>
#include <random>

namespace lcdl {

/// Seeded generator with platform-independent draws. The engine is
/// std::mt19937_64; the integer and normal mappings are fixed here because the
/// standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform real in (0, 1).
  double uniform_open();

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lcdl
