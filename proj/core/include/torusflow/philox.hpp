#pragma once

#include <array>
#include <cstdint>

namespace torusflow {

/// Philox4x32-10 counter-based generator.
///
/// Each 128-bit counter / 64-bit key pair maps to four independent 32-bit
/// words, so draws can be addressed directly by (path, step, element)
/// without any sequential state. Identical addresses always produce
/// identical values, regardless of evaluation order.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                            const std::array<std::uint32_t, 2>& key);
};

/// Stateless Gaussian stream addressed by (path, step, element).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Standard normal draw for the given address (Box-Muller on one
  /// Philox block; the full 128-bit output feeds a single draw).
  double gaussian(std::uint64_t path, std::uint64_t step, std::uint32_t element) const;

  /// Uniform draw in [0, 1) for the given address.
  double uniform(std::uint64_t path, std::uint64_t step, std::uint32_t element) const;

 private:
  std::array<std::uint32_t, 4> raw(std::uint64_t path, std::uint64_t step,
                                   std::uint32_t element) const;

  std::uint64_t seed_;
};

}  // namespace torusflow
