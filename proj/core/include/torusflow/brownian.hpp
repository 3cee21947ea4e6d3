#pragma once

#include <cstdint>

#include "torusflow/philox.hpp"

namespace torusflow {

/// Addressable Brownian increment source for one sample path.
///
/// Draws are keyed by (path, step, element); equal keys give bit-identical
/// values independent of evaluation order, so concurrent paths and
/// re-runs reproduce exactly.
struct BrownianDriver {
  BrownianDriver(std::uint64_t seed, double dt, std::uint64_t path = 0);

  /// Standard normal for the addressed draw.
  double standard_gaussian(std::uint64_t step, std::uint32_t element) const;

  /// Brownian increment with variance dt.
  double increment(std::uint64_t step, std::uint32_t element) const;

  CounterRng rng;
  double dt;
  std::uint64_t path;
};

}  // namespace torusflow
