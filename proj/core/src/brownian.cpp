#include "torusflow/brownian.hpp"

#include <cmath>
#include <stdexcept>

namespace torusflow {

BrownianDriver::BrownianDriver(std::uint64_t seed, double dt_, std::uint64_t path_)
    : rng(seed), dt(dt_), path(path_) {
  if (!(dt > 0.0)) throw std::invalid_argument("BrownianDriver: dt must be > 0");
}

double BrownianDriver::standard_gaussian(std::uint64_t step, std::uint32_t element) const {
  return rng.gaussian(path, step, element);
}

double BrownianDriver::increment(std::uint64_t step, std::uint32_t element) const {
  return std::sqrt(dt) * standard_gaussian(step, element);
}

}  // namespace torusflow
