#include "torusflow/philox.hpp"

#include <cmath>

namespace torusflow {

namespace {

constexpr double kTwoPiLocal = 6.283185307179586476925286766559;

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(const std::array<std::uint32_t, 4>& counter,
                                               const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> c = counter;
  std::array<std::uint32_t, 2> k = key;
  for (int r = 0; r < 10; ++r) {
    round_once(c, k);
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::array<std::uint32_t, 4> CounterRng::raw(std::uint64_t path, std::uint64_t step,
                                             std::uint32_t element) const {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), element,
      static_cast<std::uint32_t>(path ^ (path >> 32))};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_) + static_cast<std::uint32_t>(path),
      static_cast<std::uint32_t>(seed_ >> 32) + static_cast<std::uint32_t>(path >> 32)};
  return Philox4x32::block(counter, key);
}

double CounterRng::uniform(std::uint64_t path, std::uint64_t step, std::uint32_t element) const {
  const auto w = raw(path, step, element);
  const std::uint64_t bits = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t path, std::uint64_t step, std::uint32_t element) const {
  const auto w = raw(path, step, element);
  const std::uint64_t b1 = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  const std::uint64_t b2 = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
  double u1 = static_cast<double>(b1 >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(b2 >> 11) * 0x1.0p-53;
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPiLocal * u2);
}

}  // namespace torusflow
