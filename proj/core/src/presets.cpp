#include "torusflow/presets.hpp"

#include <cmath>
#include <stdexcept>

#include "torusflow/philox.hpp"
#include "torusflow/snapshot.hpp"

namespace torusflow {
namespace presets {

SpectralField zero(int resolution) {
  SpectralField u(resolution, 2);
  u.set_divergence_free_flag(true);
  return u;
}

SpectralField taylor_green(int resolution) {
  if (resolution < 2) throw std::invalid_argument("taylor_green: resolution too small");
  SpectralField u(resolution, 2);
  // sin x cos y = -i/4 (e^{i(x+y)} + e^{i(x-y)}) + c.c.
  const std::complex<double> a(0.0, -0.25);
  u.set_mode_pair(1, 1, 0, a);
  u.set_mode_pair(1, -1, 0, a);
  // -cos x sin y = i/4 e^{i(x+y)} - i/4 e^{i(x-y)} + c.c.
  u.set_mode_pair(1, 1, 1, -a);
  u.set_mode_pair(1, -1, 1, a);
  u.set_divergence_free_flag(true);
  return u;
}

SpectralField shear(int resolution) {
  if (resolution < 1) throw std::invalid_argument("shear: resolution too small");
  SpectralField u(resolution, 2);
  u.set_mode_pair(0, 1, 0, std::complex<double>(0.5, 0.0));
  u.set_divergence_free_flag(true);
  return u;
}

SpectralField two_mode(int resolution) {
  if (resolution < 3) throw std::invalid_argument("two_mode: resolution too small");
  SpectralField u = taylor_green(resolution);
  // Second harmonic along a skew direction; breaks the steady balance.
  SpectralField v(resolution, 2);
  const double norm = std::sqrt(2.0 * 2.0 + 1.0);
  const std::complex<double> w(0.0, -0.15);
  v.set_mode_pair(2, 1, 0, w * (-1.0 / norm));
  v.set_mode_pair(2, 1, 1, w * (2.0 / norm));
  u += v;
  u.set_divergence_free_flag(true);
  return u;
}

SpectralField constant_velocity(int resolution, double c1, double c2) {
  SpectralField u(resolution, 2);
  u.at(0, 0, 0) = c1;
  u.at(0, 0, 1) = c2;
  u.set_divergence_free_flag(true);
  return u;
}

SpectralField spectral_tail(int resolution, double tail_exponent, std::uint64_t seed) {
  if (resolution < 2) throw std::invalid_argument("spectral_tail: resolution too small");
  SpectralField u(resolution, 2);
  const CounterRng rng(seed);
  for (int m = 1; m <= resolution; ++m) {
    const int k1 = m;
    const int k2 = 1;
    const double norm = std::sqrt(static_cast<double>(k1) * k1 + k2 * k2);
    const double p1 = -k2 / norm;
    const double p2 = k1 / norm;
    const double amp = std::pow(static_cast<double>(m), -tail_exponent);
    const double phase = kTwoPi * rng.uniform(0, static_cast<std::uint64_t>(m), 0);
    const std::complex<double> w = 0.5 * amp * std::complex<double>(std::cos(phase), std::sin(phase));
    u.set_mode_pair(k1, k2, 0, w * p1);
    u.set_mode_pair(k1, k2, 1, w * p2);
  }
  u.set_divergence_free_flag(true);
  return u;
}

SpectralField random_divergence_free(int resolution, int band_limit, double decay,
                                     std::uint64_t seed) {
  if (band_limit > resolution)
    throw std::invalid_argument("random_divergence_free: band limit beyond truncation");
  SpectralField u(resolution, 2);
  const CounterRng rng(seed);
  std::uint32_t element = 0;
  for (int k1 = 0; k1 <= band_limit; ++k1)
    for (int k2 = -band_limit; k2 <= band_limit; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const double kk = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
      const double amp = std::pow(kk, -0.5 * decay);
      const std::complex<double> g(rng.gaussian(0, 0, element), rng.gaussian(0, 1, element));
      ++element;
      const double norm = std::sqrt(kk);
      const std::complex<double> w = 0.5 * amp * g;
      u.set_mode_pair(k1, k2, 0, w * (-k2 / norm));
      u.set_mode_pair(k1, k2, 1, w * (k1 / norm));
    }
  u.set_divergence_free_flag(true);
  return u;
}

SpectralField by_name(const std::string& name, int resolution, std::uint64_t seed) {
  if (name.rfind("snapshot:", 0) == 0) {
    SpectralField u = read_snapshot(name.substr(9));
    if (u.components() != 2)
      throw std::invalid_argument("initial condition snapshot must be a velocity field");
    return u.resampled(resolution);
  }
  if (name == "zero") return zero(resolution);
  if (name == "taylor-green") return taylor_green(resolution);
  if (name == "shear") return shear(resolution);
  if (name == "two-mode") return two_mode(resolution);
  if (name.rfind("spectral-tail:", 0) == 0) {
    const double expn = std::stod(name.substr(14));
    return spectral_tail(resolution, expn, seed);
  }
  if (name.rfind("random:", 0) == 0) {
    const std::string rest = name.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("preset: expected random:<band>:<decay>");
    const int band = std::stoi(rest.substr(0, colon));
    const double decay = std::stod(rest.substr(colon + 1));
    return random_divergence_free(resolution, band, decay, seed);
  }
  throw std::invalid_argument("unknown initial-condition preset: " + name);
}

}  // namespace presets
}  // namespace torusflow
