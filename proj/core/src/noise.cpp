#include "torusflow/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace torusflow {

namespace {

constexpr double kHalfSqrt2 = 0.70710678118654752440;

}  // namespace

NoiseModel::NoiseModel(std::vector<NoiseMode> modes, double sobolev_index)
    : modes_(std::move(modes)), sobolev_index_(sobolev_index) {
  for (const auto& m : modes_) {
    if (m.k1 == 0 && m.k2 == 0)
      throw std::invalid_argument("NoiseModel: the mean mode cannot be excited");
    if (m.amplitude < 0.0) throw std::invalid_argument("NoiseModel: negative amplitude");
  }
}

NoiseModel NoiseModel::power_law(int k_max, double alpha, double sobolev_index,
                                 double amplitude) {
  if (k_max < 1) throw std::invalid_argument("NoiseModel: k_max must be >= 1");
  std::vector<NoiseMode> modes;
  for (int k1 = -k_max; k1 <= k_max; ++k1)
    for (int k2 = -k_max; k2 <= k_max; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      // One representative per +-k pair.
      if (k1 < 0 || (k1 == 0 && k2 < 0)) continue;
      const double kk = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
      modes.push_back({k1, k2, amplitude * std::pow(kk, -alpha)});
    }
  return NoiseModel(std::move(modes), sobolev_index);
}

int NoiseModel::max_wavenumber() const {
  int m = 0;
  for (const auto& mode : modes_) {
    m = std::max({m, std::abs(mode.k1), std::abs(mode.k2)});
  }
  return m;
}

SpectralField NoiseModel::basis_field(int j, int resolution) const {
  if (j < 0 || j >= basis_size()) throw std::out_of_range("NoiseModel: basis index");
  const NoiseMode& m = modes_[static_cast<std::size_t>(j) / 2];
  if (std::abs(m.k1) > resolution || std::abs(m.k2) > resolution)
    throw std::invalid_argument("NoiseModel: mode outside the field truncation");

  SpectralField e(resolution, 2);
  const double norm = std::sqrt(static_cast<double>(m.k1) * m.k1 + static_cast<double>(m.k2) * m.k2);
  const double p1 = -m.k2 / norm;
  const double p2 = m.k1 / norm;
  // cos field: coefficient (sqrt2/2) v at +-k; sin field: -i (sqrt2/2) v at +k.
  const std::complex<double> w = (j % 2 == 0) ? std::complex<double>(kHalfSqrt2, 0.0)
                                              : std::complex<double>(0.0, -kHalfSqrt2);
  e.set_mode_pair(m.k1, m.k2, 0, w * p1);
  e.set_mode_pair(m.k1, m.k2, 1, w * p2);
  e.set_divergence_free_flag(true);
  return e;
}

double NoiseModel::trace_q() const {
  double acc = 0.0;
  for (const auto& m : modes_) acc += 2.0 * m.amplitude;
  return acc;
}

double NoiseModel::hr_trace() const { return hr_trace(sobolev_index_); }

double NoiseModel::hr_trace(double r) const {
  double acc = 0.0;
  for (const auto& m : modes_) {
    const double kk = static_cast<double>(m.k1) * m.k1 + static_cast<double>(m.k2) * m.k2;
    acc += 2.0 * std::pow(1.0 + kk, r) * m.amplitude;
  }
  return acc;
}

SpectralField sample_increment(const BrownianDriver& driver, const NoiseModel& model,
                               int resolution, std::uint64_t step_index) {
  SpectralField dw(resolution, 2);
  for (std::size_t i = 0; i < model.modes().size(); ++i) {
    const NoiseMode& m = model.modes()[i];
    if (std::abs(m.k1) > resolution || std::abs(m.k2) > resolution)
      throw std::invalid_argument("sample_increment: noise mode outside truncation");
    const double scale = std::sqrt(m.amplitude * driver.dt);
    const double g_cos = driver.standard_gaussian(step_index, static_cast<std::uint32_t>(2 * i));
    const double g_sin = driver.standard_gaussian(step_index, static_cast<std::uint32_t>(2 * i + 1));

    const double norm =
        std::sqrt(static_cast<double>(m.k1) * m.k1 + static_cast<double>(m.k2) * m.k2);
    const double p1 = -m.k2 / norm;
    const double p2 = m.k1 / norm;
    // cos and sin contributions at +k collapse into one complex weight.
    const std::complex<double> w =
        scale * kHalfSqrt2 * std::complex<double>(g_cos, -g_sin);
    dw.at(m.k1, m.k2, 0) += w * p1;
    dw.at(m.k1, m.k2, 1) += w * p2;
    dw.at(-m.k1, -m.k2, 0) += std::conj(w * p1);
    dw.at(-m.k1, -m.k2, 1) += std::conj(w * p2);
  }
  dw.set_divergence_free_flag(true);
  return dw;
}

}  // namespace torusflow
