#pragma once

#include <cstdint>
#include <vector>

#include "torusflow/brownian.hpp"
#include "torusflow/spectral_field.hpp"

namespace torusflow {

/// One excited wavenumber; its amplitude is the variance per unit time
/// carried by each of the two attached basis fields (cosine and sine).
struct NoiseMode {
  int k1 = 0;
  int k2 = 0;
  double amplitude = 0.0;
};

/// Finite-rank divergence-free Wiener spectrum on the torus.
///
/// Every wavenumber k contributes the two zero-mean, divergence-free,
/// L2-orthonormal fields sqrt(2) cos(k.x) kperp/|k| and
/// sqrt(2) sin(k.x) kperp/|k|, each scaled by sqrt(amplitude) in the
/// driving process.
class NoiseModel {
 public:
  NoiseModel() = default;
  NoiseModel(std::vector<NoiseMode> modes, double sobolev_index);

  /// All wavenumbers with 0 < |k|_inf <= k_max (one representative per
  /// +-k pair) with amplitudes q_k = amplitude * |k|^{-2 alpha}.
  static NoiseModel power_law(int k_max, double alpha, double sobolev_index,
                              double amplitude = 1.0);

  const std::vector<NoiseMode>& modes() const { return modes_; }
  double sobolev_index() const { return sobolev_index_; }

  int basis_size() const { return 2 * static_cast<int>(modes_.size()); }
  int max_wavenumber() const;

  /// Basis element j as a spectral field at the given truncation.
  /// Even j is the cosine field of modes()[j/2], odd j the sine field.
  SpectralField basis_field(int j, int resolution) const;

  double amplitude(int j) const { return modes_[static_cast<std::size_t>(j) / 2].amplitude; }

  /// Energy injection rate sum_j q_j (both basis elements per mode).
  double trace_q() const;

  /// Weighted trace sum_j (1 + |k_j|^2)^r q_j with r the stored Sobolev
  /// index of the noise.
  double hr_trace() const;
  double hr_trace(double r) const;

 private:
  std::vector<NoiseMode> modes_;
  double sobolev_index_ = 0.0;
};

/// Increment dW = sum_j sqrt(q_j) dB_j e_j as a divergence-free, zero-mean
/// spectral field; dB_j are the driver's variance-dt draws at step_index.
SpectralField sample_increment(const BrownianDriver& driver, const NoiseModel& model,
                               int resolution, std::uint64_t step_index);

/// Trace of a bilinear map over the driving noise, amplitudes folded in:
/// sum_j q_j * bilinear(e_j, e_j). `zero` seeds the accumulation so any
/// additive result type works.
template <typename T, typename Bilinear>
T trace_bilinear(const NoiseModel& model, int resolution, Bilinear&& bilinear, T zero) {
  T acc = zero;
  for (int j = 0; j < model.basis_size(); ++j) {
    const SpectralField e = model.basis_field(j, resolution);
    acc = acc + model.amplitude(j) * bilinear(e, e);
  }
  return acc;
}

template <typename Bilinear>
double trace_bilinear(const NoiseModel& model, int resolution, Bilinear&& bilinear) {
  return trace_bilinear<double>(model, resolution, std::forward<Bilinear>(bilinear), 0.0);
}

}  // namespace torusflow
