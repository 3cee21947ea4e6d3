#pragma once

#include <cstdint>
#include <string>

#include "torusflow/spectral_field.hpp"

namespace torusflow {

/// Named divergence-free initial conditions.
namespace presets {

/// The zero velocity field.
SpectralField zero(int resolution);

/// u = (sin x cos y, -cos x sin y); steady for the ideal flow.
SpectralField taylor_green(int resolution);

/// u = (cos y, 0); steady shear.
SpectralField shear(int resolution);

/// Taylor-Green plus a detuned second harmonic; genuinely unsteady, used
/// for order-of-accuracy measurements.
SpectralField two_mode(int resolution);

/// Uniform drift (c1, c2). Not zero-mean; only used by flow-map tests.
SpectralField constant_velocity(int resolution, double c1, double c2);

/// One divergence-free cosine pair per integer shell m = 1..resolution at
/// wavenumber (m, 1), amplitude m^{-tail_exponent}. The partial sums of
/// the H^s norm converge iff tail_exponent > s + 1/2, which makes the
/// truncation behaviour of high-order norms directly steerable.
SpectralField spectral_tail(int resolution, double tail_exponent, std::uint64_t seed = 7);

/// Random band-limited divergence-free field with |k|-decaying amplitudes,
/// reproducible from the seed.
SpectralField random_divergence_free(int resolution, int band_limit, double decay,
                                     std::uint64_t seed);

/// Looks up an initial condition: a named preset ("zero", "taylor-green",
/// "shear", "two-mode", "spectral-tail:<exponent>", "random:<band>:<decay>")
/// or a stored field ("snapshot:<path>"), resampled to the requested
/// truncation.
SpectralField by_name(const std::string& name, int resolution, std::uint64_t seed = 7);

}  // namespace presets

}  // namespace torusflow
