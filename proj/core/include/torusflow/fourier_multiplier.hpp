#pragma once

#include <array>

#include "torusflow/spectral_field.hpp"

namespace torusflow {

/// Per-mode 2x2 projection matrix I - k k^T / |k|^2 (identity at k = 0).
/// Removes the gradient part of a velocity field; what is left is
/// divergence-free.
std::array<double, 4> leray_matrix(int k1, int k2);

/// Orthogonal projection onto divergence-free velocity fields, applied
/// mode by mode. The k = 0 mode passes through unchanged.
SpectralField leray_project(const SpectralField& u);

/// Scalar multiplier of the Laplacian, -|k|^2.
double laplacian_symbol(int k1, int k2);

/// Scalar multiplier of the smoothing operator (I - delta * Laplacian)^{-1},
/// 1 / (1 + delta |k|^2), always in (0, 1].
double regularizer_symbol(int k1, int k2, double delta);

/// Coefficientwise smoothing f_k -> f_k / (1 + delta |k|^2); contracts
/// every H^s norm and lands in H^{s+2}.
SpectralField regularize(const SpectralField& f, double delta);

/// Spectral partial derivative along the given axis (0 or 1).
SpectralField partial_derivative(const SpectralField& f, int axis);

}  // namespace torusflow
