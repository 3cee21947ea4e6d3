#include "torusflow/fourier_multiplier.hpp"

#include <complex>
#include <stdexcept>

namespace torusflow {

std::array<double, 4> leray_matrix(int k1, int k2) {
  if (k1 == 0 && k2 == 0) return {1.0, 0.0, 0.0, 1.0};
  const double a = static_cast<double>(k1);
  const double b = static_cast<double>(k2);
  const double kk = a * a + b * b;
  return {1.0 - a * a / kk, -a * b / kk, -a * b / kk, 1.0 - b * b / kk};
}

SpectralField leray_project(const SpectralField& u) {
  if (u.components() != 2) throw std::invalid_argument("leray_project: velocity field required");
  SpectralField out = u;
  const int n = u.resolution();
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      const auto p = leray_matrix(k1, k2);
      const std::complex<double> a = u.at(k1, k2, 0);
      const std::complex<double> b = u.at(k1, k2, 1);
      out.at(k1, k2, 0) = p[0] * a + p[1] * b;
      out.at(k1, k2, 1) = p[2] * a + p[3] * b;
    }
  out.set_divergence_free_flag(true);
  return out;
}

double laplacian_symbol(int k1, int k2) {
  return -(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
}

double regularizer_symbol(int k1, int k2, double delta) {
  return 1.0 / (1.0 - delta * laplacian_symbol(k1, k2));
}

SpectralField regularize(const SpectralField& f, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("regularize: delta must be > 0");
  SpectralField out = f;
  const int n = f.resolution();
  for (int c = 0; c < f.components(); ++c)
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = -n; k2 <= n; ++k2) out.at(k1, k2, c) *= regularizer_symbol(k1, k2, delta);
  return out;
}

SpectralField partial_derivative(const SpectralField& f, int axis) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("partial_derivative: axis must be 0 or 1");
  SpectralField out = f;
  const int n = f.resolution();
  for (int c = 0; c < f.components(); ++c)
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = -n; k2 <= n; ++k2) {
        const double k = axis == 0 ? k1 : k2;
        out.at(k1, k2, c) *= std::complex<double>(0.0, k);
      }
  out.set_divergence_free_flag(false);
  return out;
}

}  // namespace torusflow
