#include "torusflow/pseudospectral.hpp"

#include <fftw3.h>

#include <complex>
#include <map>
#include <stdexcept>

#include "torusflow/fourier_multiplier.hpp"

namespace torusflow {

struct FftGrid::Impl {
  double* real = nullptr;
  fftw_complex* half = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

FftGrid::FftGrid(int modes) : modes_(modes), size_(4 * modes), impl_(new Impl) {
  if (modes < 1) throw std::invalid_argument("FftGrid: modes must be >= 1");
  const int g = size_;
  impl_->real = fftw_alloc_real(static_cast<std::size_t>(g) * g);
  impl_->half = fftw_alloc_complex(static_cast<std::size_t>(g) * (g / 2 + 1));
  impl_->forward = fftw_plan_dft_r2c_2d(g, g, impl_->real, impl_->half, FFTW_ESTIMATE);
  impl_->backward = fftw_plan_dft_c2r_2d(g, g, impl_->half, impl_->real, FFTW_ESTIMATE);
}

FftGrid::~FftGrid() {
  fftw_destroy_plan(impl_->forward);
  fftw_destroy_plan(impl_->backward);
  fftw_free(impl_->real);
  fftw_free(impl_->half);
}

void FftGrid::to_physical(const SpectralField& f, int component, std::vector<double>& out) const {
  const int g = size_;
  const int n = f.resolution();
  if (n > modes_) throw std::invalid_argument("FftGrid: field finer than working set");
  const std::size_t half_cols = static_cast<std::size_t>(g / 2 + 1);
  for (std::size_t i = 0; i < static_cast<std::size_t>(g) * half_cols; ++i)
    impl_->half[i][0] = impl_->half[i][1] = 0.0;

  // Column k2 in [0, N]; negative k2 is implied by Hermitian symmetry.
  // The k2 = 0 column carries both signs of k1 and must itself be
  // Hermitian in k1, which holds for a real field.
  for (int k1 = -n; k1 <= n; ++k1) {
    const int row = k1 >= 0 ? k1 : g + k1;
    for (int k2 = 0; k2 <= n; ++k2) {
      const std::complex<double> v = f.at(k1, k2, component);
      impl_->half[row * half_cols + k2][0] = v.real();
      impl_->half[row * half_cols + k2][1] = v.imag();
    }
  }
  fftw_execute(impl_->backward);
  out.assign(impl_->real, impl_->real + static_cast<std::size_t>(g) * g);
}

void FftGrid::to_spectral(const std::vector<double>& grid, SpectralField& out,
                          int component) const {
  const int g = size_;
  const int n = out.resolution();
  if (n > modes_) throw std::invalid_argument("FftGrid: field finer than working set");
  if (grid.size() != static_cast<std::size_t>(g) * g)
    throw std::invalid_argument("FftGrid: grid size mismatch");
  for (std::size_t i = 0; i < grid.size(); ++i) impl_->real[i] = grid[i];
  fftw_execute(impl_->forward);

  const std::size_t half_cols = static_cast<std::size_t>(g / 2 + 1);
  const double scale = 1.0 / (static_cast<double>(g) * g);
  for (int k1 = -n; k1 <= n; ++k1) {
    for (int k2 = -n; k2 <= n; ++k2) {
      std::complex<double> v;
      if (k2 >= 0) {
        const int row = k1 >= 0 ? k1 : g + k1;
        const auto& c = impl_->half[row * half_cols + k2];
        v = {c[0], c[1]};
      } else {
        const int row = -k1 >= 0 ? -k1 : g + (-k1);
        const auto& c = impl_->half[row * half_cols + (-k2)];
        v = {c[0], -c[1]};
      }
      out.at(k1, k2, component) = scale * v;
    }
  }
}

SpectralField convective_term(const SpectralField& u, const FftGrid& grid) {
  if (u.components() != 2) throw std::invalid_argument("convective_term: velocity field required");
  if (u.resolution() < 4) throw std::invalid_argument("convective_term: resolution too small (N < 4)");
  if (u.resolution() > grid.modes())
    throw std::invalid_argument("convective_term: working set too small");

  const SpectralField ux = partial_derivative(u, 0);
  const SpectralField uy = partial_derivative(u, 1);

  std::vector<double> p_u1, p_u2, p_u1x, p_u2x, p_u1y, p_u2y;
  grid.to_physical(u, 0, p_u1);
  grid.to_physical(u, 1, p_u2);
  grid.to_physical(ux, 0, p_u1x);
  grid.to_physical(ux, 1, p_u2x);
  grid.to_physical(uy, 0, p_u1y);
  grid.to_physical(uy, 1, p_u2y);

  std::vector<double> w1(p_u1.size()), w2(p_u1.size());
  for (std::size_t i = 0; i < p_u1.size(); ++i) {
    w1[i] = p_u1[i] * p_u1x[i] + p_u2[i] * p_u1y[i];
    w2[i] = p_u1[i] * p_u2x[i] + p_u2[i] * p_u2y[i];
  }

  SpectralField advection(u.resolution(), 2);
  grid.to_spectral(w1, advection, 0);
  grid.to_spectral(w2, advection, 1);

  SpectralField result = leray_project(advection);
  result.zero_mean_mode();
  return result;
}

SpectralField convective_term(const SpectralField& u) {
  static std::map<int, std::unique_ptr<FftGrid>> cache;
  auto it = cache.find(u.resolution());
  if (it == cache.end())
    it = cache.emplace(u.resolution(), std::make_unique<FftGrid>(u.resolution())).first;
  return convective_term(u, *it->second);
}

std::vector<double> sample_on_grid(const SpectralField& f, int component, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  std::vector<std::complex<double>> acc;
  // Direct evaluation; used by tests and small diagnostics only.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 p{kTwoPi * i / n, kTwoPi * j / n};
      out[static_cast<std::size_t>(i) * n + j] = evaluate_at(f, p)[component];
    }
  return out;
}

}  // namespace torusflow
