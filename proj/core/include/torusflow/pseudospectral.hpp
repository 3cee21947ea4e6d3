#pragma once

#include <memory>
#include <vector>

#include "torusflow/spectral_field.hpp"

namespace torusflow {

/// FFTW working set for one truncation level N. Physical-space products are
/// formed on a 4N-point grid, so every retained mode |k1|,|k2| <= N of a
/// quadratic product is alias-free (2/3-rule padding).
class FftGrid {
 public:
  explicit FftGrid(int modes);
  ~FftGrid();

  FftGrid(const FftGrid&) = delete;
  FftGrid& operator=(const FftGrid&) = delete;

  int modes() const { return modes_; }
  int grid_size() const { return size_; }

  /// Inverse transform of one component onto the padded physical grid.
  void to_physical(const SpectralField& f, int component, std::vector<double>& out) const;

  /// Forward transform of a physical grid, truncated back to |k| <= N.
  void to_spectral(const std::vector<double>& grid, SpectralField& out, int component) const;

 private:
  struct Impl;
  int modes_;
  int size_;
  std::unique_ptr<Impl> impl_;
};

/// Pi[(u . grad) u] computed pseudospectrally with dealiased products.
/// The result is divergence-free with exactly zero mean. Expects a
/// divergence-free, zero-mean velocity field and N >= 4.
SpectralField convective_term(const SpectralField& u);

/// Same, reusing a caller-owned working set.
SpectralField convective_term(const SpectralField& u, const FftGrid& grid);

/// Physical-space samples of one component on the uniform n x n grid,
/// x_ij = (2*pi*i/n, 2*pi*j/n), row-major in i.
std::vector<double> sample_on_grid(const SpectralField& f, int component, int n);

}  // namespace torusflow
