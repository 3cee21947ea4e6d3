#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "torusflow/torus.hpp"

namespace torusflow {

/// Sobolev regularity exponent s >= 0.
struct SobolevIndex {
  double value = 0.0;

  SobolevIndex() = default;
  explicit SobolevIndex(double s);
};

/// Truncated Fourier representation of a real periodic field on the flat
/// 2-torus [0, 2*pi)^2.
///
/// Modes k = (k1, k2) with |k1|, |k2| <= N are stored densely; the field in
/// physical space is f(x) = sum_k coeff(k) * exp(i k.x), i.e. coefficients
/// follow the (2*pi)^{-2} * integral normalization. Real-valued fields keep
/// the Hermitian symmetry coeff(-k) = conj(coeff(k)).
///
/// components == 1 is a scalar field, components == 2 a velocity field.
class SpectralField {
 public:
  using Complex = std::complex<double>;

  SpectralField() = default;
  SpectralField(int resolution, int components);

  static SpectralField zero_velocity(int resolution) { return {resolution, 2}; }
  static SpectralField zero_scalar(int resolution) { return {resolution, 1}; }

  int resolution() const { return resolution_; }
  int components() const { return components_; }
  int modes_per_axis() const { return 2 * resolution_ + 1; }
  std::size_t mode_count() const {
    return static_cast<std::size_t>(modes_per_axis()) * modes_per_axis();
  }

  bool divergence_free_flag() const { return divergence_free_; }
  void set_divergence_free_flag(bool f) { divergence_free_ = f; }

  const Complex& at(int k1, int k2, int component = 0) const {
    return coeffs_[index(k1, k2, component)];
  }
  Complex& at(int k1, int k2, int component = 0) { return coeffs_[index(k1, k2, component)]; }

  const std::vector<Complex>& raw() const { return coeffs_; }
  std::vector<Complex>& raw() { return coeffs_; }

  std::size_t index(int k1, int k2, int component) const;

  /// Sets coeff(k) and coeff(-k) = conj(v) in one call.
  void set_mode_pair(int k1, int k2, int component, Complex v);

  bool is_hermitian(double tol = 1e-12) const;
  void enforce_hermitian();

  /// Max relative divergence residual |k.u_k| / |u_k| over nonzero modes.
  double divergence_residual() const;

  void zero_mean_mode();
  bool has_zero_mean(double tol = 0.0) const;

  /// Copy into a (possibly different) resolution, truncating or
  /// zero-padding modes.
  SpectralField resampled(int new_resolution) const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double a, SpectralField f) { return f *= a; }

  /// a*x + y accumulated into *this.
  void axpy(double a, const SpectralField& x);

 private:
  int resolution_ = 0;
  int components_ = 1;
  bool divergence_free_ = false;
  std::vector<Complex> coeffs_;
};

/// ||f||_{H^s} = sqrt( sum_k (1 + |k|^2)^s sum_c |f_k,c|^2 ).
double sobolev_norm(const SpectralField& f, SobolevIndex s);

/// Coefficient inner product sum_k f_k . conj(g_k); equals the H^0 pairing
/// and, up to the fixed (2*pi)^2 area factor, the physical L^2 pairing.
double l2_inner_product(const SpectralField& f, const SpectralField& g);

inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, SobolevIndex(0.0)); }

/// Evaluates all components of f at an arbitrary torus point by the exact
/// truncated trigonometric sum. Asserts the imaginary residue is small and
/// returns the real part.
std::vector<double> evaluate_at(const SpectralField& f, const Vec2& point);

/// Velocity-field convenience wrapper around evaluate_at.
Vec2 evaluate_velocity(const SpectralField& u, const Vec2& point);

/// Batch evaluation of a velocity field at many points.
std::vector<Vec2> evaluate_velocity(const SpectralField& u, const std::vector<Vec2>& points);

/// Repeated off-grid evaluation of one velocity field.
///
/// The Hermitian half of the spectrum is unpacked once into flat real
/// arrays, and per point only cosine/sine tables plus real dot products
/// remain, which is what the particle integration spends its time on.
class VelocityEvaluator {
 public:
  explicit VelocityEvaluator(const SpectralField& u);

  Vec2 operator()(const Vec2& point) const;

 private:
  int c_tables(const Vec2& point) const;

  int n_;
  int row_len_;  ///< 2n+1 entries, k2 = -n..n
  // rows k1 = 1..n for both components, then the folded k1 = 0 row
  std::vector<double> row_re_[2], row_im_[2];
  std::vector<double> axis_re_[2], axis_im_[2];  ///< k2 = 0..n
  mutable std::vector<double> cx_, sx_, cy_, sy_;
};

}  // namespace torusflow
