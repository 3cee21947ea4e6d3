#include "torusflow/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace torusflow {

SobolevIndex::SobolevIndex(double s) : value(s) {
  if (!(s >= 0.0)) throw std::invalid_argument("SobolevIndex: s must be >= 0");
}

SpectralField::SpectralField(int resolution, int components)
    : resolution_(resolution), components_(components) {
  if (resolution < 0) throw std::invalid_argument("SpectralField: resolution must be >= 0");
  if (components != 1 && components != 2)
    throw std::invalid_argument("SpectralField: components must be 1 or 2");
  coeffs_.assign(static_cast<std::size_t>(components) * mode_count(), Complex(0.0, 0.0));
}

std::size_t SpectralField::index(int k1, int k2, int component) const {
  const int m = modes_per_axis();
  return (static_cast<std::size_t>(component) * m + (k1 + resolution_)) * m + (k2 + resolution_);
}

void SpectralField::set_mode_pair(int k1, int k2, int component, Complex v) {
  at(k1, k2, component) = v;
  at(-k1, -k2, component) = std::conj(v);
}

bool SpectralField::is_hermitian(double tol) const {
  const int n = resolution_;
  for (int c = 0; c < components_; ++c)
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = -n; k2 <= n; ++k2) {
        const Complex d = at(k1, k2, c) - std::conj(at(-k1, -k2, c));
        if (std::abs(d) > tol * (1.0 + std::abs(at(k1, k2, c)))) return false;
      }
  return true;
}

void SpectralField::enforce_hermitian() {
  const int n = resolution_;
  for (int c = 0; c < components_; ++c) {
    at(0, 0, c) = Complex(at(0, 0, c).real(), 0.0);
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = -n; k2 <= n; ++k2) {
        if (k1 < 0 || (k1 == 0 && k2 < 0)) continue;
        if (k1 == 0 && k2 == 0) continue;
        const Complex avg = 0.5 * (at(k1, k2, c) + std::conj(at(-k1, -k2, c)));
        at(k1, k2, c) = avg;
        at(-k1, -k2, c) = std::conj(avg);
      }
  }
}

double SpectralField::divergence_residual() const {
  if (components_ != 2) return 0.0;
  const int n = resolution_;
  double worst = 0.0;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const Complex du = static_cast<double>(k1) * at(k1, k2, 0) +
                         static_cast<double>(k2) * at(k1, k2, 1);
      const double mag = std::abs(at(k1, k2, 0)) + std::abs(at(k1, k2, 1));
      if (mag > 0.0) worst = std::max(worst, std::abs(du) / mag);
    }
  return worst;
}

void SpectralField::zero_mean_mode() {
  for (int c = 0; c < components_; ++c) at(0, 0, c) = Complex(0.0, 0.0);
}

bool SpectralField::has_zero_mean(double tol) const {
  for (int c = 0; c < components_; ++c)
    if (std::abs(at(0, 0, c)) > tol) return false;
  return true;
}

SpectralField SpectralField::resampled(int new_resolution) const {
  SpectralField out(new_resolution, components_);
  out.divergence_free_ = divergence_free_;
  const int n = std::min(resolution_, new_resolution);
  for (int c = 0; c < components_; ++c)
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = -n; k2 <= n; ++k2) out.at(k1, k2, c) = at(k1, k2, c);
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.resolution_ != resolution_ || o.components_ != components_)
    throw std::invalid_argument("SpectralField: shape mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.resolution_ != resolution_ || o.components_ != components_)
    throw std::invalid_argument("SpectralField: shape mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& v : coeffs_) v *= a;
  return *this;
}

void SpectralField::axpy(double a, const SpectralField& x) {
  if (x.resolution_ != resolution_ || x.components_ != components_)
    throw std::invalid_argument("SpectralField: shape mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x.coeffs_[i];
}

double sobolev_norm(const SpectralField& f, SobolevIndex s) {
  const int n = f.resolution();
  double acc = 0.0;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      const double w = std::pow(1.0 + static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2,
                                s.value);
      double m2 = 0.0;
      for (int c = 0; c < f.components(); ++c) m2 += std::norm(f.at(k1, k2, c));
      acc += w * m2;
    }
  return std::sqrt(acc);
}

double l2_inner_product(const SpectralField& f, const SpectralField& g) {
  if (f.resolution() != g.resolution() || f.components() != g.components())
    throw std::invalid_argument("l2_inner_product: shape mismatch");
  double acc = 0.0;
  const auto& a = f.raw();
  const auto& b = g.raw();
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] * std::conj(b[i])).real();
  return acc;
}

namespace {

// e^{i k x} for k = -n..n via a multiplicative recurrence from e^{ix}.
void phase_table(double x, int n, std::vector<std::complex<double>>& out) {
  const int m = 2 * n + 1;
  out.resize(m);
  const std::complex<double> step(std::cos(x), std::sin(x));
  std::complex<double> cur(1.0, 0.0);
  out[n] = cur;
  for (int k = 1; k <= n; ++k) {
    cur *= step;
    out[n + k] = cur;
    out[n - k] = std::conj(cur);
  }
}

}  // namespace

std::vector<double> evaluate_at(const SpectralField& f, const Vec2& point) {
  const int n = f.resolution();
  const int m = 2 * n + 1;
  std::vector<std::complex<double>> e1, e2;
  phase_table(point.x, n, e1);
  phase_table(point.y, n, e2);

  std::vector<double> values(f.components(), 0.0);
  for (int c = 0; c < f.components(); ++c) {
    std::complex<double> acc(0.0, 0.0);
    const std::complex<double>* row = f.raw().data() + f.index(-n, -n, c);
    for (int i = 0; i < m; ++i) {
      std::complex<double> inner(0.0, 0.0);
      const std::complex<double>* r = row + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) inner += r[j] * e2[j];
      acc += e1[i] * inner;
    }
    const double scale = std::abs(acc);
    if (scale > 1e-6 && std::abs(acc.imag()) > 1e-10 * scale)
      throw std::runtime_error("evaluate_at: imaginary residue exceeds tolerance");
    values[c] = acc.real();
  }
  return values;
}

Vec2 evaluate_velocity(const SpectralField& u, const Vec2& point) {
  const auto v = evaluate_at(u, point);
  return {v[0], u.components() > 1 ? v[1] : 0.0};
}

std::vector<Vec2> evaluate_velocity(const SpectralField& u, const std::vector<Vec2>& points) {
  const VelocityEvaluator eval(u);
  std::vector<Vec2> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = eval(points[i]);
  return out;
}

VelocityEvaluator::VelocityEvaluator(const SpectralField& u)
    : n_(u.resolution()), row_len_(2 * u.resolution() + 1) {
  if (u.components() != 2)
    throw std::invalid_argument("VelocityEvaluator: velocity field required");
  const int n = n_;
  for (int c = 0; c < 2; ++c) {
    row_re_[c].resize(static_cast<std::size_t>(n) * row_len_);
    row_im_[c].resize(static_cast<std::size_t>(n) * row_len_);
    for (int k1 = 1; k1 <= n; ++k1)
      for (int k2 = -n; k2 <= n; ++k2) {
        const std::complex<double> v = u.at(k1, k2, c);
        const std::size_t idx = static_cast<std::size_t>(k1 - 1) * row_len_ + (k2 + n);
        row_re_[c][idx] = v.real();
        row_im_[c][idx] = v.imag();
      }
    axis_re_[c].resize(static_cast<std::size_t>(n) + 1);
    axis_im_[c].resize(static_cast<std::size_t>(n) + 1);
    for (int k2 = 0; k2 <= n; ++k2) {
      const std::complex<double> v = u.at(0, k2, c);
      axis_re_[c][static_cast<std::size_t>(k2)] = v.real();
      axis_im_[c][static_cast<std::size_t>(k2)] = v.imag();
    }
  }
  cx_.resize(static_cast<std::size_t>(n) + 1);
  sx_.resize(static_cast<std::size_t>(n) + 1);
  cy_.resize(static_cast<std::size_t>(row_len_));
  sy_.resize(static_cast<std::size_t>(row_len_));
}

Vec2 VelocityEvaluator::operator()(const Vec2& point) const {
  const int n = c_tables(point);

  // Folded k1 = 0 row (real by Hermitian symmetry in k2).
  double a0 = axis_re_[0][0];
  double a1 = axis_re_[1][0];
  for (int k2 = 1; k2 <= n; ++k2) {
    const double c = cy_[static_cast<std::size_t>(n + k2)];
    const double s = sy_[static_cast<std::size_t>(n + k2)];
    a0 += 2.0 * (axis_re_[0][static_cast<std::size_t>(k2)] * c -
                 axis_im_[0][static_cast<std::size_t>(k2)] * s);
    a1 += 2.0 * (axis_re_[1][static_cast<std::size_t>(k2)] * c -
                 axis_im_[1][static_cast<std::size_t>(k2)] * s);
  }

  // Rows k1 = 1..n contribute 2 Re(e^{i k1 x} row(y)).
  const int m = row_len_;
  const double* cy = cy_.data();
  const double* sy = sy_.data();
  for (int k1 = 1; k1 <= n; ++k1) {
    const std::size_t base = static_cast<std::size_t>(k1 - 1) * m;
    const double* re0 = row_re_[0].data() + base;
    const double* im0 = row_im_[0].data() + base;
    const double* re1 = row_re_[1].data() + base;
    const double* im1 = row_im_[1].data() + base;
    double rr0 = 0.0, ri0 = 0.0, rr1 = 0.0, ri1 = 0.0;
    for (int j = 0; j < m; ++j) {
      rr0 += re0[j] * cy[j] - im0[j] * sy[j];
      ri0 += re0[j] * sy[j] + im0[j] * cy[j];
      rr1 += re1[j] * cy[j] - im1[j] * sy[j];
      ri1 += re1[j] * sy[j] + im1[j] * cy[j];
    }
    const double c = cx_[static_cast<std::size_t>(k1)];
    const double s = sx_[static_cast<std::size_t>(k1)];
    a0 += 2.0 * (c * rr0 - s * ri0);
    a1 += 2.0 * (c * rr1 - s * ri1);
  }
  return {a0, a1};
}

int VelocityEvaluator::c_tables(const Vec2& point) const {
  const int n = n_;
  double* cx = cx_.data();
  double* sx = sx_.data();
  cx[0] = 1.0;
  sx[0] = 0.0;
  const double c1 = std::cos(point.x);
  const double s1 = std::sin(point.x);
  for (int k = 1; k <= n; ++k) {
    cx[k] = cx[k - 1] * c1 - sx[k - 1] * s1;
    sx[k] = sx[k - 1] * c1 + cx[k - 1] * s1;
  }
  double* cy = cy_.data();
  double* sy = sy_.data();
  const double c2 = std::cos(point.y);
  const double s2 = std::sin(point.y);
  cy[n] = 1.0;
  sy[n] = 0.0;
  for (int k = 1; k <= n; ++k) {
    cy[n + k] = cy[n + k - 1] * c2 - sy[n + k - 1] * s2;
    sy[n + k] = sy[n + k - 1] * c2 + cy[n + k - 1] * s2;
    cy[n - k] = cy[n + k];
    sy[n - k] = -sy[n + k];
  }
  return n;
}

}  // namespace torusflow
