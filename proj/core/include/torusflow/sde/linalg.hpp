#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace torusflow::sde {

using Vec = std::vector<double>;

/// Dense row-major matrix just big enough for the finite-dimensional lab.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Vec operator+(const Vec& x, const Vec& y) {
  Vec r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += y[i];
  return r;
}

inline Vec operator-(const Vec& x, const Vec& y) {
  Vec r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  return r;
}

inline Vec operator*(double a, const Vec& x) {
  Vec r = x;
  for (auto& v : r) v *= a;
  return r;
}

inline void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline Vec matvec(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec: size mismatch");
  Vec r(static_cast<std::size_t>(m.rows), 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols; ++j) acc += m(i, j) * x[j];
    r[static_cast<std::size_t>(i)] = acc;
  }
  return r;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: size mismatch");
  Mat r(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double v = a(i, k);
      for (int j = 0; j < b.cols; ++j) r(i, j) += v * b(k, j);
    }
  return r;
}

inline double dot(const Vec& x, const Vec& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

inline Vec column(const Mat& m, int j) {
  Vec c(static_cast<std::size_t>(m.rows));
  for (int i = 0; i < m.rows; ++i) c[static_cast<std::size_t>(i)] = m(i, j);
  return c;
}

}  // namespace torusflow::sde
