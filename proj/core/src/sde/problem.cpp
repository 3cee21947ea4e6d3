#include "torusflow/sde/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "torusflow/philox.hpp"

namespace torusflow::sde {

double probe_diffusion_derivative(const SdeProblem& p, const Vec& x0, int n_probes, double eps) {
  if (!p.diffusion || !p.diffusion_derivative) return 0.0;
  const CounterRng rng(20240601u);
  double worst = 0.0;
  for (int probe = 0; probe < n_probes; ++probe) {
    Vec x = x0, h(static_cast<std::size_t>(p.state_dim));
    for (int i = 0; i < p.state_dim; ++i) {
      x[static_cast<std::size_t>(i)] += 0.1 * rng.gaussian(probe, 0, static_cast<std::uint32_t>(i));
      h[static_cast<std::size_t>(i)] = rng.gaussian(probe, 1, static_cast<std::uint32_t>(i));
    }
    const double hn = norm(h);
    for (auto& v : h) v /= hn;

    Vec xp = x, xm = x;
    axpy(eps, h, xp);
    axpy(-eps, h, xm);
    const Mat sp = p.diffusion(xp);
    const Mat sm = p.diffusion(xm);
    const Mat ds = p.diffusion_derivative(x, h);
    double defect = 0.0, scale = 0.0;
    for (int i = 0; i < p.state_dim; ++i)
      for (int j = 0; j < p.noise_dim; ++j) {
        const double fd = (sp(i, j) - sm(i, j)) / (2.0 * eps);
        defect = std::max(defect, std::abs(fd - ds(i, j)));
        scale = std::max(scale, std::abs(ds(i, j)));
      }
    worst = std::max(worst, defect / std::max(1.0, scale));
  }
  return worst;
}

namespace problems {

namespace {

Vec cross(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::function<Vec(const Vec&)> unit_sphere_projection() {
  return [](const Vec& x) {
    const double n = norm(x);
    Vec r = x;
    for (auto& v : r) v /= n;
    return r;
  };
}

std::function<double(const Vec&)> unit_sphere_constraint() {
  return [](const Vec& x) { return dot(x, x) - 1.0; };
}

}  // namespace

SdeProblem circle_rotation() {
  SdeProblem p;
  p.name = "circle";
  p.state_dim = 2;
  p.noise_dim = 1;
  p.drift = [](const Vec& x) { return Vec(x.size(), 0.0); };
  p.diffusion = [](const Vec& x) {
    Mat s(2, 1);
    s(0, 0) = -x[1];
    s(1, 0) = x[0];
    return s;
  };
  p.diffusion_derivative = [](const Vec&, const Vec& h) {
    Mat s(2, 1);
    s(0, 0) = -h[1];
    s(1, 0) = h[0];
    return s;
  };
  p.drift_jacobian = [](const Vec&) { return Mat(2, 2); };
  p.constraint = unit_sphere_constraint();
  p.project = unit_sphere_projection();
  return p;
}

SdeProblem circle_rotation_ito() {
  SdeProblem p = circle_rotation();
  p.name = "circle-ito";
  p.ito_form = true;
  p.drift = [](const Vec& x) { return -0.5 * x; };
  p.drift_jacobian = [](const Vec&) {
    Mat m = Mat::identity(2);
    m(0, 0) = m(1, 1) = -0.5;
    return m;
  };
  return p;
}

SdeProblem sphere_brownian() {
  SdeProblem p;
  p.name = "sphere";
  p.state_dim = 3;
  p.noise_dim = 3;
  p.drift = [](const Vec& x) { return Vec(x.size(), 0.0); };
  p.diffusion = [](const Vec& x) {
    Mat s = Mat::identity(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s(i, j) -= x[i] * x[j];
    return s;
  };
  p.diffusion_derivative = [](const Vec& x, const Vec& h) {
    Mat s(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s(i, j) = -h[i] * x[j] - x[i] * h[j];
    return s;
  };
  p.drift_jacobian = [](const Vec&) { return Mat(3, 3); };
  p.constraint = unit_sphere_constraint();
  p.project = unit_sphere_projection();
  return p;
}

SdeProblem sphere_brownian_ito() {
  SdeProblem p = sphere_brownian();
  p.name = "sphere-ito";
  p.ito_form = true;
  p.drift = [](const Vec& x) { return -1.0 * x; };
  p.drift_jacobian = [](const Vec&) {
    Mat m = Mat::identity(3);
    for (int i = 0; i < 3; ++i) m(i, i) = -1.0;
    return m;
  };
  return p;
}

SdeProblem sphere_rotation(const Vec& omega) {
  SdeProblem p;
  p.name = "sphere-rotation";
  p.state_dim = 3;
  p.noise_dim = 1;
  p.drift = [omega](const Vec& x) { return cross(omega, x); };
  p.diffusion = [](const Vec&) { return Mat(3, 1); };
  p.diffusion_derivative = [](const Vec&, const Vec&) { return Mat(3, 1); };
  p.drift_jacobian = [omega](const Vec&) {
    Mat m(3, 3);
    m(0, 1) = -omega[2];
    m(0, 2) = omega[1];
    m(1, 0) = omega[2];
    m(1, 2) = -omega[0];
    m(2, 0) = -omega[1];
    m(2, 1) = omega[0];
    return m;
  };
  p.constant_diffusion = true;
  p.constraint = unit_sphere_constraint();
  p.project = unit_sphere_projection();
  return p;
}

SdeProblem sphere_rotation_noisy(const Vec& omega, double noise_scale) {
  SdeProblem p = sphere_brownian();
  p.name = "sphere-rotation-noisy";
  p.drift = [omega](const Vec& x) { return cross(omega, x); };
  p.drift_jacobian = problems::sphere_rotation(omega).drift_jacobian;
  const auto base_sigma = p.diffusion;
  const auto base_dsigma = p.diffusion_derivative;
  p.diffusion = [base_sigma, noise_scale](const Vec& x) {
    Mat s = base_sigma(x);
    for (auto& v : s.a) v *= noise_scale;
    return s;
  };
  p.diffusion_derivative = [base_dsigma, noise_scale](const Vec& x, const Vec& h) {
    Mat s = base_dsigma(x, h);
    for (auto& v : s.a) v *= noise_scale;
    return s;
  };
  return p;
}

SdeProblem interval_unit_drift() {
  SdeProblem p;
  p.name = "interval-drift";
  p.state_dim = 1;
  p.noise_dim = 1;
  p.drift = [](const Vec&) { return Vec{1.0}; };
  p.diffusion = [](const Vec&) { return Mat(1, 1); };
  p.diffusion_derivative = [](const Vec&, const Vec&) { return Mat(1, 1); };
  p.drift_jacobian = [](const Vec&) { return Mat(1, 1); };
  p.boundary_distance = [](const Vec& x) { return 1.0 - std::abs(x[0]); };
  p.constant_diffusion = true;
  return p;
}

SdeProblem interval_brownian() {
  SdeProblem p;
  p.name = "interval-brownian";
  p.state_dim = 1;
  p.noise_dim = 1;
  p.drift = [](const Vec&) { return Vec{0.0}; };
  p.diffusion = [](const Vec&) {
    Mat s(1, 1);
    s(0, 0) = 1.0;
    return s;
  };
  p.diffusion_derivative = [](const Vec&, const Vec&) { return Mat(1, 1); };
  p.drift_jacobian = [](const Vec&) { return Mat(1, 1); };
  p.boundary_distance = [](const Vec& x) { return 1.0 - std::abs(x[0]); };
  p.constant_diffusion = true;
  return p;
}

SdeProblem linear_plane(double a, double w, double s) {
  SdeProblem p;
  p.name = "linear-plane";
  p.state_dim = 2;
  p.noise_dim = 2;
  Mat gen(2, 2);
  gen(0, 0) = gen(1, 1) = a;
  gen(0, 1) = -w;
  gen(1, 0) = w;
  p.drift = [gen](const Vec& x) { return matvec(gen, x); };
  p.drift_jacobian = [gen](const Vec&) { return gen; };
  p.diffusion = [s](const Vec&) {
    Mat m = Mat::identity(2);
    m(0, 0) = m(1, 1) = s;
    return m;
  };
  p.diffusion_derivative = [](const Vec&, const Vec&) { return Mat(2, 2); };
  p.constant_diffusion = true;
  p.ito_form = true;
  return p;
}

SdeProblem affine_noise_plane() {
  SdeProblem p;
  p.name = "affine-noise-plane";
  p.state_dim = 2;
  p.noise_dim = 2;
  Mat gen(2, 2);
  gen(0, 0) = -0.3;
  gen(0, 1) = 0.6;
  gen(1, 0) = -0.6;
  gen(1, 1) = -0.2;
  Mat a0 = Mat::identity(2);
  a0(0, 0) = 0.4;
  a0(1, 1) = 0.5;
  Mat a1(2, 2);
  a1(0, 0) = 0.2;
  a1(1, 1) = -0.1;
  Mat a2(2, 2);
  a2(0, 1) = 0.15;
  a2(1, 0) = 0.1;
  p.drift = [gen](const Vec& x) { return matvec(gen, x); };
  p.drift_jacobian = [gen](const Vec&) { return gen; };
  p.diffusion = [a0, a1, a2](const Vec& x) {
    Mat s = a0;
    for (std::size_t i = 0; i < s.a.size(); ++i) s.a[i] += x[0] * a1.a[i] + x[1] * a2.a[i];
    return s;
  };
  p.diffusion_derivative = [a1, a2](const Vec&, const Vec& h) {
    Mat s(2, 2);
    for (std::size_t i = 0; i < s.a.size(); ++i) s.a[i] = h[0] * a1.a[i] + h[1] * a2.a[i];
    return s;
  };
  return p;
}

}  // namespace problems

}  // namespace torusflow::sde
