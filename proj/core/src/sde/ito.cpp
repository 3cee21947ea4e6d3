#include "torusflow/sde/ito.hpp"

#include <cmath>
#include <stdexcept>

#include "torusflow/philox.hpp"

namespace torusflow::sde {

namespace observables {

Observable linear(const Vec& c) {
  Observable h;
  h.name = "linear";
  h.value = [c](const Vec& x) { return dot(c, x); };
  h.gradient = [c](const Vec&) { return c; };
  h.hessian = [c](const Vec&) { return Mat(static_cast<int>(c.size()), static_cast<int>(c.size())); };
  return h;
}

Observable squared_norm(int dim) {
  Observable h;
  h.name = "squared-norm";
  h.value = [](const Vec& x) { return dot(x, x); };
  h.gradient = [](const Vec& x) { return 2.0 * x; };
  h.hessian = [dim](const Vec&) {
    Mat m = Mat::identity(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 2.0;
    return m;
  };
  return h;
}

Observable generic_cubic() {
  Observable h;
  h.name = "cubic";
  h.value = [](const Vec& x) { return x[0] * x[0] * x[0] + x[0] * x[1] * x[1] - 2.0 * x[1] * x[1] * x[1]; };
  h.gradient = [](const Vec& x) {
    return Vec{3.0 * x[0] * x[0] + x[1] * x[1], 2.0 * x[0] * x[1] - 6.0 * x[1] * x[1]};
  };
  h.hessian = [](const Vec& x) {
    Mat m(2, 2);
    m(0, 0) = 6.0 * x[0];
    m(0, 1) = 2.0 * x[1];
    m(1, 0) = 2.0 * x[1];
    m(1, 1) = 2.0 * x[0] - 12.0 * x[1];
    return m;
  };
  return h;
}

}  // namespace observables

double probe_observable(const Observable& h, const Vec& x0, int n_probes, double eps) {
  const CounterRng rng(911u);
  double worst = 0.0;
  const int n = static_cast<int>(x0.size());
  for (int probe = 0; probe < n_probes; ++probe) {
    Vec x = x0;
    for (int i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] += 0.2 * rng.gaussian(probe, 0, static_cast<std::uint32_t>(i));
    const Vec g = h.gradient(x);
    const Mat hs = h.hessian(x);
    for (int i = 0; i < n; ++i) {
      Vec xp = x, xm = x;
      xp[static_cast<std::size_t>(i)] += eps;
      xm[static_cast<std::size_t>(i)] -= eps;
      const double fd = (h.value(xp) - h.value(xm)) / (2.0 * eps);
      worst = std::max(worst, std::abs(fd - g[static_cast<std::size_t>(i)]) /
                                  std::max(1.0, std::abs(fd)));
      const Vec gp = h.gradient(xp);
      const Vec gm = h.gradient(xm);
      for (int k = 0; k < n; ++k) {
        const double fd2 = (gp[static_cast<std::size_t>(k)] - gm[static_cast<std::size_t>(k)]) / (2.0 * eps);
        worst = std::max(worst, std::abs(fd2 - hs(k, i)) / std::max(1.0, std::abs(fd2)));
      }
    }
  }
  return worst;
}

std::vector<double> ito_residual_series(const SdeProblem& p, const SdePath& path,
                                        const Observable& h) {
  if (path.states.size() != path.increments.size() + 1)
    throw std::invalid_argument("ito_residual_series: malformed path");

  const double dt = path.dt;
  const double h0 = h.value(path.states.front());
  std::vector<double> residual;
  residual.reserve(path.increments.size() + 1);
  residual.push_back(0.0);

  double drift_sum = 0.0, noise_sum = 0.0, trace_sum = 0.0;
  for (std::size_t s = 0; s < path.increments.size(); ++s) {
    const Vec& x = path.states[s];
    const Vec& db = path.increments[s];
    const Vec grad = h.gradient(x);
    const Mat hess = h.hessian(x);
    const Mat sigma = p.diffusion(x);

    // Stratonovich drift part; for ito_form problems the correction moves
    // out of the drift so the series checks the same dynamics
    Vec b = p.drift(x);
    if (p.ito_form) axpy(-1.0, trace_correction(p, x), b);
    drift_sum += dot(grad, b) * dt;

    const Vec sdb = matvec(sigma, db);
    noise_sum += dot(grad, sdb);

    // (1/2) sum_j [ sigma_j^T H sigma_j + grad . (Dsigma(x)[sigma_j]) e_j ]
    double tr = 0.0;
    for (int j = 0; j < p.noise_dim; ++j) {
      const Vec sj = column(sigma, j);
      tr += dot(sj, matvec(hess, sj));
      const Mat ds = p.diffusion_derivative(x, sj);
      Vec dsj(static_cast<std::size_t>(p.state_dim));
      for (int i = 0; i < p.state_dim; ++i) dsj[static_cast<std::size_t>(i)] = ds(i, j);
      tr += dot(grad, dsj);
    }
    trace_sum += 0.5 * tr * dt;

    const double lhs = h.value(path.states[s + 1]) - h0;
    residual.push_back(lhs - drift_sum - noise_sum - trace_sum);
  }
  return residual;
}

}  // namespace torusflow::sde
