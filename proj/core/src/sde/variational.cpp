#include "torusflow/sde/variational.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace torusflow::sde {

VariationalRun variational_derivative(const SdeProblem& p, const Vec& x0, const Vec& h,
                                      const NoiseRecord& noise, int level, std::size_t n_steps) {
  if (!p.ito_form && !p.constant_diffusion)
    throw std::invalid_argument(
        "variational_derivative: needs the Ito reading (ito_form or constant diffusion)");
  if (!p.drift_jacobian)
    throw std::invalid_argument("variational_derivative: drift Jacobian callback missing");
  if (noise.noise_dim() != p.noise_dim)
    throw std::invalid_argument("variational_derivative: noise dimension mismatch");

  const double dt = noise.dt(level);

  VariationalRun run;
  run.direction = h;
  run.base.dt = dt;
  run.base.times.push_back(0.0);
  run.base.states.push_back(x0);
  run.derivative.push_back(h);

  Vec x = x0;
  Vec a = h;
  for (std::size_t s = 0; s < n_steps; ++s) {
    const Vec db = noise.increment(level, s);

    const Vec b0 = p.drift(x);
    const Mat db0 = p.drift_jacobian(x);
    const Mat sigma = p.diffusion(x);
    const Vec noise_x = matvec(sigma, db);
    const Vec noise_a = matvec(p.diffusion_derivative(x, a), db);

    // predictor pair (exact derivative of the predictor in direction a)
    Vec xp = x;
    axpy(dt, b0, xp);
    axpy(1.0, noise_x, xp);
    Vec ap = a;
    axpy(dt, matvec(db0, a), ap);
    axpy(1.0, noise_a, ap);

    const Vec b1 = p.drift(xp);
    const Mat db1 = p.drift_jacobian(xp);

    Vec x_next = x;
    axpy(0.5 * dt, b0, x_next);
    axpy(0.5 * dt, b1, x_next);
    axpy(1.0, noise_x, x_next);

    Vec a_next = a;
    axpy(0.5 * dt, matvec(db0, a), a_next);
    axpy(0.5 * dt, matvec(db1, ap), a_next);
    axpy(1.0, noise_a, a_next);

    x = x_next;
    a = a_next;
    for (double v : a)
      if (!std::isfinite(v))
        throw std::runtime_error("variational_derivative: derivative blew up at step " +
                                 std::to_string(s));
    run.base.increments.push_back(db);
    run.base.times.push_back(static_cast<double>(s + 1) * dt);
    run.base.states.push_back(x);
    run.derivative.push_back(a);
  }
  return run;
}

double finite_difference_residual(const SdeProblem& p, const Vec& x0, const Vec& h, double eps,
                                  const NoiseRecord& noise, int level, std::size_t n_steps) {
  const VariationalRun var = variational_derivative(p, x0, h, noise, level, n_steps);

  SolveOptions opts;
  opts.project = false;
  opts.noise_level = level;
  Vec shifted = x0;
  axpy(eps, h, shifted);
  const SdePath plus = solve_path(p, shifted, noise, n_steps, opts);
  const SdePath base = solve_path(p, x0, noise, n_steps, opts);

  const Vec quotient = (1.0 / eps) * (plus.states.back() - base.states.back());
  return norm(quotient - var.derivative.back());
}

}  // namespace torusflow::sde
