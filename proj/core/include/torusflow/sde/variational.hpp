#pragma once

#include "torusflow/sde/integrator.hpp"
#include "torusflow/sde/problem.hpp"

namespace torusflow::sde {

/// Base path together with its derivative with respect to the initial
/// condition in one direction.
struct VariationalRun {
  SdePath base;
  std::vector<Vec> derivative;  ///< A_t, one entry per recorded time
  Vec direction;                ///< h = A_0
};

/// Co-integrates dA = Db(X) A dt + Dsigma(X)[A] dW on the same increments
/// as the base path, differentiating the discrete update exactly, so the
/// finite-difference quotient (X^{x+eps h} - X^x)/eps converges to A
/// linearly in eps at fixed step size.
///
/// Requires the Ito reading of the problem (ito_form or constant
/// diffusion) and the drift Jacobian callback. Runs unprojected.
VariationalRun variational_derivative(const SdeProblem& p, const Vec& x0, const Vec& h,
                                      const NoiseRecord& noise, int level, std::size_t n_steps);

/// ||(X^{x0 + eps h}_T - X^{x0}_T)/eps - A_T|| on shared noise.
double finite_difference_residual(const SdeProblem& p, const Vec& x0, const Vec& h, double eps,
                                  const NoiseRecord& noise, int level, std::size_t n_steps);

}  // namespace torusflow::sde
