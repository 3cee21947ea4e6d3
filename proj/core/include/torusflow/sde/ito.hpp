#pragma once

#include "torusflow/sde/integrator.hpp"
#include "torusflow/sde/problem.hpp"

namespace torusflow::sde {

/// Scalar C^2 observable with analytic first and second derivatives.
struct Observable {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

namespace observables {

/// h(x) = c . x
Observable linear(const Vec& c);
/// h(x) = |x|^2
Observable squared_norm(int dim);
/// h(x) = x1^3 + x1 x2^2 - 2 x2^3 (plane only)
Observable generic_cubic();

}  // namespace observables

/// Max relative defect of the gradient/Hessian callbacks against central
/// finite differences around x0.
double probe_observable(const Observable& h, const Vec& x0, int n_probes = 8, double eps = 1e-5);

/// Per-checkpoint defect of the chain rule along a stored trajectory:
/// h(X_t) - h(X_0) - int Dh b - int Dh sigma dW - (1/2) int tr[D(Dh sigma) sigma].
/// The trajectory must come from the Stratonovich reading of `p`.
std::vector<double> ito_residual_series(const SdeProblem& p, const SdePath& path,
                                        const Observable& h);

}  // namespace torusflow::sde
