#pragma once

#include <functional>
#include <optional>
#include <string>

#include "torusflow/sde/linalg.hpp"

namespace torusflow::sde {

/// Finite-dimensional SDE with optional open-domain and manifold data.
///
/// The coefficients are read as the Stratonovich pair (b, sigma) unless
/// `ito_form` is set, in which case b already is the Ito drift and no
/// correction is applied by the integrator.
struct SdeProblem {
  std::string name;
  int state_dim = 0;
  int noise_dim = 0;

  std::function<Vec(const Vec&)> drift;                        ///< b(x)
  std::function<Mat(const Vec&)> diffusion;                    ///< sigma(x), n x m
  std::function<Mat(const Vec&, const Vec&)> diffusion_derivative;  ///< Dsigma(x)[h], n x m
  std::function<Mat(const Vec&)> drift_jacobian;               ///< Db(x), n x n (optional)

  /// dist(x, U^c) for the open domain U; +infinity when U is the whole
  /// space. Needed by stopping ladders and cutoffs.
  std::function<double(const Vec&)> boundary_distance;

  /// Level function g of the manifold constraint (optional).
  std::function<double(const Vec&)> constraint;
  /// Closest-point projection onto the constraint set (optional).
  std::function<Vec(const Vec&)> project;

  bool ito_form = false;
  bool constant_diffusion = false;

  bool has_domain() const { return static_cast<bool>(boundary_distance); }
  bool has_constraint() const { return static_cast<bool>(constraint); }
};

/// Max relative defect of diffusion_derivative against central finite
/// differences of diffusion over pseudo-random probe pairs around x0.
double probe_diffusion_derivative(const SdeProblem& p, const Vec& x0, int n_probes = 8,
                                  double eps = 1e-6);

namespace problems {

/// dX = J X . dW on the unit circle (J the quarter turn); the Ito
/// correction is -X/2.
SdeProblem circle_rotation();
/// Same dynamics written in Ito form with drift -X/2.
SdeProblem circle_rotation_ito();

/// dX = (I - X X^T) . dW on the unit sphere; Ito correction is -X.
SdeProblem sphere_brownian();
/// Same dynamics in Ito form with drift -X.
SdeProblem sphere_brownian_ito();

/// Deterministic rigid rotation about the given axis, restricted to the
/// sphere.
SdeProblem sphere_rotation(const Vec& omega);

/// Rigid rotation plus Stratonovich sphere noise of the given strength.
SdeProblem sphere_rotation_noisy(const Vec& omega, double noise_scale);

/// x' = 1 on U = (-1, 1); deterministic ladder calibration.
SdeProblem interval_unit_drift();

/// Standard Brownian motion on U = (-1, 1).
SdeProblem interval_brownian();

/// dX = (a I + w J) X dt + s dW in the plane; constant diffusion, closed
/// form flow e^{at}(cos wt I + sin wt J).
SdeProblem linear_plane(double a, double w, double s);

/// Plane SDE with affine state-dependent diffusion, for chain-rule and
/// order measurements.
SdeProblem affine_noise_plane();

}  // namespace problems

}  // namespace torusflow::sde
