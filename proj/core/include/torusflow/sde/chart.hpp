#pragma once

#include <string>

#include "torusflow/sde/integrator.hpp"
#include "torusflow/sde/problem.hpp"

namespace torusflow::sde {

/// Analytic chart of the unit sphere with the derivative data needed to
/// push a Stratonovich SDE into coordinates.
struct Chart {
  std::string name;
  std::function<Vec(const Vec&)> to_chart;        ///< psi: R^3 -> R^2
  std::function<Vec(const Vec&)> from_chart;      ///< psi^{-1}: R^2 -> R^3
  std::function<Mat(const Vec&)> jacobian;        ///< Dpsi(p), 2 x 3
  std::function<Mat(const Vec&)> inverse_jacobian;  ///< Dpsi^{-1}(y), 3 x 2
  /// Directional derivative of the Jacobian, (D^2 psi)(p)[v], 2 x 3.
  std::function<Mat(const Vec&, const Vec&)> hessian_action;
  double domain_radius = 3.0;  ///< chart ball |y| < R

  bool contains(const Vec& y) const { return norm(y) < domain_radius; }
};

/// Projection from the north pole; covers the sphere minus (0,0,1).
Chart stereographic_north(double domain_radius = 3.0);
/// Projection from the south pole; covers the sphere minus (0,0,-1).
Chart stereographic_south(double domain_radius = 3.0);

/// Coordinates of the same Stratonovich SDE in the chart: the drift and
/// diffusion transform with the tangent map and no correction terms,
/// which is the point of the Stratonovich formulation.
SdeProblem push_forward(const SdeProblem& embedded, const Chart& chart);

struct ChartComparison {
  std::vector<double> times;
  std::vector<double> deviation;  ///< |psi(X_embedded) - Y_chart| per step
  double max_deviation = 0.0;
};

/// Integrates the embedded SDE and its chart coordinates on the same
/// Brownian increments and reports the pointwise deviation. Throws when
/// the chart path leaves the chart ball before the end.
ChartComparison chart_consistency(const SdeProblem& embedded, const Chart& chart, const Vec& x0,
                                  const NoiseRecord& noise, int level, std::size_t n_steps);

struct GluedRun {
  std::vector<double> times;
  std::vector<int> chart_index;      ///< active chart per time
  std::vector<Vec> embedded_states;  ///< glued path mapped back to R^3
  int switches = 0;
  double max_deviation_vs_reference = 0.0;
};

/// Integrates in whichever chart currently holds the state, hopping to the
/// other chart when the coordinate radius passes switch_radius, and
/// compares against the embedded reference on the same increments.
/// `start_chart` selects the initial chart when both contain x0.
GluedRun glue_charts(const SdeProblem& embedded, const Chart& chart_a, const Chart& chart_b,
                     const Vec& x0, const NoiseRecord& noise, int level, std::size_t n_steps,
                     double switch_radius, int start_chart = 0);

}  // namespace torusflow::sde
