#pragma once

#include <functional>
#include <string>
#include <vector>

#include "torusflow/spectral_field.hpp"

namespace torusflow {

/// Velocity field history sampled on a uniform time grid, linearly
/// interpolated in between. A steady path holds one field and covers all
/// times.
class VelocityPath {
 public:
  VelocityPath(double t_begin, double dt);
  static VelocityPath steady(const SpectralField& u);

  void append(const SpectralField& u);

  bool is_steady() const { return steady_; }
  double t_begin() const { return t_begin_; }
  double t_end() const;
  double dt() const { return dt_; }
  std::size_t size() const { return fields_.size(); }

  /// Field at time t; throws naming the uncovered interval when t is
  /// outside [t_begin, t_end].
  SpectralField at_time(double t) const;

  const SpectralField& frame(std::size_t i) const { return fields_.at(i); }

 private:
  bool steady_ = false;
  double t_begin_ = 0.0;
  double dt_ = 0.0;
  std::vector<SpectralField> fields_;
};

/// Particle grid representing a volume-preserving deformation of the torus.
///
/// Positions are stored as the periodic displacement d(x) = Phi(x) - x on
/// the uniform M x M grid, which keeps winding well-defined and makes
/// neighbour differences meaningful without unwrapping.
class FlowMap {
 public:
  FlowMap() = default;
  static FlowMap identity(int grid_resolution);

  /// Starts from an arbitrary smooth relabelling instead of the identity.
  static FlowMap from_map(int grid_resolution, const std::function<Vec2(const Vec2&)>& map);

  int grid_resolution() const { return m_; }
  double grid_spacing() const { return kTwoPi / m_; }

  Vec2 grid_point(int i, int j) const { return {kTwoPi * i / m_, kTwoPi * j / m_}; }
  Vec2 position(int i, int j) const {
    const Vec2 g = grid_point(i, j);
    const Vec2& d = displacement_[index(i, j)];
    return {g.x + d.x, g.y + d.y};
  }
  const Vec2& displacement(int i, int j) const { return displacement_[index(i, j)]; }
  void set_displacement(int i, int j, const Vec2& d) { displacement_[index(i, j)] = d; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * m_ + j;
  }

  /// max |det DPhi - 1| over grid cells; DPhi by centered differences of
  /// the displacement.
  double max_volume_defect() const;
  /// min and max of det DPhi.
  std::pair<double, double> jacobian_range() const;

 private:
  int m_ = 0;
  std::vector<Vec2> displacement_;
};

/// Classical fourth-order particle integration of dX = u(t, X) dt from t0
/// to t1 (either direction); off-grid velocities come from the exact mode
/// sum. Deterministic.
FlowMap advance_flow(const FlowMap& start, const VelocityPath& path, double t0, double t1,
                     double dt);

/// Approximates Phi(t)^{-1} by integrating particles backwards from the
/// uniform grid at time t down to time 0.
FlowMap invert_flow(const VelocityPath& path, double t, int grid_resolution, double dt);

/// sup_x | Phi_t(Phi_t^{-1}(x)) - x | with the outer flow re-integrated
/// forward from each off-grid label, i.e. a self-consistency residual free
/// of interpolation error.
double composition_residual(const VelocityPath& path, const FlowMap& inverse, double t,
                            double dt);

/// Velocity samples attached to particle positions: eta(x) = u(t, Phi(x)).
struct LagrangianState {
  FlowMap flow;
  std::vector<Vec2> eta;  ///< row-major over the label grid
  double time = 0.0;
};

LagrangianState make_lagrangian_state(const FlowMap& flow, const SpectralField& u_t, double t);

/// Periodic bilinear interpolation of a grid vector function at a label
/// point.
Vec2 bilinear_sample(const std::vector<Vec2>& grid_fn, int grid_resolution, const Vec2& label);

struct ReconstructionReport {
  /// Relative L2 mismatch of eta(Phi^{-1}(x)) vs u(t, x) with eta
  /// bilinearly interpolated over the label grid.
  double interpolated_mismatch = 0.0;
  /// Same, but eta(Phi^{-1}(x)) re-evaluated as u(t, Phi(Phi^{-1}(x)))
  /// with the forward flow re-integrated from the label (no interpolation).
  double direct_mismatch = 0.0;
  std::vector<Vec2> reconstructed;  ///< interpolated variant on the grid
};

/// Rebuilds the velocity field from the Lagrangian data and reports the
/// mismatch against the Eulerian field at the same time.
ReconstructionReport reconstruct_velocity(const LagrangianState& state, const FlowMap& inverse,
                                          const VelocityPath& path, double dt);

/// Smooth volume-preserving relabelling of the torus.
struct VolumePreservingMap {
  std::string name;
  std::function<Vec2(const Vec2&)> apply;
  /// Analytic Jacobian determinant minus one (exactly zero for the
  /// shipped presets).
  std::function<double(const Vec2&)> det_defect;
  bool grid_aligned = false;
};

/// Rigid translation by `shift` grid cells along x (exact on the grid).
VolumePreservingMap translation_map(int grid_resolution, int shift_cells);
/// Periodic shear (x, y) -> (x + amplitude * sin y, y).
VolumePreservingMap shear_map(double amplitude);
VolumePreservingMap identity_map();

struct InvarianceReport {
  std::vector<double> checkpoint_times;
  std::vector<double> deviation;  ///< sup over grid per checkpoint
  double max_deviation = 0.0;
};

/// Runs the particle flow once from the identity and once from the
/// relabelled grid phi(x) under the same velocity history, then compares
/// eta_t(phi(x)) against the relabelled run's eta at x. The two agree
/// identically in the continuum.
InvarianceReport right_invariance_check(const VelocityPath& path,
                                        const VolumePreservingMap& phi,
                                        const std::vector<double>& checkpoints,
                                        int grid_resolution, double dt);

}  // namespace torusflow
