#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "torusflow/philox.hpp"
#include "torusflow/sde/problem.hpp"

namespace torusflow::sde {

/// Pre-addressed Brownian increments at a finest time step. Coarser dyadic
/// levels consume exact sums of fine increments, so trajectories at
/// different step sizes are driven by the same Brownian path.
class NoiseRecord {
 public:
  NoiseRecord(std::uint64_t seed, std::uint64_t path, int noise_dim, double dt_fine,
              std::size_t n_fine);

  int noise_dim() const { return dim_; }
  double dt(int level) const { return dt_fine_ * static_cast<double>(std::size_t{1} << level); }
  std::size_t steps(int level) const { return n_fine_ >> level; }

  /// Increment of step `step` at dyadic level `level` (level 0 = finest).
  Vec increment(int level, std::size_t step) const;

 private:
  int dim_;
  double dt_fine_;
  std::size_t n_fine_;
  std::vector<double> fine_;  ///< n_fine x dim
};

/// Half(b)-step trapezoidal update on the drift with the diffusion applied
/// at the left point. For Stratonovich problems the trace correction
/// (1/2) sum_j Dsigma(x)[sigma_j(x)] e_j is folded into the drift; for
/// ito_form problems the drift is used as given.
struct StepTrace {
  std::vector<Vec> evaluation_points;  ///< where coefficients were read
};

/// (1/2) sum_j Dsigma(x)[sigma_j(x)] e_j regardless of the problem's form.
Vec trace_correction(const SdeProblem& p, const Vec& x);

/// The correction actually applied by the integrator: zero for ito_form
/// or constant-diffusion problems.
Vec stratonovich_correction(const SdeProblem& p, const Vec& x);

Vec sde_step(const SdeProblem& p, const Vec& x, const Vec& db, double dt,
             bool project = true, StepTrace* trace = nullptr);

/// Plain Euler-Maruyama update on the same effective drift; used as an
/// independent discretization in scheme-agreement studies.
Vec sde_step_euler(const SdeProblem& p, const Vec& x, const Vec& db, double dt,
                   bool project = true);

struct SdePath {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Vec> states;      ///< times.size() entries
  std::vector<Vec> increments;  ///< one per step
};

enum class SdeScheme { Trapezoidal, EulerMaruyama };

struct SolveOptions {
  bool project = true;
  int noise_level = 0;  ///< dyadic level consumed from a NoiseRecord
  SdeScheme scheme = SdeScheme::Trapezoidal;
};

/// Fixed-step solve driven by a NoiseRecord (coupled-noise studies).
SdePath solve_path(const SdeProblem& p, const Vec& x0, const NoiseRecord& noise,
                   std::size_t n_steps, const SolveOptions& options = {});

/// Fixed-step solve driven by an addressable driver (independent paths).
SdePath solve_path(const SdeProblem& p, const Vec& x0, std::uint64_t seed, std::uint64_t path,
                   double dt, std::size_t n_steps, const SolveOptions& options = {});

/// First hits of the nested shells dist(x, U^c) <= 1/n, n = 1..stages,
/// plus the exit time from U itself.
struct StoppingLadder {
  std::vector<int> stage;
  std::vector<double> hit_time;
  std::optional<double> exit_time;

  std::optional<double> hit_of_stage(int n) const;
};

struct LadderRun {
  SdePath path;
  StoppingLadder ladder;
};

/// Integrates until the exit from U or the horizon and records the ladder.
LadderRun solve_with_ladder(const SdeProblem& p, const Vec& x0, std::uint64_t seed,
                            std::uint64_t path, double dt, double horizon, int stages = 10,
                            const SolveOptions& options = {});

/// Exit time from the domain by direct simulation, without recording the
/// trajectory; returns the horizon when no exit occurs.
double sample_exit_time(const SdeProblem& p, const Vec& x0, std::uint64_t seed,
                        std::uint64_t path, double dt, double horizon,
                        const SolveOptions& options = {});

/// Smooth bump equal to 1 on {dist >= 1/n}, 0 on {dist <= 1/(2n)}.
double cutoff_bump(double distance, int stage);

/// The same problem with both coefficients multiplied by the stage-n bump;
/// the derivative of the cut diffusion is finished with a central
/// finite-difference gradient of the bump.
SdeProblem cutoff_problem(const SdeProblem& p, int stage);

struct CutoffComparison {
  std::size_t clean_steps = 0;     ///< steps whose evaluations all saw bump == 1
  double max_divergence = 0.0;     ///< sup |X_plain - X_cut| over the clean prefix
  double ladder_hit = 0.0;         ///< tau_n of the plain path
};

/// Runs the plain and cut dynamics on the same increments and measures
/// their divergence while the plain path stays safely inside the stage-n
/// shell.
CutoffComparison compare_cutoff(const SdeProblem& p, int stage, const Vec& x0,
                                std::uint64_t seed, std::uint64_t path, double dt,
                                double horizon, const SolveOptions& options = {});

}  // namespace torusflow::sde
