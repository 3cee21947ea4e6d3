#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "torusflow/noise.hpp"
#include "torusflow/pseudospectral.hpp"
#include "torusflow/presets.hpp"

namespace torusflow {

/// Run configuration for the ideal-flow integrator with additive forcing.
struct EulerianRunConfig {
  int resolution = 32;
  double dt = 1e-3;
  double horizon = 1.0;
  std::vector<double> s_track = {0.0, 2.0};
  /// H^s ceiling treated as the boundary of the solvable region. 0 means
  /// "1000x the initial norm".
  double cap = 0.0;
  double cap_norm_index = 2.0;
  NoiseModel noise;  ///< empty mode set = deterministic run
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  std::string initial_condition = "taylor-green";
  int stride = 10;  ///< record norms every `stride` steps
  std::vector<double> snapshot_times;

  void validate() const;
};

enum class RunStatus { ReachedHorizon, CapExit, NumericalBlowup };

/// Time series of norms plus exit bookkeeping for one trajectory.
///
/// When the H^s norm reaches the cap, `exit_time` is the first crossing
/// and `announcing_times` holds the earlier first crossings of the nested
/// thresholds cap*(1 - 1/n), n = 2..10, which increase towards the exit.
struct SolutionRecord {
  std::vector<double> times;
  std::vector<std::string> norm_labels;
  std::vector<std::vector<double>> norms;  ///< norms[i][j]: time i, label j
  std::vector<double> energy;              ///< squared H^0 norm
  RunStatus status = RunStatus::ReachedHorizon;
  std::optional<double> exit_time;
  std::optional<int> exit_stage;
  std::vector<std::pair<int, double>> announcing_times;
  std::optional<std::uint64_t> blowup_step;
  std::vector<std::pair<double, SpectralField>> snapshots;
  SpectralField final_state;
};

/// One explicit-trapezoidal step on the drift -Pi[(u.grad)u] with the
/// additive increment added once. Deterministic; preserves zero mean and
/// divergence-freeness.
SpectralField eulerian_step(const SpectralField& u, const SpectralField& dw, double dt,
                            const FftGrid& grid);

/// Called with (step, time, state) at step 0 and after every step; lets
/// callers record the full velocity history.
using StepObserver = std::function<void(std::uint64_t, double, const SpectralField&)>;

/// Integrates until the horizon, a cap crossing, or a numerical blow-up
/// (NaN), whichever comes first.
SolutionRecord run_eulerian(const EulerianRunConfig& config);

/// Variant reusing a caller-supplied initial state and optional observer.
SolutionRecord run_eulerian(const EulerianRunConfig& config, const SpectralField& initial,
                            const StepObserver& observer = nullptr);

struct EnergyBalance {
  double slope = 0.0;
  double std_error = 0.0;
  int paths_used = 0;
  int paths_excluded = 0;
  std::vector<double> times;
  std::vector<double> mean_energy;
};

/// Monte Carlo slope of the mean squared H^0 norm against time; for the
/// additive forcing this converges to the injection rate trace_q().
EnergyBalance energy_balance_estimate(const EulerianRunConfig& config, int n_paths);

struct RegularityReport {
  std::vector<int> resolutions;
  std::vector<double> times;
  std::vector<std::vector<double>> higher_norms;   ///< [resolution][time]
  std::vector<std::vector<double>> tracked_norms;  ///< [resolution][time]
  std::vector<double> rel_change_last_pair;        ///< per checkpoint, finest pair
  bool capped = false;
  bool pass = false;
};

/// Runs the same forcing realization at each resolution and reports how
/// the H^{s+1} norm curve moves under refinement while H^s stays below
/// the cap. `s` is config.cap_norm_index.
RegularityReport regularity_persistence_diagnostic(const EulerianRunConfig& config,
                                                   const std::vector<int>& refinements);

}  // namespace torusflow
