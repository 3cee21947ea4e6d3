#include "torusflow/eulerian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace torusflow {

void EulerianRunConfig::validate() const {
  if (resolution < 4) throw std::invalid_argument("config: resolution must be >= 4");
  if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("config: horizon must be > 0");
  if (stride < 1) throw std::invalid_argument("config: stride must be >= 1");
  if (cap < 0.0) throw std::invalid_argument("config: cap must be >= 0");
  if (noise.max_wavenumber() > resolution)
    throw std::invalid_argument("config: noise modes outside the truncation");
}

SpectralField eulerian_step(const SpectralField& u, const SpectralField& dw, double dt,
                            const FftGrid& grid) {
  // trapezoidal predictor/corrector on the drift alone; the increment is
  // added once at the end, so a zero state maps to exactly dw
  SpectralField drift0 = convective_term(u, grid);

  SpectralField predictor = u;
  predictor.axpy(-dt, drift0);

  SpectralField drift1 = convective_term(predictor, grid);

  SpectralField next = u;
  next.axpy(-0.5 * dt, drift0);
  next.axpy(-0.5 * dt, drift1);
  next += dw;
  next.zero_mean_mode();
  next.set_divergence_free_flag(true);
  return next;
}

namespace {

bool finite_field(const SpectralField& f) {
  for (const auto& c : f.raw())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

}  // namespace

SolutionRecord run_eulerian(const EulerianRunConfig& config) {
  const SpectralField u0 =
      presets::by_name(config.initial_condition, config.resolution, config.seed);
  return run_eulerian(config, u0);
}

SolutionRecord run_eulerian(const EulerianRunConfig& config, const SpectralField& initial,
                            const StepObserver& observer) {
  config.validate();

  SpectralField u = initial;
  u.zero_mean_mode();

  const SobolevIndex s_cap(config.cap_norm_index);
  const double initial_norm = sobolev_norm(u, s_cap);
  const double cap = config.cap > 0.0 ? config.cap : 1000.0 * std::max(initial_norm, 1e-12);
  if (cap <= initial_norm)
    throw std::invalid_argument("config: cap must exceed the initial H^s norm");

  const bool noisy = config.noise.basis_size() > 0;
  const BrownianDriver driver(config.seed, config.dt, config.path);
  FftGrid grid(config.resolution);

  SolutionRecord rec;
  for (double s : config.s_track) {
    char label[32];
    std::snprintf(label, sizeof(label), "H%g", s);
    rec.norm_labels.push_back(label);
  }

  const auto record_state = [&](double t) {
    rec.times.push_back(t);
    std::vector<double> row;
    row.reserve(config.s_track.size());
    for (double s : config.s_track) row.push_back(sobolev_norm(u, SobolevIndex(s)));
    rec.norms.push_back(std::move(row));
    const double l2 = sobolev_norm(u, SobolevIndex(0.0));
    rec.energy.push_back(l2 * l2);
  };

  auto snapshot_due = config.snapshot_times;
  std::sort(snapshot_due.begin(), snapshot_due.end());
  std::size_t next_snapshot = 0;
  const auto take_snapshots = [&](double t) {
    while (next_snapshot < snapshot_due.size() && snapshot_due[next_snapshot] <= t + 1e-12) {
      rec.snapshots.emplace_back(t, u);
      ++next_snapshot;
    }
  };

  // Nested announcing thresholds below the cap.
  constexpr int kMaxStage = 10;
  std::vector<bool> stage_hit(kMaxStage + 1, false);

  const std::uint64_t n_steps = static_cast<std::uint64_t>(std::llround(config.horizon / config.dt));

  record_state(0.0);
  take_snapshots(0.0);
  if (observer) observer(0, 0.0, u);
  rec.status = RunStatus::ReachedHorizon;

  for (std::uint64_t step = 0; step < n_steps; ++step) {
    SpectralField dw(config.resolution, 2);
    if (noisy) dw = sample_increment(driver, config.noise, config.resolution, step);
    u = eulerian_step(u, dw, config.dt, grid);
    const double t = static_cast<double>(step + 1) * config.dt;
    if (observer) observer(step + 1, t, u);

    if (!finite_field(u)) {
      rec.status = RunStatus::NumericalBlowup;
      rec.blowup_step = step;
      break;
    }

    const double norm_cap = sobolev_norm(u, s_cap);
    for (int n = 2; n <= kMaxStage; ++n) {
      if (!stage_hit[n] && norm_cap >= cap * (1.0 - 1.0 / n)) {
        stage_hit[n] = true;
        rec.announcing_times.emplace_back(n, t);
      }
    }
    if (norm_cap >= cap) {
      rec.status = RunStatus::CapExit;
      rec.exit_time = t;
      for (int n = kMaxStage; n >= 2; --n)
        if (stage_hit[n]) {
          rec.exit_stage = n;
          break;
        }
      record_state(t);
      take_snapshots(t);
      break;
    }

    if ((step + 1) % static_cast<std::uint64_t>(config.stride) == 0 || step + 1 == n_steps)
      record_state(t);
    take_snapshots(t);
  }

  rec.final_state = u;
  return rec;
}

namespace {

// Ordinary least squares y ~ a + b t; returns b.
double ols_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (t[i] - mt) * (t[i] - mt);
    sxy += (t[i] - mt) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

EnergyBalance energy_balance_estimate(const EulerianRunConfig& config, int n_paths) {
  if (n_paths < 2) throw std::invalid_argument("energy_balance_estimate: need at least 2 paths");

  EnergyBalance out;
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(n_paths));

  for (int p = 0; p < n_paths; ++p) {
    EulerianRunConfig c = config;
    c.path = static_cast<std::uint64_t>(p);
    const SolutionRecord rec = run_eulerian(c);
    if (rec.status != RunStatus::ReachedHorizon) {
      ++out.paths_excluded;
      continue;
    }
    slopes.push_back(ols_slope(rec.times, rec.energy));
    if (out.mean_energy.empty()) {
      out.times = rec.times;
      out.mean_energy.assign(rec.energy.size(), 0.0);
    }
    for (std::size_t i = 0; i < rec.energy.size(); ++i) out.mean_energy[i] += rec.energy[i];
  }

  out.paths_used = static_cast<int>(slopes.size());
  if (out.paths_used < 2)
    throw std::runtime_error("energy_balance_estimate: too many excluded paths");
  for (double& e : out.mean_energy) e /= static_cast<double>(out.paths_used);

  double mean = 0.0;
  for (double s : slopes) mean += s;
  mean /= static_cast<double>(out.paths_used);
  double var = 0.0;
  for (double s : slopes) var += (s - mean) * (s - mean);
  var /= static_cast<double>(out.paths_used - 1);

  out.slope = mean;
  out.std_error = std::sqrt(var / static_cast<double>(out.paths_used));
  return out;
}

RegularityReport regularity_persistence_diagnostic(const EulerianRunConfig& config,
                                                   const std::vector<int>& refinements) {
  if (refinements.size() < 2)
    throw std::invalid_argument("regularity diagnostic: need at least two resolutions");

  RegularityReport report;
  report.resolutions = refinements;
  const double s = config.cap_norm_index;

  std::vector<SolutionRecord> records;
  for (int n : refinements) {
    EulerianRunConfig c = config;
    c.resolution = n;
    c.s_track = {s, s + 1.0};
    const SolutionRecord rec = run_eulerian(c);
    if (rec.status == RunStatus::CapExit) report.capped = true;
    if (rec.times.size() < 2)
      throw std::runtime_error("regularity diagnostic: trajectory exited before first checkpoint");
    records.push_back(rec);
  }

  const std::size_t n_checkpoints = records.front().times.size();
  for (const auto& rec : records)
    if (rec.times.size() != n_checkpoints)
      throw std::runtime_error("regularity diagnostic: trajectory exited before the horizon");

  report.times = records.front().times;
  for (const auto& rec : records) {
    std::vector<double> hs, hs1;
    for (const auto& row : rec.norms) {
      hs.push_back(row[0]);
      hs1.push_back(row[1]);
    }
    report.tracked_norms.push_back(std::move(hs));
    report.higher_norms.push_back(std::move(hs1));
  }

  const auto& coarse = report.higher_norms[report.higher_norms.size() - 2];
  const auto& fine = report.higher_norms.back();
  double worst = 0.0;
  for (std::size_t i = 0; i < n_checkpoints; ++i) {
    const double rel = std::abs(fine[i] - coarse[i]) / std::max(fine[i], 1e-300);
    report.rel_change_last_pair.push_back(rel);
    worst = std::max(worst, rel);
  }
  report.pass = !report.capped && worst < 0.01;
  return report;
}

}  // namespace torusflow
