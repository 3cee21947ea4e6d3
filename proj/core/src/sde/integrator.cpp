#include "torusflow/sde/integrator.hpp"

#include <cmath>
#include <stdexcept>

namespace torusflow::sde {

NoiseRecord::NoiseRecord(std::uint64_t seed, std::uint64_t path, int noise_dim, double dt_fine,
                         std::size_t n_fine)
    : dim_(noise_dim), dt_fine_(dt_fine), n_fine_(n_fine) {
  if (!(dt_fine > 0.0)) throw std::invalid_argument("NoiseRecord: dt must be > 0");
  const CounterRng rng(seed);
  const double scale = std::sqrt(dt_fine);
  fine_.resize(n_fine * static_cast<std::size_t>(dim_));
  for (std::size_t s = 0; s < n_fine; ++s)
    for (int j = 0; j < dim_; ++j)
      fine_[s * dim_ + j] = scale * rng.gaussian(path, s, static_cast<std::uint32_t>(j));
}

Vec NoiseRecord::increment(int level, std::size_t step) const {
  const std::size_t span = std::size_t{1} << level;
  const std::size_t first = step * span;
  if ((first + span) > n_fine_) throw std::out_of_range("NoiseRecord: step out of range");
  Vec out(static_cast<std::size_t>(dim_), 0.0);
  for (std::size_t s = first; s < first + span; ++s)
    for (int j = 0; j < dim_; ++j) out[static_cast<std::size_t>(j)] += fine_[s * dim_ + j];
  return out;
}

Vec trace_correction(const SdeProblem& p, const Vec& x) {
  Vec corr(static_cast<std::size_t>(p.state_dim), 0.0);
  const Mat sigma = p.diffusion(x);
  for (int j = 0; j < p.noise_dim; ++j) {
    const Vec sj = column(sigma, j);
    const Mat ds = p.diffusion_derivative(x, sj);
    for (int i = 0; i < p.state_dim; ++i) corr[static_cast<std::size_t>(i)] += 0.5 * ds(i, j);
  }
  return corr;
}

Vec stratonovich_correction(const SdeProblem& p, const Vec& x) {
  if (p.ito_form || p.constant_diffusion) return Vec(static_cast<std::size_t>(p.state_dim), 0.0);
  return trace_correction(p, x);
}

namespace {

Vec effective_drift(const SdeProblem& p, const Vec& x) {
  Vec b = p.drift(x);
  if (!p.ito_form && !p.constant_diffusion) {
    const Vec corr = stratonovich_correction(p, x);
    axpy(1.0, corr, b);
  }
  return b;
}

}  // namespace

Vec sde_step(const SdeProblem& p, const Vec& x, const Vec& db, double dt, bool project,
             StepTrace* trace) {
  const Vec k1 = effective_drift(p, x);
  const Mat sigma = p.diffusion(x);
  const Vec noise = matvec(sigma, db);

  Vec predictor = x;
  axpy(dt, k1, predictor);
  axpy(1.0, noise, predictor);

  const Vec k2 = effective_drift(p, predictor);

  Vec next = x;
  axpy(0.5 * dt, k1, next);
  axpy(0.5 * dt, k2, next);
  axpy(1.0, noise, next);

  if (project && p.project) next = p.project(next);

  if (trace) {
    trace->evaluation_points.clear();
    trace->evaluation_points.push_back(x);
    trace->evaluation_points.push_back(predictor);
  }
  for (double v : next)
    if (!std::isfinite(v)) throw std::runtime_error("sde_step: state left the numeric range");
  return next;
}

Vec sde_step_euler(const SdeProblem& p, const Vec& x, const Vec& db, double dt, bool project) {
  Vec next = x;
  axpy(dt, effective_drift(p, x), next);
  axpy(1.0, matvec(p.diffusion(x), db), next);
  if (project && p.project) next = p.project(next);
  for (double v : next)
    if (!std::isfinite(v)) throw std::runtime_error("sde_step_euler: state left the numeric range");
  return next;
}

namespace {

template <typename IncrementFn>
SdePath solve_generic(const SdeProblem& p, const Vec& x0, double dt, std::size_t n_steps,
                      const SolveOptions& options, IncrementFn&& incr) {
  SdePath path;
  path.dt = dt;
  path.times.reserve(n_steps + 1);
  path.states.reserve(n_steps + 1);
  path.increments.reserve(n_steps);
  path.times.push_back(0.0);
  path.states.push_back(x0);
  Vec x = x0;
  for (std::size_t s = 0; s < n_steps; ++s) {
    const Vec db = incr(s);
    x = options.scheme == SdeScheme::Trapezoidal ? sde_step(p, x, db, dt, options.project)
                                                 : sde_step_euler(p, x, db, dt, options.project);
    path.increments.push_back(db);
    path.times.push_back(static_cast<double>(s + 1) * dt);
    path.states.push_back(x);
  }
  return path;
}

}  // namespace

SdePath solve_path(const SdeProblem& p, const Vec& x0, const NoiseRecord& noise,
                   std::size_t n_steps, const SolveOptions& options) {
  if (noise.noise_dim() != p.noise_dim)
    throw std::invalid_argument("solve_path: noise dimension mismatch");
  const double dt = noise.dt(options.noise_level);
  return solve_generic(p, x0, dt, n_steps, options,
                       [&](std::size_t s) { return noise.increment(options.noise_level, s); });
}

SdePath solve_path(const SdeProblem& p, const Vec& x0, std::uint64_t seed, std::uint64_t path_id,
                   double dt, std::size_t n_steps, const SolveOptions& options) {
  const CounterRng rng(seed);
  const double scale = std::sqrt(dt);
  return solve_generic(p, x0, dt, n_steps, options, [&](std::size_t s) {
    Vec db(static_cast<std::size_t>(p.noise_dim));
    for (int j = 0; j < p.noise_dim; ++j)
      db[static_cast<std::size_t>(j)] = scale * rng.gaussian(path_id, s, static_cast<std::uint32_t>(j));
    return db;
  });
}

std::optional<double> StoppingLadder::hit_of_stage(int n) const {
  for (std::size_t i = 0; i < stage.size(); ++i)
    if (stage[i] == n) return hit_time[i];
  return std::nullopt;
}

LadderRun solve_with_ladder(const SdeProblem& p, const Vec& x0, std::uint64_t seed,
                            std::uint64_t path_id, double dt, double horizon, int stages,
                            const SolveOptions& options) {
  if (!p.has_domain()) throw std::invalid_argument("solve_with_ladder: problem has no domain");
  if (p.boundary_distance(x0) <= 0.0)
    throw std::invalid_argument("solve_with_ladder: initial state outside the domain");

  const CounterRng rng(seed);
  const double scale = std::sqrt(dt);
  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));

  LadderRun run;
  run.path.dt = dt;
  run.path.times.push_back(0.0);
  run.path.states.push_back(x0);

  std::vector<bool> hit(static_cast<std::size_t>(stages) + 1, false);
  const auto check_ladder = [&](const Vec& x, double t) {
    const double d = p.boundary_distance(x);
    for (int n = 1; n <= stages; ++n)
      if (!hit[static_cast<std::size_t>(n)] && d <= 1.0 / n) {
        hit[static_cast<std::size_t>(n)] = true;
        run.ladder.stage.push_back(n);
        run.ladder.hit_time.push_back(t);
      }
    return d <= 0.0;
  };
  check_ladder(x0, 0.0);

  Vec x = x0;
  for (std::size_t s = 0; s < n_steps; ++s) {
    Vec db(static_cast<std::size_t>(p.noise_dim));
    for (int j = 0; j < p.noise_dim; ++j)
      db[static_cast<std::size_t>(j)] = scale * rng.gaussian(path_id, s, static_cast<std::uint32_t>(j));
    x = sde_step(p, x, db, dt, options.project);
    const double t = static_cast<double>(s + 1) * dt;
    run.path.increments.push_back(db);
    run.path.times.push_back(t);
    run.path.states.push_back(x);
    if (check_ladder(x, t)) {
      run.ladder.exit_time = t;
      break;
    }
  }
  return run;
}

double sample_exit_time(const SdeProblem& p, const Vec& x0, std::uint64_t seed,
                        std::uint64_t path_id, double dt, double horizon,
                        const SolveOptions& options) {
  if (!p.has_domain()) throw std::invalid_argument("sample_exit_time: problem has no domain");
  const CounterRng rng(seed);
  const double scale = std::sqrt(dt);
  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
  Vec x = x0;
  Vec db(static_cast<std::size_t>(p.noise_dim));
  for (std::size_t s = 0; s < n_steps; ++s) {
    for (int j = 0; j < p.noise_dim; ++j)
      db[static_cast<std::size_t>(j)] = scale * rng.gaussian(path_id, s, static_cast<std::uint32_t>(j));
    x = sde_step(p, x, db, dt, options.project);
    if (p.boundary_distance(x) <= 0.0) return static_cast<double>(s + 1) * dt;
  }
  return horizon;
}

double cutoff_bump(double distance, int stage) {
  const double lo = 1.0 / (2.0 * stage);
  const double hi = 1.0 / stage;
  const double t = (distance - lo) / (hi - lo);
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double e1 = std::exp(-1.0 / t);
  const double e2 = std::exp(-1.0 / (1.0 - t));
  return e1 / (e1 + e2);
}

SdeProblem cutoff_problem(const SdeProblem& p, int stage) {
  if (!p.has_domain()) throw std::invalid_argument("cutoff_problem: problem has no domain");
  SdeProblem cut = p;
  cut.name = p.name + "-cut";
  const auto bump = [p, stage](const Vec& x) { return cutoff_bump(p.boundary_distance(x), stage); };
  cut.drift = [p, bump](const Vec& x) { return bump(x) * p.drift(x); };
  cut.diffusion = [p, bump](const Vec& x) {
    Mat s = p.diffusion(x);
    const double phi = bump(x);
    for (auto& v : s.a) v *= phi;
    return s;
  };
  cut.diffusion_derivative = [p, bump](const Vec& x, const Vec& h) {
    // product rule; the bump gradient is resolved by central differences
    const double phi = bump(x);
    Mat ds = p.diffusion_derivative(x, h);
    for (auto& v : ds.a) v *= phi;
    const double eps = 1e-6;
    Vec xp = x, xm = x;
    axpy(eps, h, xp);
    axpy(-eps, h, xm);
    const double dphi = (bump(xp) - bump(xm)) / (2.0 * eps);
    if (dphi != 0.0) {
      const Mat s = p.diffusion(x);
      for (std::size_t i = 0; i < ds.a.size(); ++i) ds.a[i] += dphi * s.a[i];
    }
    return ds;
  };
  cut.constant_diffusion = false;
  return cut;
}

CutoffComparison compare_cutoff(const SdeProblem& p, int stage, const Vec& x0,
                                std::uint64_t seed, std::uint64_t path_id, double dt,
                                double horizon, const SolveOptions& options) {
  const SdeProblem cut = cutoff_problem(p, stage);
  const CounterRng rng(seed);
  const double scale = std::sqrt(dt);
  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));

  CutoffComparison cmp;
  Vec xp = x0, xc = x0;
  bool ladder_hit_found = false;
  // margin keeps the finite-difference probes of the bump gradient on the plateau
  const double margin = 1.0 / stage + 2e-6;

  for (std::size_t s = 0; s < n_steps; ++s) {
    Vec db(static_cast<std::size_t>(p.noise_dim));
    for (int j = 0; j < p.noise_dim; ++j)
      db[static_cast<std::size_t>(j)] = scale * rng.gaussian(path_id, s, static_cast<std::uint32_t>(j));

    StepTrace trace;
    const Vec xp_next = sde_step(p, xp, db, dt, options.project, &trace);
    const Vec xc_next = sde_step(cut, xc, db, dt, options.project);

    bool clean = p.boundary_distance(xp_next) > margin;
    for (const Vec& q : trace.evaluation_points) clean = clean && p.boundary_distance(q) > margin;

    xp = xp_next;
    xc = xc_next;
    if (!ladder_hit_found && p.boundary_distance(xp) <= 1.0 / stage) {
      cmp.ladder_hit = static_cast<double>(s + 1) * dt;
      ladder_hit_found = true;
    }
    if (!clean) break;
    cmp.clean_steps = s + 1;
    cmp.max_divergence = std::max(cmp.max_divergence, norm(xp - xc));
  }
  if (!ladder_hit_found) cmp.ladder_hit = horizon;
  return cmp;
}

}  // namespace torusflow::sde
