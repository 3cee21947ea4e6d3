#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "torusflow/sde/chart.hpp"
#include "torusflow/sde/integrator.hpp"
#include "torusflow/sde/ito.hpp"
#include "torusflow/sde/problem.hpp"
#include "torusflow/sde/variational.hpp"

using namespace torusflow;
using namespace torusflow::sde;

TEST_CASE("coefficient derivatives pass finite-difference probes") {
  CHECK(probe_diffusion_derivative(problems::circle_rotation(), {1.0, 0.0}) <= 1e-8);
  CHECK(probe_diffusion_derivative(problems::sphere_brownian(), {0.0, 0.0, 1.0}) <= 1e-8);
  CHECK(probe_diffusion_derivative(problems::affine_noise_plane(), {0.3, -0.2}) <= 1e-8);
}

TEST_CASE("trace correction of the circle rotation is -x/2") {
  const SdeProblem circle = problems::circle_rotation();
  for (const Vec& x : {Vec{1.0, 0.0}, Vec{0.6, -0.8}, Vec{0.3, 0.4}}) {
    const Vec corr = trace_correction(circle, x);
    CHECK(corr[0] == doctest::Approx(-0.5 * x[0]).epsilon(1e-14));
    CHECK(corr[1] == doctest::Approx(-0.5 * x[1]).epsilon(1e-14));
  }
}

TEST_CASE("trace correction of sphere noise is -x on the sphere") {
  const SdeProblem sphere = problems::sphere_brownian();
  const Vec x = {0.48, 0.6, 0.64};
  const Vec corr = trace_correction(sphere, x);
  for (int i = 0; i < 3; ++i) CHECK(corr[i] == doctest::Approx(-x[i]).epsilon(1e-12));
}

TEST_CASE("constant diffusion needs no correction and zero noise keeps states") {
  const SdeProblem lin = problems::linear_plane(0.1, 0.3, 0.5);
  const Vec c = stratonovich_correction(lin, {1.0, 2.0});
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.0);

  const SdeProblem circle = problems::circle_rotation();
  const Vec x = {0.6, -0.8};
  const Vec next = sde_step(circle, x, {0.0}, 0.0, false);
  CHECK(next[0] == x[0]);
  CHECK(next[1] == x[1]);
}

TEST_CASE("paths are reproducible and projection keeps the constraint") {
  const SdeProblem circle = problems::circle_rotation();
  const SdePath a = solve_path(circle, {1.0, 0.0}, 99, 0, 1e-3, 500, {});
  const SdePath b = solve_path(circle, {1.0, 0.0}, 99, 0, 1e-3, 500, {});
  for (std::size_t i = 0; i < a.states.size(); ++i)
    CHECK(std::memcmp(a.states[i].data(), b.states[i].data(), 2 * sizeof(double)) == 0);

  double worst = 0.0;
  for (const auto& x : a.states) worst = std::max(worst, std::abs(norm(x) - 1.0));
  CHECK(worst <= 1e-12);

  SolveOptions raw;
  raw.project = false;
  const SdePath c = solve_path(circle, {1.0, 0.0}, 99, 0, 1e-3, 500, raw);
  double drift = 0.0;
  for (const auto& x : c.states) drift = std::max(drift, std::abs(norm(x) - 1.0));
  CHECK(drift > 1e-12);  // the bare scheme wanders off the circle ...
  CHECK(drift <= 0.05);  // ... but stays within the scheme-error band
}

TEST_CASE("internal correction equals the explicit Ito drift bit for bit") {
  // on the circle both readings perform identical arithmetic
  const SdeProblem strat = problems::circle_rotation();
  const SdeProblem ito = problems::circle_rotation_ito();
  const NoiseRecord rec(3, 0, 1, 1e-3, 512);
  const SdePath a = solve_path(strat, {1.0, 0.0}, rec, 512, {});
  const SdePath b = solve_path(ito, {1.0, 0.0}, rec, 512, {});
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i][0] == b.states[i][0]);
    CHECK(a.states[i][1] == b.states[i][1]);
  }
}

TEST_CASE("the two discretizations of the same dynamics approach each other") {
  const SdeProblem strat = problems::circle_rotation();
  const SdeProblem ito = problems::circle_rotation_ito();
  std::vector<double> devs;
  for (int level : {3, 1}) {
    double ms = 0.0;
    for (int p = 0; p < 8; ++p) {
      const NoiseRecord rec(19, p, 1, 2.5e-4, 4096);
      SolveOptions trap;
      trap.noise_level = level;
      SolveOptions em = trap;
      em.scheme = SdeScheme::EulerMaruyama;
      const SdePath a = solve_path(strat, {1.0, 0.0}, rec, rec.steps(level), trap);
      const SdePath b = solve_path(ito, {1.0, 0.0}, rec, rec.steps(level), em);
      double dev = 0.0;
      for (std::size_t i = 0; i < a.states.size(); ++i)
        dev = std::max(dev, norm(a.states[i] - b.states[i]));
      ms += dev * dev / 8.0;
    }
    devs.push_back(std::sqrt(ms));
  }
  CHECK(devs[0] / devs[1] >= std::pow(2.0, 2 * 0.45));  // order >= 0.45 over two octaves
}

TEST_CASE("noise records aggregate fine increments exactly") {
  const NoiseRecord rec(5, 3, 2, 1e-3, 64);
  for (int level : {1, 2, 3}) {
    const std::size_t span = std::size_t{1} << level;
    for (std::size_t s = 0; s < rec.steps(level); ++s) {
      Vec sum(2, 0.0);
      for (std::size_t f = s * span; f < (s + 1) * span; ++f) {
        const Vec fine = rec.increment(0, f);
        sum[0] += fine[0];
        sum[1] += fine[1];
      }
      const Vec coarse = rec.increment(level, s);
      CHECK(coarse[0] == doctest::Approx(sum[0]).epsilon(1e-15));
      CHECK(coarse[1] == doctest::Approx(sum[1]).epsilon(1e-15));
    }
  }
  CHECK(rec.dt(2) == doctest::Approx(4e-3));
  CHECK_THROWS_AS(rec.increment(0, 64), std::out_of_range);
}

TEST_CASE("deterministic ladder hits the nested shells on schedule") {
  const SdeProblem drift = problems::interval_unit_drift();
  const double dt = 1e-4;
  const LadderRun run = solve_with_ladder(drift, {0.0}, 1, 0, dt, 2.0);
  REQUIRE(run.ladder.exit_time.has_value());
  CHECK(*run.ladder.exit_time == doctest::Approx(1.0).epsilon(1e-3));
  double prev = 0.0;
  for (int n = 2; n <= 10; ++n) {
    const auto hit = run.ladder.hit_of_stage(n);
    REQUIRE(hit.has_value());
    CHECK(std::abs(*hit - (1.0 - 1.0 / n)) <= dt + 1e-12);
    CHECK(*hit >= prev);
    CHECK(*hit < *run.ladder.exit_time);
    prev = *hit;
  }
  CHECK_THROWS_AS(solve_with_ladder(drift, {2.0}, 1, 0, dt, 1.0), std::invalid_argument);
}

TEST_CASE("random ladders stay monotone and announce the exit") {
  const SdeProblem bm = problems::interval_brownian();
  for (int p = 0; p < 10; ++p) {
    const LadderRun run = solve_with_ladder(bm, {0.0}, 77, p, 1e-3, 30.0);
    REQUIRE(run.ladder.exit_time.has_value());
    double prev = 0.0;
    for (std::size_t i = 0; i < run.ladder.stage.size(); ++i) {
      CHECK(run.ladder.hit_time[i] >= prev);
      CHECK(run.ladder.hit_time[i] <= *run.ladder.exit_time);
      prev = run.ladder.hit_time[i];
    }
    // every shell is announced by the time the path exits
    CHECK(run.ladder.stage.size() == 10);
  }
}

TEST_CASE("brownian exit times agree with the classical mean") {
  const SdeProblem bm = problems::interval_brownian();
  const int n_paths = 2000;
  double mean = 0.0;
  for (int p = 0; p < n_paths; ++p)
    mean += sample_exit_time(bm, {0.0}, 31, p, 1e-3, 30.0) / n_paths;
  // E tau = 1 - x0^2 = 1; allow discretization bias plus statistics
  CHECK(mean == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("cutoff dynamics match the plain dynamics on the clean prefix") {
  const SdeProblem bm = problems::interval_brownian();
  for (int p = 0; p < 10; ++p) {
    const CutoffComparison cmp = compare_cutoff(bm, 4, {0.0}, 17, p, 1e-3, 4.0);
    CHECK(cmp.max_divergence <= 1e-12);
    CHECK(cmp.clean_steps > 0);
  }

  const double lo = 1.0 / 8.0, hi = 1.0 / 4.0;
  CHECK(cutoff_bump(hi, 4) == 1.0);
  CHECK(cutoff_bump(hi + 0.3, 4) == 1.0);
  CHECK(cutoff_bump(lo, 4) == 0.0);
  CHECK(cutoff_bump(0.0, 4) == 0.0);
  const double mid = cutoff_bump(0.5 * (lo + hi), 4);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("stereographic chart derivatives match finite differences") {
  for (const Chart& chart : {stereographic_north(), stereographic_south()}) {
    const Vec p = {0.6, -0.64, 0.48};
    const Vec y = chart.to_chart(p);
    const Vec back = chart.from_chart(y);
    for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(p[i]).epsilon(1e-12));

    // jacobian of to_chart
    const double eps = 1e-6;
    const Mat j = chart.jacobian(p);
    for (int col = 0; col < 3; ++col) {
      Vec pp = p, pm = p;
      pp[col] += eps;
      pm[col] -= eps;
      const Vec fp = chart.to_chart(pp);
      const Vec fm = chart.to_chart(pm);
      for (int row = 0; row < 2; ++row)
        CHECK(j(row, col) == doctest::Approx((fp[row] - fm[row]) / (2 * eps)).epsilon(1e-6));
    }

    // jacobian of from_chart
    const Mat ji = chart.inverse_jacobian(y);
    for (int col = 0; col < 2; ++col) {
      Vec yp = y, ym = y;
      yp[col] += eps;
      ym[col] -= eps;
      const Vec fp = chart.from_chart(yp);
      const Vec fm = chart.from_chart(ym);
      for (int row = 0; row < 3; ++row)
        CHECK(ji(row, col) == doctest::Approx((fp[row] - fm[row]) / (2 * eps)).epsilon(1e-6));
    }

    // chain rule: Dpsi(p) Dpsi_inv(y) = I
    const Mat prod = matmul(j, ji);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        CHECK(prod(r, c) == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-12));

    // hessian action vs differentiated jacobian
    const Vec v = {0.3, 0.1, -0.2};
    const Mat ha = chart.hessian_action(p, v);
    Vec pp = p, pm = p;
    axpy(eps, v, pp);
    axpy(-eps, v, pm);
    const Mat jp = chart.jacobian(pp);
    const Mat jm = chart.jacobian(pm);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c)
        CHECK(ha(r, c) == doctest::Approx((jp(r, c) - jm(r, c)) / (2 * eps)).epsilon(1e-5));
  }
}

TEST_CASE("pushed-forward coefficients pass derivative probes") {
  const SdeProblem in_chart = push_forward(problems::sphere_brownian(), stereographic_north());
  CHECK(probe_diffusion_derivative(in_chart, {0.4, -0.3}, 6, 1e-6) <= 1e-7);
}

TEST_CASE("deterministic rotation agrees between chart and ambient at second order") {
  // tilted axis, so the chart does not conjugate the flow to a linear map
  const SdeProblem rotation = problems::sphere_rotation({0.4, 0.3, 1.4});
  const Chart chart = stereographic_north();
  Vec x0 = {0.8, 0.0, -0.6};

  const auto deviation_at = [&](double dt, std::size_t steps) {
    const NoiseRecord rec(1, 0, 1, dt, steps);
    return chart_consistency(rotation, chart, x0, rec, 0, steps).max_deviation;
  };
  const double d1 = deviation_at(2e-3, 500);
  const double d2 = deviation_at(1e-3, 1000);
  CHECK(d1 / d2 >= 3.0);  // order two
  CHECK(d1 <= 1e-4);
}

TEST_CASE("identity chart reproduces a planar problem exactly") {
  Chart id;
  id.name = "identity";
  id.domain_radius = 100.0;
  id.to_chart = [](const Vec& p) { return p; };
  id.from_chart = [](const Vec& y) { return y; };
  id.jacobian = [](const Vec&) { return Mat::identity(2); };
  id.inverse_jacobian = [](const Vec&) { return Mat::identity(2); };
  id.hessian_action = [](const Vec&, const Vec&) { return Mat(2, 2); };

  const SdeProblem plane = problems::affine_noise_plane();
  const NoiseRecord rec(8, 0, 2, 1e-3, 200);
  const ChartComparison cmp = chart_consistency(plane, id, {0.2, -0.1}, rec, 0, 200);
  CHECK(cmp.max_deviation == 0.0);
}

TEST_CASE("sphere noise agrees between chart and ambient at half order") {
  const SdeProblem sphere = problems::sphere_brownian();
  const Chart chart = stereographic_north();
  const Vec x0 = {0.0, 0.0, -1.0};  // chart origin

  std::vector<double> log_dt, log_dev;
  for (int level = 3; level >= 1; --level) {
    double acc = 0.0;
    const int n_paths = 8;
    for (int p = 0; p < n_paths; ++p) {
      const NoiseRecord rec(23, p, 3, 2.5e-4, 2048);
      const double d =
          chart_consistency(sphere, chart, x0, rec, level, rec.steps(level)).max_deviation;
      acc += d * d / n_paths;
    }
    log_dt.push_back(std::log2(2.5e-4 * (1 << level)));
    log_dev.push_back(0.5 * std::log2(acc));
  }
  const double slope = (log_dev.front() - log_dev.back()) / (log_dt.front() - log_dt.back());
  CHECK(slope >= 0.45);
}

TEST_CASE("leaving the chart ball is an error naming the failure") {
  // a rotation about the x-axis from this start runs into the north cap
  const SdeProblem rotation = problems::sphere_rotation({3.0, 0.0, 0.0});
  const Chart chart = stereographic_north();
  const NoiseRecord rec(2, 0, 1, 1e-3, 2000);
  CHECK_THROWS_AS(chart_consistency(rotation, chart, {0.0, 0.8, 0.6}, rec, 0, 2000),
                  std::runtime_error);
}

TEST_CASE("a diverging derivative is flagged") {
  // exponential growth overflows well before the horizon
  SdeProblem stiff = problems::linear_plane(80.0, 0.0, 0.0);
  const NoiseRecord rec(2, 0, 2, 0.5, 4096);
  CHECK_THROWS_AS(variational_derivative(stiff, {1.0, 0.0}, {1.0, 0.0}, rec, 0, 4096),
                  std::runtime_error);
}

TEST_CASE("glued two-chart paths follow the ambient reference") {
  // rotation about the x-axis crosses both polar caps repeatedly
  const SdeProblem rotation = problems::sphere_rotation({2.0, 0.0, 0.0});
  const Chart north = stereographic_north();
  const Chart south = stereographic_south();
  const Vec x0 = {0.0, 0.8, 0.6};

  const auto run_at = [&](double dt, std::size_t steps) {
    const NoiseRecord rec(4, 0, 1, dt, steps);
    return glue_charts(rotation, north, south, x0, rec, 0, steps, 2.0);
  };
  const GluedRun coarse = run_at(2e-3, 3000);
  const GluedRun fine = run_at(1e-3, 6000);
  CHECK(coarse.switches >= 2);
  CHECK(coarse.max_deviation_vs_reference / fine.max_deviation_vs_reference >= 3.0);

  // a path that never leaves the starting chart matches the single-chart solve
  const SdeProblem slow = problems::sphere_rotation({0.0, 0.0, 1.0});
  const NoiseRecord rec(4, 0, 1, 1e-3, 100);
  const GluedRun glued = glue_charts(slow, north, south, {0.9, 0.0, -std::sqrt(1 - 0.81)}, rec, 0,
                                     100, 2.0);
  CHECK(glued.switches == 0);

  // different switch schedules stay within a small multiple of the scheme error
  const GluedRun early = [&] {
    const NoiseRecord r(4, 0, 1, 2e-3, 3000);
    return glue_charts(rotation, north, south, x0, r, 0, 3000, 1.2);
  }();
  double sched_dev = 0.0;
  for (std::size_t i = 0; i < coarse.embedded_states.size(); ++i)
    sched_dev = std::max(sched_dev, norm(coarse.embedded_states[i] - early.embedded_states[i]));
  const double tol = 10.0 * std::max(coarse.max_deviation_vs_reference,
                                     early.max_deviation_vs_reference);
  CHECK(sched_dev <= tol);
}

TEST_CASE("chain-rule residuals: exact cases") {
  // linear observable, additive noise, no drift: every term is exact
  const SdeProblem flat = problems::linear_plane(0.0, 0.0, 0.7);
  const NoiseRecord rec(6, 0, 2, 1e-3, 1000);
  const SdePath path = solve_path(flat, {0.1, 0.2}, rec, 1000, {});
  const Observable lin = observables::linear({0.4, -1.1});
  const auto res = ito_residual_series(flat, path, lin);
  double worst = 0.0;
  for (double v : res) worst = std::max(worst, std::abs(v));
  CHECK(worst <= 1e-12);

  // constraint observable on the projected circle: both sides constant
  const SdeProblem circle = problems::circle_rotation();
  const NoiseRecord rec2(7, 0, 1, 1e-3, 1000);
  const SdePath path2 = solve_path(circle, {1.0, 0.0}, rec2, 1000, {});
  const auto res2 = ito_residual_series(circle, path2, observables::squared_norm(2));
  worst = 0.0;
  for (double v : res2) worst = std::max(worst, std::abs(v));
  CHECK(worst <= 1e-10);
}

TEST_CASE("chain-rule residual shrinks at half order on a generic problem") {
  const SdeProblem generic = problems::affine_noise_plane();
  const Observable cubic = observables::generic_cubic();
  CHECK(probe_observable(cubic, {0.3, -0.2}) <= 1e-8);

  // root-mean-square over coupled paths; the residual is a martingale sum
  // of size O(sqrt(dt)), so the fitted order sits at 1/2 up to estimator
  // noise
  std::vector<double> devs;
  for (int level : {3, 2, 1, 0}) {
    double acc = 0.0;
    const int n_paths = 128;
    for (int p = 0; p < n_paths; ++p) {
      const NoiseRecord rec(9, p, 2, 1.25e-4, 4096);
      SolveOptions opts;
      opts.noise_level = level;
      const SdePath path = solve_path(generic, {0.4, -0.3}, rec, rec.steps(level), opts);
      const auto res = ito_residual_series(generic, path, cubic);
      acc += res.back() * res.back() / n_paths;
    }
    devs.push_back(std::sqrt(acc));
  }
  const double slope = std::log2(devs.front() / devs.back()) / 3.0;
  CHECK(slope >= 0.45);
}

TEST_CASE("variational runs are linear in the direction and exact for h = 0") {
  const SdeProblem sphere = problems::sphere_brownian_ito();
  const NoiseRecord rec(12, 0, 3, 1e-3, 200);
  Vec x0 = {0.0, 0.6, 0.8};

  const VariationalRun zero = variational_derivative(sphere, x0, {0.0, 0.0, 0.0}, rec, 0, 200);
  for (const auto& a : zero.derivative)
    for (double v : a) CHECK(v == 0.0);

  const Vec h = {0.25, -0.5, 0.125};
  const VariationalRun one = variational_derivative(sphere, x0, h, rec, 0, 200);
  const VariationalRun two = variational_derivative(sphere, x0, 2.0 * h, rec, 0, 200);
  for (std::size_t i = 0; i < one.derivative.size(); ++i)
    for (int k = 0; k < 3; ++k)
      CHECK(two.derivative[i][k] == 2.0 * one.derivative[i][k]);  // doubling is exact
}

TEST_CASE("linear problems reproduce the closed-form derivative flow") {
  const double a = 0.4, w = 0.9, s = 0.3;
  const SdeProblem lin = problems::linear_plane(a, w, s);
  const NoiseRecord rec(13, 0, 2, 1e-3, 1000);
  const Vec h = {1.0, -0.5};
  const VariationalRun run = variational_derivative(lin, {0.2, 0.1}, h, rec, 0, 1000);
  const double ca = std::exp(a) * std::cos(w), sa = std::exp(a) * std::sin(w);
  const Vec expected = {ca * h[0] - sa * h[1], sa * h[0] + ca * h[1]};
  CHECK(norm(run.derivative.back() - expected) <= 1e-5);
}

TEST_CASE("finite differences converge linearly to the co-integrated derivative") {
  const SdeProblem sphere = problems::sphere_brownian_ito();
  const NoiseRecord rec(14, 0, 3, 1e-3, 300);
  Vec x0 = {0.48, 0.64, 0.6};
  const Vec h = {0.2, -0.1, 0.05};
  const double r2 = finite_difference_residual(sphere, x0, h, 1e-2, rec, 0, 300);
  const double r3 = finite_difference_residual(sphere, x0, h, 1e-3, rec, 0, 300);
  const double slope = std::log10(r2 / r3);
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.2);

  const SdeProblem strat = problems::sphere_brownian();  // not the Ito reading
  CHECK_THROWS_AS(variational_derivative(strat, x0, h, rec, 0, 10), std::invalid_argument);
}
