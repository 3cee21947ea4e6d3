#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "torusflow/eulerian.hpp"
#include "torusflow/fourier_multiplier.hpp"
#include "torusflow/snapshot.hpp"

using namespace torusflow;

namespace {

EulerianRunConfig small_config() {
  EulerianRunConfig cfg;
  cfg.resolution = 16;
  cfg.dt = 1e-3;
  cfg.horizon = 0.1;
  cfg.s_track = {0.0, 2.0};
  cfg.initial_condition = "taylor-green";
  cfg.stride = 10;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("single steps on stationary states stay put") {
  FftGrid grid(16);
  const SpectralField tg = presets::taylor_green(16);
  const SpectralField zero_noise(16, 2);
  const SpectralField next = eulerian_step(tg, zero_noise, 1e-3, grid);
  CHECK(sobolev_norm(next - tg, SobolevIndex(2.0)) <= 1e-13);

  const SpectralField shear = presets::shear(16);
  const SpectralField next_shear = eulerian_step(shear, zero_noise, 1e-3, grid);
  CHECK(sobolev_norm(next_shear - shear, SobolevIndex(2.0)) <= 1e-13);
}

TEST_CASE("a pure-noise step adds exactly the increment") {
  FftGrid grid(16);
  const SpectralField zero(16, 2);
  const NoiseModel model = NoiseModel::power_law(3, 2.0, 2.0);
  const BrownianDriver driver(3, 1e-2);
  const SpectralField dw = sample_increment(driver, model, 16, 0);
  const SpectralField next = eulerian_step(zero, dw, 1e-2, grid);
  CHECK(l2_norm(next - dw) <= 1e-15);
}

TEST_CASE("runs reject invalid configurations") {
  EulerianRunConfig cfg = small_config();
  cfg.cap = 1.0;  // initial Taylor-Green H2 norm is ~2.1
  CHECK_THROWS_AS(run_eulerian(cfg), std::invalid_argument);

  cfg = small_config();
  cfg.dt = -1e-3;
  CHECK_THROWS_AS(run_eulerian(cfg), std::invalid_argument);

  cfg = small_config();
  cfg.noise = NoiseModel::power_law(32, 3.0, 3.0);
  cfg.resolution = 16;
  CHECK_THROWS_AS(run_eulerian(cfg), std::invalid_argument);
}

TEST_CASE("deterministic Taylor-Green run stays on the initial state") {
  EulerianRunConfig cfg = small_config();
  cfg.horizon = 0.2;
  const SolutionRecord rec = run_eulerian(cfg);
  CHECK(rec.status == RunStatus::ReachedHorizon);
  CHECK_FALSE(rec.exit_time.has_value());
  const double h2_0 = rec.norms.front()[1];
  for (const auto& row : rec.norms) CHECK(std::abs(row[1] - h2_0) <= 1e-9 * h2_0);
}

TEST_CASE("momentum mode stays exactly zero along a noisy run") {
  EulerianRunConfig cfg = small_config();
  cfg.noise = NoiseModel::power_law(4, 3.0, 3.0, 0.1);
  SolutionRecord rec;
  bool all_zero_mean = true;
  bool all_div_free = true;
  const StepObserver obs = [&](std::uint64_t, double, const SpectralField& u) {
    all_zero_mean = all_zero_mean && u.has_zero_mean();
    all_div_free = all_div_free && u.divergence_residual() <= 1e-11;
  };
  rec = run_eulerian(cfg, presets::taylor_green(cfg.resolution), obs);
  CHECK(all_zero_mean);
  CHECK(all_div_free);
  CHECK(rec.status == RunStatus::ReachedHorizon);
}

TEST_CASE("same seed reproduces the record bit for bit") {
  EulerianRunConfig cfg = small_config();
  cfg.noise = NoiseModel::power_law(3, 3.0, 3.0, 0.2);
  const SolutionRecord a = run_eulerian(cfg);
  const SolutionRecord b = run_eulerian(cfg);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(std::memcmp(&a.energy[i], &b.energy[i], sizeof(double)) == 0);
    for (std::size_t j = 0; j < a.norms[i].size(); ++j)
      CHECK(std::memcmp(&a.norms[i][j], &b.norms[i][j], sizeof(double)) == 0);
  }
  cfg.path = 1;
  const SolutionRecord c = run_eulerian(cfg);
  CHECK(c.energy.back() != a.energy.back());
}

TEST_CASE("cap exit produces a monotone announcing ladder") {
  EulerianRunConfig cfg = small_config();
  cfg.horizon = 2.0;
  cfg.noise = NoiseModel::power_law(2, 1.0, 2.0, 1.0);
  cfg.initial_condition = "two-mode";
  // low cap so the forced run crosses it quickly
  cfg.cap = 1.05 * sobolev_norm(presets::two_mode(cfg.resolution), SobolevIndex(2.0));

  const SolutionRecord rec = run_eulerian(cfg);
  REQUIRE(rec.status == RunStatus::CapExit);
  REQUIRE(rec.exit_time.has_value());
  REQUIRE_FALSE(rec.announcing_times.empty());

  double prev = 0.0;
  for (const auto& [stage, t] : rec.announcing_times) {
    CHECK(t >= prev);
    CHECK(t <= *rec.exit_time);
    prev = t;
  }
  CHECK(rec.exit_stage.has_value());
  for (double t : rec.times) CHECK(t <= *rec.exit_time + 1e-12);
}

TEST_CASE("numerical blow-up is flagged separately from cap exits") {
  EulerianRunConfig cfg = small_config();
  cfg.dt = 10.0;  // wildly unstable
  cfg.horizon = 100.0;
  cfg.cap = 1e280;
  cfg.initial_condition = "two-mode";
  SpectralField huge = presets::two_mode(cfg.resolution);
  huge *= 1e120;
  const SolutionRecord rec = run_eulerian(cfg, huge);
  CHECK(rec.status == RunStatus::NumericalBlowup);
  CHECK(rec.blowup_step.has_value());
  CHECK_FALSE(rec.exit_time.has_value());
}

TEST_CASE("a stored snapshot can seed a run and reproduces the preset run") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "torusflow_ic.fld").string();
  write_snapshot(presets::two_mode(16), path);

  EulerianRunConfig cfg = small_config();
  cfg.initial_condition = "two-mode";
  const SolutionRecord direct = run_eulerian(cfg);
  cfg.initial_condition = "snapshot:" + path;
  const SolutionRecord seeded = run_eulerian(cfg);
  REQUIRE(direct.times.size() == seeded.times.size());
  for (std::size_t i = 0; i < direct.energy.size(); ++i)
    CHECK(direct.energy[i] == seeded.energy[i]);

  // scalar snapshots are not velocity data
  const std::string bad = (fs::temp_directory_path() / "torusflow_ic_scalar.fld").string();
  SpectralField scalar(8, 1);
  scalar.at(0, 0, 0) = {1.0, 0.0};
  write_snapshot(scalar, bad);
  cfg.initial_condition = "snapshot:" + bad;
  CHECK_THROWS_AS(run_eulerian(cfg), std::invalid_argument);
  fs::remove(path);
  fs::remove(bad);
}

TEST_CASE("zero-noise energy error shrinks at second order in dt") {
  const auto defect = [](double dt) {
    EulerianRunConfig cfg;
    cfg.resolution = 16;
    cfg.dt = dt;
    cfg.horizon = 0.5;
    cfg.s_track = {0.0};
    cfg.initial_condition = "two-mode";
    cfg.stride = 1000000;
    const SolutionRecord rec = run_eulerian(cfg);
    return std::abs(rec.energy.back() - rec.energy.front()) / rec.energy.front();
  };
  const double e1 = defect(4e-3);
  const double e2 = defect(2e-3);
  const double slope = std::log2(e1 / e2);
  CHECK(slope >= 1.9);
}

TEST_CASE("energy balance estimate is near zero without noise") {
  EulerianRunConfig cfg = small_config();
  cfg.horizon = 0.2;
  cfg.initial_condition = "two-mode";
  cfg.stride = 20;
  const EnergyBalance bal = energy_balance_estimate(cfg, 2);
  CHECK(std::abs(bal.slope) <= 1e-8);
  CHECK(bal.paths_excluded == 0);
}

TEST_CASE("energy balance slope doubles when all amplitudes double") {
  EulerianRunConfig cfg;
  cfg.resolution = 8;
  cfg.dt = 2e-3;
  cfg.horizon = 0.2;
  cfg.s_track = {0.0};
  cfg.cap = 100.0;
  cfg.initial_condition = "zero";
  cfg.stride = 10;
  cfg.seed = 11;
  cfg.noise = NoiseModel::power_law(2, 2.0, 2.0, 1.0);
  const EnergyBalance one = energy_balance_estimate(cfg, 32);
  cfg.noise = NoiseModel::power_law(2, 2.0, 2.0, 2.0);
  const EnergyBalance two = energy_balance_estimate(cfg, 32);

  CHECK(std::abs(one.slope - cfg.noise.trace_q() / 2.0) <=
        0.1 * cfg.noise.trace_q() / 2.0 + 5.0 * one.std_error);
  const double se = 2.0 * one.std_error + two.std_error;
  CHECK(std::abs(two.slope - 2.0 * one.slope) <= 0.1 * two.slope + 5.0 * se);
}

TEST_CASE("exiting paths are excluded from the balance estimate and counted") {
  EulerianRunConfig cfg;
  cfg.resolution = 8;
  cfg.dt = 2e-3;
  cfg.horizon = 0.4;
  cfg.s_track = {0.0, 2.0};
  cfg.initial_condition = "two-mode";
  cfg.stride = 20;
  cfg.seed = 7;
  cfg.noise = NoiseModel::power_law(2, 1.0, 2.0, 2.0);
  const SpectralField u0 = presets::two_mode(8);
  cfg.cap = 5.0 * sobolev_norm(u0, SobolevIndex(2.0));

  const EnergyBalance bal = energy_balance_estimate(cfg, 8);
  CHECK(bal.paths_excluded >= 1);
  CHECK(bal.paths_used >= 2);
  CHECK(bal.paths_used + bal.paths_excluded == 8);

  cfg.cap = 1.01 * sobolev_norm(u0, SobolevIndex(2.0));
  CHECK_THROWS_AS(energy_balance_estimate(cfg, 4), std::runtime_error);
}

TEST_CASE("tracked norms agree across resolutions under shared forcing") {
  EulerianRunConfig cfg;
  cfg.resolution = 16;
  cfg.dt = 2e-3;
  cfg.horizon = 0.2;
  cfg.s_track = {2.0};
  cfg.initial_condition = "taylor-green";
  cfg.stride = 20;
  cfg.seed = 5;
  cfg.noise = NoiseModel::power_law(3, 3.0, 3.0, 0.1);
  const SolutionRecord coarse = run_eulerian(cfg);
  cfg.resolution = 32;
  const SolutionRecord fine = run_eulerian(cfg);
  REQUIRE(coarse.times.size() == fine.times.size());
  for (std::size_t i = 0; i < coarse.times.size(); ++i)
    CHECK(std::abs(coarse.norms[i][0] - fine.norms[i][0]) <= 1e-5 * fine.norms[i][0]);
}

TEST_CASE("band-limited data keeps a resolution-independent higher norm") {
  EulerianRunConfig cfg;
  cfg.dt = 2e-3;
  cfg.horizon = 0.1;
  cfg.cap_norm_index = 2.0;
  cfg.stride = 10;
  cfg.initial_condition = "taylor-green";  // band-limited at |k| = 1
  const RegularityReport rep = regularity_persistence_diagnostic(cfg, {8, 16, 32});
  CHECK(rep.pass);
  for (double v : rep.rel_change_last_pair) CHECK(v <= 1e-6);
}

TEST_CASE("borderline spectra show truncation growth, fast tails do not") {
  EulerianRunConfig cfg;
  cfg.dt = 2e-3;
  cfg.horizon = 0.05;
  cfg.cap_norm_index = 2.0;
  cfg.cap = 500.0;
  cfg.stride = 25;
  cfg.initial_condition = "spectral-tail:3";  // exactly critical for H^3
  const RegularityReport critical = regularity_persistence_diagnostic(cfg, {8, 16, 32});
  CHECK_FALSE(critical.pass);
  const double h3_mid = critical.higher_norms[1].back();
  const double h3_fine = critical.higher_norms[2].back();
  CHECK(h3_fine > h3_mid * 1.05);

  cfg.initial_condition = "spectral-tail:3.6";
  const RegularityReport regular = regularity_persistence_diagnostic(cfg, {8, 16, 32});
  const double change = regular.rel_change_last_pair.back();
  CHECK(change < 0.02);
}
