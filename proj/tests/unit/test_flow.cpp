#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torusflow/eulerian.hpp"
#include "torusflow/flow_map.hpp"
#include "torusflow/presets.hpp"

using namespace torusflow;

namespace {

// max torus distance between the flow map and a closed-form map
double map_error(const FlowMap& flow, const std::function<Vec2(const Vec2&)>& reference) {
  double worst = 0.0;
  const int m = flow.grid_resolution();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Vec2 got = flow.position(i, j);
      const Vec2 want = reference(flow.grid_point(i, j));
      const double dx = angle_difference(got.x, want.x);
      const double dy = angle_difference(got.y, want.y);
      worst = std::max(worst, std::sqrt(dx * dx + dy * dy));
    }
  return worst;
}

VelocityPath noisy_path(int resolution, double dt, double horizon, double amplitude,
                        std::uint64_t seed) {
  EulerianRunConfig cfg;
  cfg.resolution = resolution;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.s_track = {2.0};
  cfg.initial_condition = "taylor-green";
  cfg.stride = 100000;
  cfg.seed = seed;
  cfg.noise = NoiseModel::power_law(3, 3.0, 3.0, amplitude);
  VelocityPath path(0.0, dt);
  run_eulerian(cfg, presets::taylor_green(resolution),
               [&](std::uint64_t, double, const SpectralField& u) { path.append(u); });
  return path;
}

}  // namespace

TEST_CASE("zero velocity leaves the particle grid in place") {
  const VelocityPath path = VelocityPath::steady(SpectralField(8, 2));
  const FlowMap flow = advance_flow(FlowMap::identity(16), path, 0.0, 1.0, 0.1);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      CHECK(flow.displacement(i, j).x == 0.0);
      CHECK(flow.displacement(i, j).y == 0.0);
    }
}

TEST_CASE("constant drift is integrated exactly") {
  const VelocityPath path = VelocityPath::steady(presets::constant_velocity(8, 0.3, -0.7));
  const double t = 1.0;
  const FlowMap flow = advance_flow(FlowMap::identity(16), path, 0.0, t, 0.05);
  const double err = map_error(flow, [&](const Vec2& x) {
    return Vec2{x.x + t * 0.3, x.y - t * 0.7};
  });
  CHECK(err <= 1e-13);
}

TEST_CASE("steady shear has closed-form characteristics") {
  // y is conserved along the shear, so the particle update is exact
  const VelocityPath path = VelocityPath::steady(presets::shear(8));
  const double t = 1.0;
  const FlowMap flow = advance_flow(FlowMap::identity(32), path, 0.0, t, 0.1);
  const double err = map_error(flow, [&](const Vec2& x) {
    return Vec2{x.x + t * std::cos(x.y), x.y};
  });
  CHECK(err <= 1e-12);
}

TEST_CASE("particle integration self-converges at fourth order") {
  const VelocityPath path = VelocityPath::steady(presets::taylor_green(8));
  const auto flow_at = [&](double dt) {
    return advance_flow(FlowMap::identity(16), path, 0.0, 0.5, dt);
  };
  const FlowMap a = flow_at(0.05);
  const FlowMap b = flow_at(0.025);
  const FlowMap c = flow_at(0.0125);
  const auto gap = [](const FlowMap& f, const FlowMap& g) {
    double worst = 0.0;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        worst = std::max(worst, std::abs(f.displacement(i, j).x - g.displacement(i, j).x));
        worst = std::max(worst, std::abs(f.displacement(i, j).y - g.displacement(i, j).y));
      }
    return worst;
  };
  const double order = std::log2(gap(a, b) / gap(b, c));
  CHECK(order >= 3.8);
}

TEST_CASE("group property: advancing in two legs equals one leg") {
  const VelocityPath path = VelocityPath::steady(presets::taylor_green(8));
  const FlowMap ab = advance_flow(FlowMap::identity(16), path, 0.0, 0.4, 0.02);
  const FlowMap a = advance_flow(FlowMap::identity(16), path, 0.0, 0.2, 0.02);
  const FlowMap b = advance_flow(a, path, 0.2, 0.4, 0.02);
  double worst = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      worst = std::max(worst, std::abs(ab.displacement(i, j).x - b.displacement(i, j).x));
      worst = std::max(worst, std::abs(ab.displacement(i, j).y - b.displacement(i, j).y));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("volume is preserved along divergence-free flows") {
  const VelocityPath shear = VelocityPath::steady(presets::shear(8));
  const FlowMap sheared = advance_flow(FlowMap::identity(64), shear, 0.0, 1.0, 0.02);
  CHECK(sheared.max_volume_defect() <= 1e-10);

  const VelocityPath tg = VelocityPath::steady(presets::taylor_green(8));
  const FlowMap swirled = advance_flow(FlowMap::identity(64), tg, 0.0, 0.5, 0.01);
  CHECK(swirled.max_volume_defect() <= 1e-4);
}

TEST_CASE("backward characteristics invert the flow") {
  const VelocityPath path = VelocityPath::steady(presets::shear(8));
  const double t = 0.7;
  const FlowMap inverse = invert_flow(path, t, 32, 0.05);
  const double err = map_error(inverse, [&](const Vec2& x) {
    return Vec2{x.x - t * std::cos(x.y), x.y};
  });
  CHECK(err <= 1e-6);

  const VelocityPath zero = VelocityPath::steady(SpectralField(8, 2));
  const FlowMap id = invert_flow(zero, 1.0, 16, 0.1);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) CHECK(std::abs(id.displacement(i, j).x) == 0.0);
}

TEST_CASE("composition residual of a noisy short flow is tiny") {
  const VelocityPath path = noisy_path(16, 1e-3, 0.1, 0.1, 9);
  const FlowMap inverse = invert_flow(path, 0.1, 64, 1e-3);
  const double residual = composition_residual(path, inverse, 0.1, 1e-3);
  CHECK(residual <= 1e-6);
}

TEST_CASE("reconstruction is exact at time zero and accurate on the shear") {
  const VelocityPath shear = VelocityPath::steady(presets::shear(8));

  // t = 0: the flow is the identity, everything collapses
  const FlowMap id = FlowMap::identity(32);
  const LagrangianState s0 = make_lagrangian_state(id, shear.at_time(0.0), 0.0);
  const ReconstructionReport rep0 = reconstruct_velocity(s0, id, shear, 0.05);
  CHECK(rep0.direct_mismatch <= 1e-13);
  CHECK(rep0.interpolated_mismatch <= 1e-13);

  const double t = 0.5;
  const FlowMap fwd = advance_flow(FlowMap::identity(64), shear, 0.0, t, 0.01);
  const FlowMap inv = invert_flow(shear, t, 64, 0.01);
  const LagrangianState st = make_lagrangian_state(fwd, shear.at_time(t), t);
  const ReconstructionReport rep = reconstruct_velocity(st, inv, shear, 0.01);
  CHECK(rep.direct_mismatch <= 1e-6);
}

TEST_CASE("reconstruction mismatch shrinks under refinement") {
  const VelocityPath path = noisy_path(8, 2e-3, 0.2, 0.05, 13);
  const auto mismatch = [&](int grid, double dt) {
    const FlowMap fwd = advance_flow(FlowMap::identity(grid), path, 0.0, 0.2, dt);
    const FlowMap inv = invert_flow(path, 0.2, grid, dt);
    const LagrangianState st = make_lagrangian_state(fwd, path.at_time(0.2), 0.2);
    return reconstruct_velocity(st, inv, path, dt);
  };
  const ReconstructionReport coarse = mismatch(16, 2e-2);
  const ReconstructionReport fine = mismatch(32, 1e-2);
  CHECK(coarse.direct_mismatch / fine.direct_mismatch >= 2.0);
  CHECK(coarse.interpolated_mismatch / fine.interpolated_mismatch >= 2.0);
}

TEST_CASE("velocity paths refuse uncovered times, naming the interval") {
  VelocityPath path(0.0, 0.1);
  path.append(SpectralField(4, 2));
  path.append(SpectralField(4, 2));
  CHECK_NOTHROW(path.at_time(0.05));
  CHECK_THROWS_WITH_AS(path.at_time(0.5), doctest::Contains("does not cover"),
                       std::out_of_range);
  CHECK_THROWS_AS(path.at_time(-0.2), std::out_of_range);
}

TEST_CASE("relabelling maps validate volume preservation") {
  const VelocityPath path = VelocityPath::steady(presets::taylor_green(8));
  VolumePreservingMap bad;
  bad.name = "dilation";
  bad.apply = [](const Vec2& p) { return Vec2{1.1 * p.x, p.y}; };
  bad.det_defect = [](const Vec2&) { return 0.1; };
  CHECK_THROWS_AS(right_invariance_check(path, bad, {0.1}, 16, 0.05), std::invalid_argument);
}

TEST_CASE("identity relabelling gives exactly zero deviation") {
  const VelocityPath path = noisy_path(8, 2e-3, 0.1, 0.05, 3);
  const InvarianceReport rep = right_invariance_check(path, identity_map(), {0.1}, 16, 0.02);
  CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("grid-aligned translations commute with the flow to rounding") {
  const VelocityPath path = noisy_path(8, 2e-3, 0.1, 0.05, 3);
  const InvarianceReport rep =
      right_invariance_check(path, translation_map(32, 5), {0.05, 0.1}, 32, 0.02);
  CHECK(rep.max_deviation <= 1e-6);
}

TEST_CASE("shear relabelling deviation shrinks with the grid") {
  const VelocityPath path = VelocityPath::steady(presets::taylor_green(8));
  const InvarianceReport coarse =
      right_invariance_check(path, shear_map(0.5), {0.2}, 16, 0.02);
  const InvarianceReport fine =
      right_invariance_check(path, shear_map(0.5), {0.2}, 32, 0.02);
  CHECK(coarse.max_deviation / fine.max_deviation >= 2.0);
}

TEST_CASE("lagrangian samples sit on the particle positions") {
  const VelocityPath path = VelocityPath::steady(presets::taylor_green(8));
  const FlowMap flow = advance_flow(FlowMap::identity(16), path, 0.0, 0.3, 0.01);
  const SpectralField u = path.at_time(0.3);
  const LagrangianState st = make_lagrangian_state(flow, u, 0.3);
  const VelocityEvaluator eval(u);
  for (int i = 0; i < 16; i += 5)
    for (int j = 0; j < 16; j += 3) {
      const Vec2 direct = eval(flow.position(i, j));
      const Vec2& stored = st.eta[st.flow.index(i, j)];
      CHECK(stored.x == direct.x);
      CHECK(stored.y == direct.y);
    }
}
