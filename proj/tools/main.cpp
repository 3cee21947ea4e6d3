// Command-line front end: experiment runners plus the acceptance suite.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "torusflow/acceptance.hpp"
#include "torusflow/config.hpp"
#include "torusflow/csv.hpp"
#include "torusflow/eulerian.hpp"
#include "torusflow/flow_map.hpp"
#include "torusflow/manifest.hpp"
#include "torusflow/sde/chart.hpp"
#include "torusflow/sde/integrator.hpp"
#include "torusflow/sde/ito.hpp"
#include "torusflow/sde/variational.hpp"
#include "torusflow/snapshot.hpp"
#include "torusflow/version.hpp"

namespace fs = std::filesystem;
using namespace torusflow;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
};

std::string resolve_out_dir(const RunConfig& cfg, const CommonArgs& args) {
  std::string dir = cfg.output_dir;
  if (const char* env = std::getenv("TORUSFLOW_OUT")) dir = env;
  if (!args.out_override.empty()) dir = args.out_override;
  fs::create_directories(dir);
  return dir;
}

RunConfig load_config_or_exit(const CommonArgs& args) {
  ParseResult parsed = parse_config_file(args.config_path);
  if (!parsed.ok()) {
    std::cerr << "config rejected:\n";
    for (const auto& e : parsed.errors) std::cerr << "  - " << e << "\n";
    std::exit(2);
  }
  RunConfig cfg = *parsed.config;
  if (args.has_seed_override) cfg.seed = args.seed_override;
  return cfg;
}

RunManifest start_manifest(const RunConfig& cfg) {
  RunManifest m;
  m.version = kVersionString;
  m.config_echo = serialize_config(cfg);
  m.started = wall_clock_iso8601();
  return m;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int cmd_run_eulerian(const CommonArgs& args) {
  const RunConfig cfg = load_config_or_exit(args);
  const std::string out_dir = resolve_out_dir(cfg, args);
  RunManifest manifest = start_manifest(cfg);

  const SolutionRecord rec = run_eulerian(cfg.resolved_eulerian());

  std::vector<std::string> cols = {"time"};
  for (const auto& l : rec.norm_labels) cols.push_back(l);
  cols.push_back("energy");
  CsvWriter csv(cols);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    std::vector<double> row = {rec.times[i]};
    for (double v : rec.norms[i]) row.push_back(v);
    row.push_back(rec.energy[i]);
    csv.add_row(row);
  }
  const std::string norms_path = join(out_dir, "norms.csv");
  csv.write(norms_path);
  manifest.add_output(norms_path);

  for (const auto& [t, field] : rec.snapshots) {
    char stamp[32];
    std::snprintf(stamp, sizeof(stamp), "%.6g", t);
    const std::string p = join(out_dir, std::string("snapshot_t") + stamp + ".fld");
    write_snapshot(field, p);
    manifest.add_output(p);
  }

  nlohmann::ordered_json meta;
  meta["version"] = kVersionString;
  meta["status"] = rec.status == RunStatus::ReachedHorizon ? "reached-horizon"
                   : rec.status == RunStatus::CapExit      ? "cap-exit"
                                                           : "numerical-blowup";
  if (cfg.noise.present) {
    const NoiseModel model = cfg.noise.build();
    meta["noise_trace_q"] = model.trace_q();
    meta["noise_hr_trace"] = model.hr_trace();
  }
  if (rec.exit_time) meta["exit_time"] = *rec.exit_time;
  if (rec.exit_stage) meta["exit_stage"] = *rec.exit_stage;
  if (rec.blowup_step) meta["blowup_step"] = *rec.blowup_step;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& [n, t] : rec.announcing_times) stages.push_back({{"stage", n}, {"time", t}});
  meta["announcing_times"] = stages;
  meta["config"] = nlohmann::ordered_json::parse(serialize_config(cfg));
  {
    std::ofstream metaf(join(out_dir, "meta.json"));
    metaf << meta.dump(2) << "\n";
  }
  manifest.add_output(join(out_dir, "meta.json"));

  manifest.finished = wall_clock_iso8601();
  manifest.write(join(out_dir, "manifest.json"));
  std::cout << "run-eulerian: " << meta["status"].get<std::string>() << ", outputs in " << out_dir
            << "\n";
  return 0;
}

VelocityPath record_velocity_path(const RunConfig& cfg) {
  EulerianRunConfig ec = cfg.resolved_eulerian();
  VelocityPath path(0.0, ec.dt);
  const SpectralField u0 = presets::by_name(ec.initial_condition, ec.resolution, ec.seed);
  run_eulerian(ec, u0, [&](std::uint64_t, double, const SpectralField& u) { path.append(u); });
  return path;
}

int cmd_run_flow(const CommonArgs& args) {
  const RunConfig cfg = load_config_or_exit(args);
  const std::string out_dir = resolve_out_dir(cfg, args);
  RunManifest manifest = start_manifest(cfg);

  const VelocityPath path = record_velocity_path(cfg);
  std::vector<double> checkpoints = cfg.flow.checkpoints;
  if (checkpoints.empty()) checkpoints = {cfg.flow.horizon / 2.0, cfg.flow.horizon};
  std::sort(checkpoints.begin(), checkpoints.end());

  CsvWriter csv({"time", "det_jacobian_min", "det_jacobian_max", "inversion_residual",
                 "reconstruction_mismatch"});
  FlowMap flow = FlowMap::identity(cfg.flow.grid);
  double t_prev = 0.0;
  for (double t : checkpoints) {
    if (t > t_prev) flow = advance_flow(flow, path, t_prev, t, cfg.flow.dt);
    t_prev = t;
    const FlowMap inverse = invert_flow(path, t, cfg.flow.grid, cfg.flow.dt);
    const double residual = composition_residual(path, inverse, t, cfg.flow.dt);
    const LagrangianState state = make_lagrangian_state(flow, path.at_time(t), t);
    const ReconstructionReport rep = reconstruct_velocity(state, inverse, path, cfg.flow.dt);
    const auto [lo, hi] = flow.jacobian_range();
    csv.add_row({t, lo, hi, residual, rep.direct_mismatch});
  }
  const std::string diag = join(out_dir, "flow_diag.csv");
  csv.write(diag);
  manifest.add_output(diag);
  manifest.finished = wall_clock_iso8601();
  manifest.write(join(out_dir, "manifest.json"));
  std::cout << "run-flow: outputs in " << out_dir << "\n";
  return 0;
}

int cmd_check_equivalence(const CommonArgs& args) {
  const RunConfig cfg = load_config_or_exit(args);
  const std::string out_dir = resolve_out_dir(cfg, args);
  RunManifest manifest = start_manifest(cfg);

  const VelocityPath path = record_velocity_path(cfg);
  const double horizon = cfg.flow.horizon;

  const auto leg = [&](int grid, double dt_flow) {
    const FlowMap fwd = advance_flow(FlowMap::identity(grid), path, 0.0, horizon, dt_flow);
    const FlowMap inv = invert_flow(path, horizon, grid, dt_flow);
    const double residual = composition_residual(path, inv, horizon, dt_flow);
    const LagrangianState st = make_lagrangian_state(fwd, path.at_time(horizon), horizon);
    const ReconstructionReport rep = reconstruct_velocity(st, inv, path, dt_flow);
    return std::tuple{fwd.max_volume_defect(), residual, rep.direct_mismatch,
                      rep.interpolated_mismatch};
  };

  const auto [vol0, res0, dir0, itp0] = leg(cfg.flow.grid, cfg.flow.dt);
  const auto [vol1, res1, dir1, itp1] = leg(2 * cfg.flow.grid, 0.5 * cfg.flow.dt);
  const double gain = dir0 / std::max(dir1, 1e-300);

  CsvWriter csv({"grid", "dt_flow", "volume_defect", "inversion_residual",
                 "reconstruction_direct", "reconstruction_interp"});
  csv.add_row({static_cast<double>(cfg.flow.grid), cfg.flow.dt, vol0, res0, dir0, itp0});
  csv.add_row({static_cast<double>(2 * cfg.flow.grid), 0.5 * cfg.flow.dt, vol1, res1, dir1, itp1});
  const std::string out = join(out_dir, "equivalence.csv");
  csv.write(out);
  manifest.add_output(out);

  const bool pass = vol0 <= 1e-4 && res0 <= 1e-5 && dir0 <= 1e-4 && gain >= 2.0;
  manifest.checks.push_back({"flow-equivalence", pass,
                             "volume " + CsvWriter::format(vol0) + ", inversion " +
                                 CsvWriter::format(res0) + ", reconstruction " +
                                 CsvWriter::format(dir0) + ", gain " + CsvWriter::format(gain),
                             0.0});
  manifest.finished = wall_clock_iso8601();
  manifest.write(join(out_dir, "manifest.json"));
  std::cout << (pass ? "PASS" : "FAIL") << "  flow-equivalence\n";
  return pass ? 0 : 1;
}

int cmd_check_invariance(const CommonArgs& args, const std::string& phi_arg) {
  RunConfig cfg = load_config_or_exit(args);
  if (!phi_arg.empty()) cfg.invariance.phi = phi_arg;
  const std::string out_dir = resolve_out_dir(cfg, args);
  RunManifest manifest = start_manifest(cfg);

  const VelocityPath path = record_velocity_path(cfg);
  std::vector<double> checkpoints = cfg.flow.checkpoints;
  if (checkpoints.empty()) checkpoints = {cfg.flow.horizon};

  const auto map_of = [&](int grid) {
    if (cfg.invariance.phi == "translation")
      return translation_map(grid, cfg.invariance.shift_cells);
    if (cfg.invariance.phi == "shear") return shear_map(cfg.invariance.amplitude);
    return identity_map();
  };

  const InvarianceReport base = right_invariance_check(path, map_of(cfg.flow.grid), checkpoints,
                                                       cfg.flow.grid, cfg.flow.dt);
  const InvarianceReport fine = right_invariance_check(
      path, map_of(2 * cfg.flow.grid), checkpoints, 2 * cfg.flow.grid, cfg.flow.dt);

  CsvWriter csv({"grid", "max_deviation"});
  csv.add_row({static_cast<double>(cfg.flow.grid), base.max_deviation});
  csv.add_row({static_cast<double>(2 * cfg.flow.grid), fine.max_deviation});
  const std::string out = join(out_dir, "invariance.csv");
  csv.write(out);
  manifest.add_output(out);

  bool pass = false;
  std::string detail;
  if (cfg.invariance.phi == "shear") {
    const double gain = base.max_deviation / std::max(fine.max_deviation, 1e-300);
    pass = gain >= 2.0;
    detail = "deviation " + CsvWriter::format(base.max_deviation) + ", refinement gain " +
             CsvWriter::format(gain);
  } else {
    pass = base.max_deviation <= 1e-6;
    detail = "deviation " + CsvWriter::format(base.max_deviation) + " (tol 1e-6)";
  }
  manifest.checks.push_back({"right-invariance-" + cfg.invariance.phi, pass, detail, 0.0});
  manifest.finished = wall_clock_iso8601();
  manifest.write(join(out_dir, "manifest.json"));
  std::cout << (pass ? "PASS" : "FAIL") << "  right-invariance (" << cfg.invariance.phi << "): "
            << detail << "\n";
  return pass ? 0 : 1;
}

int cmd_check_noloss(const CommonArgs& args) {
  RunConfig cfg = load_config_or_exit(args);
  const std::string out_dir = resolve_out_dir(cfg, args);
  RunManifest manifest = start_manifest(cfg);

  EulerianRunConfig ec = cfg.resolved_eulerian();
  ec.initial_condition = "spectral-tail:" + CsvWriter::format(cfg.noloss.tail_exponent);
  const RegularityReport rep = regularity_persistence_diagnostic(ec, cfg.noloss.resolutions);

  CsvWriter csv({"resolution", "time", "h_s", "h_s_plus_1"});
  for (std::size_t k = 0; k < rep.resolutions.size(); ++k)
    for (std::size_t i = 0; i < rep.times.size(); ++i)
      csv.add_row({static_cast<double>(rep.resolutions[k]), rep.times[i], rep.tracked_norms[k][i],
                   rep.higher_norms[k][i]});
  const std::string out = join(out_dir, "regularity.csv");
  csv.write(out);
  manifest.add_output(out);

  double worst = 0.0;
  for (double v : rep.rel_change_last_pair) worst = std::max(worst, v);
  manifest.checks.push_back({"regularity-persistence", rep.pass,
                             "max relative change " + CsvWriter::format(worst), 0.0});
  manifest.finished = wall_clock_iso8601();
  manifest.write(join(out_dir, "manifest.json"));
  std::cout << (rep.pass ? "PASS" : "FAIL") << "  regularity-persistence: max change "
            << CsvWriter::format(worst) << "\n";
  return rep.pass ? 0 : 1;
}

sde::SdeProblem problem_by_name(const std::string& name) {
  using namespace sde::problems;
  if (name == "circle") return circle_rotation();
  if (name == "circle-ito") return circle_rotation_ito();
  if (name == "sphere") return sphere_brownian();
  if (name == "sphere-ito") return sphere_brownian_ito();
  if (name == "interval-drift") return interval_unit_drift();
  if (name == "interval-brownian") return interval_brownian();
  if (name == "linear-plane") return linear_plane(0.3, 1.2, 0.4);
  if (name == "affine-noise-plane") return affine_noise_plane();
  throw std::invalid_argument("unknown sde problem: " + name);
}

sde::Vec default_x0(const sde::SdeProblem& p) {
  if (p.state_dim == 1) return {0.0};
  if (p.state_dim == 2) return {1.0, 0.0};
  return {0.0, 0.0, 1.0};
}

int cmd_sde_lab(const CommonArgs& args, const std::string& experiment_arg) {
  RunConfig cfg = load_config_or_exit(args);
  if (!experiment_arg.empty()) cfg.sde.experiment = experiment_arg;
  const std::string out_dir = resolve_out_dir(cfg, args);
  RunManifest manifest = start_manifest(cfg);

  const sde::SdeProblem problem = problem_by_name(cfg.sde.problem);
  sde::Vec x0 = cfg.sde.x0.empty() ? default_x0(problem) : cfg.sde.x0;
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.sde.horizon / cfg.sde.dt));

  const auto finish = [&](const std::string& csv_name, CsvWriter& csv) {
    const std::string out = join(out_dir, csv_name);
    csv.write(out);
    manifest.add_output(out);
    manifest.finished = wall_clock_iso8601();
    manifest.write(join(out_dir, "manifest.json"));
    std::cout << "sde-lab " << cfg.sde.experiment << ": outputs in " << out_dir << "\n";
    return 0;
  };

  if (cfg.sde.experiment == "ladder") {
    const sde::LadderRun run = sde::solve_with_ladder(problem, x0, cfg.seed, 0, cfg.sde.dt,
                                                      cfg.sde.horizon, cfg.sde.stages);
    CsvWriter csv({"stage", "hit_time"});
    for (std::size_t i = 0; i < run.ladder.stage.size(); ++i)
      csv.add_row({static_cast<double>(run.ladder.stage[i]), run.ladder.hit_time[i]});
    if (run.ladder.exit_time) csv.add_row({0.0, *run.ladder.exit_time});
    return finish("ladder.csv", csv);
  }
  if (cfg.sde.experiment == "chart") {
    const sde::Chart chart = sde::stereographic_north();
    // the north chart is centered at the south pole
    if (cfg.sde.x0.empty() && problem.state_dim == 3) x0 = {0.0, 0.0, -1.0};
    const sde::NoiseRecord rec(cfg.seed, 0, problem.noise_dim, cfg.sde.dt, n_steps);
    const sde::ChartComparison cmp =
        sde::chart_consistency(problem, chart, x0, rec, 0, n_steps);
    CsvWriter csv({"time", "deviation"});
    for (std::size_t i = 0; i < cmp.times.size(); ++i) csv.add_row({cmp.times[i], cmp.deviation[i]});
    return finish("chart.csv", csv);
  }
  if (cfg.sde.experiment == "ito") {
    const sde::NoiseRecord rec(cfg.seed, 0, problem.noise_dim, cfg.sde.dt, n_steps);
    const sde::SdePath path = sde::solve_path(problem, x0, rec, n_steps, {});
    const sde::Observable h = problem.state_dim == 2 ? sde::observables::generic_cubic()
                                                     : sde::observables::squared_norm(problem.state_dim);
    const auto res = sde::ito_residual_series(problem, path, h);
    CsvWriter csv({"time", "residual"});
    for (std::size_t i = 0; i < path.times.size(); ++i) csv.add_row({path.times[i], res[i]});
    return finish("ito.csv", csv);
  }
  if (cfg.sde.experiment == "variational") {
    const sde::NoiseRecord rec(cfg.seed, 0, problem.noise_dim, cfg.sde.dt, n_steps);
    sde::Vec h(static_cast<std::size_t>(problem.state_dim), 0.0);
    h[0] = 1.0;
    const sde::VariationalRun run =
        sde::variational_derivative(problem, x0, h, rec, 0, n_steps);
    std::vector<std::string> cols = {"time"};
    for (int i = 0; i < problem.state_dim; ++i) cols.push_back("a" + std::to_string(i));
    CsvWriter csv(cols);
    for (std::size_t i = 0; i < run.base.times.size(); ++i) {
      std::vector<double> row = {run.base.times[i]};
      for (double v : run.derivative[i]) row.push_back(v);
      csv.add_row(row);
    }
    return finish("variational.csv", csv);
  }
  if (cfg.sde.experiment == "glue") {
    const sde::Chart north = sde::stereographic_north();
    const sde::Chart south = sde::stereographic_south();
    if (cfg.sde.x0.empty() && problem.state_dim == 3) x0 = {0.0, 0.8, -0.6};
    const sde::NoiseRecord rec(cfg.seed, 0, problem.noise_dim, cfg.sde.dt, n_steps);
    const sde::GluedRun run =
        sde::glue_charts(problem, north, south, x0, rec, 0, n_steps, 2.0);
    CsvWriter csv({"time", "chart", "x", "y", "z"});
    for (std::size_t i = 0; i < run.times.size(); ++i)
      csv.add_row({run.times[i], static_cast<double>(run.chart_index[i]),
                   run.embedded_states[i][0], run.embedded_states[i][1],
                   run.embedded_states[i][2]});
    return finish("glue.csv", csv);
  }
  std::cerr << "unknown sde experiment: " << cfg.sde.experiment << "\n";
  return 2;
}

int cmd_accept(const std::string& selection, const std::string& out_dir, std::uint64_t seed) {
  const RunManifest manifest = run_acceptance_suite(selection, out_dir, seed, &std::cout);
  const bool ok = manifest.all_pass();
  std::cout << (ok ? "all selected checks passed" : "some checks FAILED") << "; manifest in "
            << out_dir << "/manifest.json\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic ideal-flow laboratory on the flat 2-torus"};
  app.set_version_flag("--version", std::string(kVersionString));
  app.require_subcommand(1);

  CommonArgs common;
  std::string phi_arg, experiment_arg;
  std::string selection = "all";
  std::string accept_out = "out/acceptance";
  std::uint64_t accept_seed = 97;

  const auto add_common = [&](CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--config", common.config_path, "JSON experiment config")->required();
    cmd->add_option("--out", common.out_override, "output directory override");
    if (with_seed)
      cmd->add_option("--seed", common.seed_override, "seed override")
          ->each([&](const std::string&) { common.has_seed_override = true; });
  };

  auto* c1 = app.add_subcommand("run-eulerian", "integrate the forced ideal flow");
  add_common(c1);
  auto* c2 = app.add_subcommand("run-flow", "advect the particle grid through a run");
  add_common(c2);
  auto* c3 = app.add_subcommand("check-equivalence",
                                "flow-map consistency of one trajectory");
  add_common(c3);
  auto* c4 = app.add_subcommand("check-invariance", "relabelling symmetry of the flow");
  add_common(c4);
  c4->add_option("--phi", phi_arg, "relabelling preset (translation|shear|identity)");
  auto* c5 = app.add_subcommand("check-noloss", "higher-norm persistence under refinement");
  add_common(c5);
  auto* c6 = app.add_subcommand("sde-lab", "finite-dimensional SDE experiments");
  add_common(c6);
  c6->add_option("--experiment", experiment_arg, "ladder|chart|ito|variational|glue");
  auto* c7 = app.add_subcommand("accept", "run the acceptance suite");
  c7->add_option("--selection", selection, "all | all-fast | comma-separated ids");
  c7->add_option("--out", accept_out, "output directory");
  c7->add_option("--seed", accept_seed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c1->parsed()) return cmd_run_eulerian(common);
    if (c2->parsed()) return cmd_run_flow(common);
    if (c3->parsed()) return cmd_check_equivalence(common);
    if (c4->parsed()) return cmd_check_invariance(common, phi_arg);
    if (c5->parsed()) return cmd_check_noloss(common);
    if (c6->parsed()) return cmd_sde_lab(common, experiment_arg);
    if (c7->parsed()) {
      if (const char* env = std::getenv("TORUSFLOW_OUT")) accept_out = env;
      return cmd_accept(selection, accept_out, accept_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
