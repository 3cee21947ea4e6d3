#include "torusflow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "torusflow/csv.hpp"

namespace torusflow {

using nlohmann::ordered_json;

NoiseModel NoiseConfig::build() const {
  if (!present) return {};
  if (!explicit_modes.empty()) return NoiseModel(explicit_modes, sobolev_index);
  return NoiseModel::power_law(k_max, alpha, sobolev_index, amplitude);
}

EulerianRunConfig RunConfig::resolved_eulerian() const {
  EulerianRunConfig c = eulerian;
  c.noise = noise.build();
  c.seed = seed;
  return c;
}

namespace {

/// Key-checked view of one JSON object: every read marks its key, and
/// unknown keys are reported after all reads.
class ObjectReader {
 public:
  ObjectReader(const ordered_json& j, std::string scope, std::vector<std::string>& errors)
      : j_(j), scope_(std::move(scope)), errors_(errors) {}

  ~ObjectReader() {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key()))
        errors_.push_back(scope_ + ": unknown key '" + item.key() + "'");
  }

  bool has(const std::string& key) {
    return j_.contains(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const std::exception&) {
      errors_.push_back(scope_ + ": key '" + key + "' has the wrong type");
    }
  }

  const ordered_json* child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return nullptr;
    if (!j_.at(key).is_object()) {
      errors_.push_back(scope_ + ": key '" + key + "' must be an object");
      return nullptr;
    }
    return &j_.at(key);
  }

 private:
  const ordered_json& j_;
  std::string scope_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& field, std::vector<std::string>& errors) {
  if (!(v > 0.0)) errors.push_back("constraint: " + field + " must be > 0");
}

void parse_noise(const ordered_json& j, RunConfig& c, std::vector<std::string>& errors) {
  c.noise.present = true;
  ObjectReader r(j, "noise", errors);
  r.read("k_max", c.noise.k_max);
  r.read("alpha", c.noise.alpha);
  r.read("sobolev_index", c.noise.sobolev_index);
  r.read("amplitude", c.noise.amplitude);
  if (r.has("modes")) {
    std::vector<std::vector<double>> rows;
    r.read("modes", rows);
    for (const auto& row : rows) {
      if (row.size() != 3) {
        errors.push_back("noise: each entry of 'modes' must be [k1, k2, amplitude]");
        continue;
      }
      c.noise.explicit_modes.push_back(
          {static_cast<int>(row[0]), static_cast<int>(row[1]), row[2]});
    }
  }
  if (c.noise.explicit_modes.empty() && c.noise.k_max < 1)
    errors.push_back("constraint: noise.k_max must be >= 1");
  if (c.noise.amplitude < 0.0) errors.push_back("constraint: noise.amplitude must be >= 0");
}

void parse_eulerian(const ordered_json& j, RunConfig& c, std::vector<std::string>& errors) {
  ObjectReader r(j, "eulerian", errors);
  r.read("resolution", c.eulerian.resolution);
  r.read("dt", c.eulerian.dt);
  r.read("horizon", c.eulerian.horizon);
  r.read("s_track", c.eulerian.s_track);
  r.read("cap", c.eulerian.cap);
  r.read("cap_norm_index", c.eulerian.cap_norm_index);
  r.read("initial_condition", c.eulerian.initial_condition);
  r.read("stride", c.eulerian.stride);
  r.read("snapshot_times", c.eulerian.snapshot_times);

  if (c.eulerian.resolution < 4) errors.push_back("constraint: eulerian.resolution must be >= 4");
  require_positive(c.eulerian.dt, "eulerian.dt", errors);
  require_positive(c.eulerian.horizon, "eulerian.horizon", errors);
  if (c.eulerian.stride < 1) errors.push_back("constraint: eulerian.stride must be >= 1");
  if (c.eulerian.cap < 0.0) errors.push_back("constraint: eulerian.cap must be >= 0");
  for (double s : c.eulerian.s_track)
    if (s < 0.0) errors.push_back("constraint: eulerian.s_track entries must be >= 0");
}

void parse_flow(const ordered_json& j, RunConfig& c, std::vector<std::string>& errors) {
  ObjectReader r(j, "flow", errors);
  r.read("grid", c.flow.grid);
  r.read("dt", c.flow.dt);
  r.read("horizon", c.flow.horizon);
  r.read("checkpoints", c.flow.checkpoints);
  if (c.flow.grid < 4) errors.push_back("constraint: flow.grid must be >= 4");
  require_positive(c.flow.dt, "flow.dt", errors);
  require_positive(c.flow.horizon, "flow.horizon", errors);
}

void parse_invariance(const ordered_json& j, RunConfig& c, std::vector<std::string>& errors) {
  ObjectReader r(j, "invariance", errors);
  r.read("phi", c.invariance.phi);
  r.read("amplitude", c.invariance.amplitude);
  r.read("shift_cells", c.invariance.shift_cells);
  if (c.invariance.phi != "translation" && c.invariance.phi != "shear" &&
      c.invariance.phi != "identity")
    errors.push_back("constraint: invariance.phi must be translation, shear or identity");
}

void parse_noloss(const ordered_json& j, RunConfig& c, std::vector<std::string>& errors) {
  ObjectReader r(j, "noloss", errors);
  r.read("resolutions", c.noloss.resolutions);
  r.read("tail_exponent", c.noloss.tail_exponent);
  if (c.noloss.resolutions.size() < 2)
    errors.push_back("constraint: noloss.resolutions needs at least two entries");
  require_positive(c.noloss.tail_exponent, "noloss.tail_exponent", errors);
}

void parse_sde(const ordered_json& j, RunConfig& c, std::vector<std::string>& errors) {
  ObjectReader r(j, "sde", errors);
  r.read("experiment", c.sde.experiment);
  r.read("problem", c.sde.problem);
  r.read("dt", c.sde.dt);
  r.read("horizon", c.sde.horizon);
  r.read("paths", c.sde.paths);
  r.read("stages", c.sde.stages);
  r.read("x0", c.sde.x0);
  require_positive(c.sde.dt, "sde.dt", errors);
  require_positive(c.sde.horizon, "sde.horizon", errors);
  if (c.sde.paths < 1) errors.push_back("constraint: sde.paths must be >= 1");
  const std::set<std::string> kinds = {"ladder", "chart", "ito", "variational", "glue"};
  if (!kinds.count(c.sde.experiment))
    errors.push_back("constraint: sde.experiment must be one of ladder|chart|ito|variational|glue");
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    result.errors.push_back(std::string("json: ") + e.what());
    return result;
  }
  if (!j.is_object()) {
    result.errors.push_back("json: top level must be an object");
    return result;
  }

  RunConfig c;
  auto& errors = result.errors;
  {
    ObjectReader r(j, "config", errors);
    r.read("experiment", c.experiment);
    r.read("seed", c.seed);
    r.read("output_dir", c.output_dir);
    if (const auto* jn = r.child("noise")) parse_noise(*jn, c, errors);
    if (const auto* je = r.child("eulerian")) parse_eulerian(*je, c, errors);
    if (const auto* jf = r.child("flow")) parse_flow(*jf, c, errors);
    if (const auto* ji = r.child("invariance")) parse_invariance(*ji, c, errors);
    if (const auto* jl = r.child("noloss")) parse_noloss(*jl, c, errors);
    if (const auto* js = r.child("sde")) parse_sde(*js, c, errors);
  }

  const std::set<std::string> experiments = {"eulerian",   "flow",   "equivalence",
                                             "invariance", "noloss", "sde-lab"};
  if (!experiments.count(c.experiment))
    errors.push_back("constraint: experiment must be one of eulerian|flow|equivalence|"
                     "invariance|noloss|sde-lab");

  // cap versus the initial state can only be checked with the preset built
  if (errors.empty() && c.eulerian.cap > 0.0) {
    try {
      const SpectralField u0 =
          presets::by_name(c.eulerian.initial_condition, c.eulerian.resolution, c.seed);
      const double n0 = sobolev_norm(u0, SobolevIndex(c.eulerian.cap_norm_index));
      if (c.eulerian.cap <= n0)
        errors.push_back("constraint: eulerian.cap must exceed the initial H^s norm (" +
                         CsvWriter::format(n0) + ")");
    } catch (const std::exception& e) {
      errors.push_back(std::string("constraint: initial_condition: ") + e.what());
    }
  }

  if (errors.empty()) result.config = c;
  return result;
}

ParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.errors.push_back("config: cannot open " + path);
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  ordered_json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  if (c.noise.present) {
    ordered_json jn;
    if (!c.noise.explicit_modes.empty()) {
      std::vector<std::vector<double>> rows;
      for (const auto& m : c.noise.explicit_modes)
        rows.push_back({static_cast<double>(m.k1), static_cast<double>(m.k2), m.amplitude});
      jn["modes"] = rows;
      jn["sobolev_index"] = c.noise.sobolev_index;
    } else {
      jn["k_max"] = c.noise.k_max;
      jn["alpha"] = c.noise.alpha;
      jn["sobolev_index"] = c.noise.sobolev_index;
      jn["amplitude"] = c.noise.amplitude;
    }
    j["noise"] = jn;
  }
  {
    ordered_json je;
    je["resolution"] = c.eulerian.resolution;
    je["dt"] = c.eulerian.dt;
    je["horizon"] = c.eulerian.horizon;
    je["s_track"] = c.eulerian.s_track;
    je["cap"] = c.eulerian.cap;
    je["cap_norm_index"] = c.eulerian.cap_norm_index;
    je["initial_condition"] = c.eulerian.initial_condition;
    je["stride"] = c.eulerian.stride;
    if (!c.eulerian.snapshot_times.empty()) je["snapshot_times"] = c.eulerian.snapshot_times;
    j["eulerian"] = je;
  }
  {
    ordered_json jf;
    jf["grid"] = c.flow.grid;
    jf["dt"] = c.flow.dt;
    jf["horizon"] = c.flow.horizon;
    if (!c.flow.checkpoints.empty()) jf["checkpoints"] = c.flow.checkpoints;
    j["flow"] = jf;
  }
  {
    ordered_json ji;
    ji["phi"] = c.invariance.phi;
    ji["amplitude"] = c.invariance.amplitude;
    ji["shift_cells"] = c.invariance.shift_cells;
    j["invariance"] = ji;
  }
  {
    ordered_json jl;
    jl["resolutions"] = c.noloss.resolutions;
    jl["tail_exponent"] = c.noloss.tail_exponent;
    j["noloss"] = jl;
  }
  {
    ordered_json js;
    js["experiment"] = c.sde.experiment;
    js["problem"] = c.sde.problem;
    js["dt"] = c.sde.dt;
    js["horizon"] = c.sde.horizon;
    js["paths"] = c.sde.paths;
    js["stages"] = c.sde.stages;
    if (!c.sde.x0.empty()) js["x0"] = c.sde.x0;
    j["sde"] = js;
  }
  return j.dump(2) + "\n";
}

}  // namespace torusflow
