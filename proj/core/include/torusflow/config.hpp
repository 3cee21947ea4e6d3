#pragma once

#include <optional>
#include <string>
#include <vector>

#include "torusflow/eulerian.hpp"
#include "torusflow/noise.hpp"

namespace torusflow {

struct NoiseConfig {
  bool present = false;
  int k_max = 4;
  double alpha = 3.0;
  double sobolev_index = 3.0;
  double amplitude = 1.0;
  std::vector<NoiseMode> explicit_modes;

  NoiseModel build() const;
};

struct FlowConfig {
  int grid = 64;
  double dt = 2e-3;
  double horizon = 0.5;
  std::vector<double> checkpoints;
};

struct InvarianceConfig {
  std::string phi = "translation";
  double amplitude = 0.5;
  int shift_cells = 8;
};

struct NolossConfig {
  std::vector<int> resolutions = {16, 32, 64};
  double tail_exponent = 3.6;
};

struct SdeLabConfig {
  std::string experiment = "ladder";
  std::string problem = "interval-brownian";
  double dt = 1e-3;
  double horizon = 1.0;
  int paths = 1;
  int stages = 10;
  std::vector<double> x0;
};

/// One experiment description; round-trips losslessly through
/// serialize_config / parse_config.
struct RunConfig {
  std::string experiment = "eulerian";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  EulerianRunConfig eulerian;
  NoiseConfig noise;
  FlowConfig flow;
  InvarianceConfig invariance;
  NolossConfig noloss;
  SdeLabConfig sde;

  /// Eulerian config with the noise block resolved into a model.
  EulerianRunConfig resolved_eulerian() const;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;

  bool ok() const { return config.has_value() && errors.empty(); }
};

/// Strict parse: unknown keys, type mismatches and constraint violations
/// are all collected (not first-error-only).
ParseResult parse_config(const std::string& text);
ParseResult parse_config_file(const std::string& path);

/// Canonical serialization; parsing it back reproduces the value exactly.
std::string serialize_config(const RunConfig& config);

}  // namespace torusflow
