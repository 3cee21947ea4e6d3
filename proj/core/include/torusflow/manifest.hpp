#pragma once

#include <string>
#include <vector>

namespace torusflow {

struct OutputRecord {
  std::string path;
  std::string checksum;
};

struct CheckRecord {
  std::string id;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Reproducibility metadata for one run or suite invocation.
struct RunManifest {
  std::string version;
  std::string config_echo;
  std::string started;
  std::string finished;
  std::vector<OutputRecord> outputs;
  std::vector<CheckRecord> checks;

  void add_output(const std::string& path);
  bool all_pass() const;
  /// Re-hashes every referenced output and compares.
  bool outputs_match_disk() const;
  void write(const std::string& path) const;
};

std::string wall_clock_iso8601();

}  // namespace torusflow
