#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "torusflow/manifest.hpp"

namespace torusflow {

struct AcceptanceContext {
  std::string out_dir = "out";
  std::uint64_t seed = 97;
};

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string detail;
  std::vector<std::string> outputs;  ///< files written under out_dir
  double seconds = 0.0;
};

struct Criterion {
  std::string id;
  std::vector<std::string> aliases;
  bool monte_carlo = false;
  std::function<CriterionResult(const AcceptanceContext&)> run;
};

/// Registry of the acceptance checks in execution order.
const std::vector<Criterion>& acceptance_criteria();

/// Resolves a selection string: "all", "all-fast" (skips the Monte Carlo
/// checks), a comma-separated list of ids or aliases, or "" (nothing).
std::vector<const Criterion*> select_criteria(const std::string& selection);

/// Runs the selection, prints one PASS/FAIL line per criterion to `log`
/// (when non-null), writes outputs and `manifest.json` under out_dir.
RunManifest run_acceptance_suite(const std::string& selection, const std::string& out_dir,
                                 std::uint64_t seed, std::ostream* log);

}  // namespace torusflow
