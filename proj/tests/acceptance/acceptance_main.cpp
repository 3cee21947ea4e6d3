// Acceptance gate: runs every criterion at its stated scale and prints one
// PASS/FAIL line per criterion. Exit code 0 iff everything passed.

#include <cstring>
#include <iostream>
#include <string>

#include "torusflow/acceptance.hpp"

int main(int argc, char** argv) {
  std::string out_dir = "acceptance_out";
  std::string selection = "all";
  std::uint64_t seed = 97;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--out") && i + 1 < argc) out_dir = argv[++i];
    if (!std::strcmp(argv[i], "--selection") && i + 1 < argc) selection = argv[++i];
    if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) seed = std::stoull(argv[++i]);
  }

  const torusflow::RunManifest manifest =
      torusflow::run_acceptance_suite(selection, out_dir, seed, &std::cout);

  int failed = 0;
  for (const auto& c : manifest.checks)
    if (!c.pass) ++failed;
  std::cout << manifest.checks.size() - failed << "/" << manifest.checks.size()
            << " acceptance criteria passed\n";
  return failed == 0 ? 0 : 1;
}
