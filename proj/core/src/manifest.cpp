#include "torusflow/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "torusflow/checksum.hpp"

namespace torusflow {

std::string wall_clock_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_output(const std::string& path) {
  outputs.push_back({path, checksum_hex(fnv1a64_file(path))});
}

bool RunManifest::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

bool RunManifest::outputs_match_disk() const {
  for (const auto& o : outputs)
    if (checksum_hex(fnv1a64_file(o.path)) != o.checksum) return false;
  return true;
}

void RunManifest::write(const std::string& path) const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["started"] = started;
  j["finished"] = finished;
  if (!config_echo.empty()) j["config"] = nlohmann::ordered_json::parse(config_echo);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& o : outputs) arr.push_back({{"path", o.path}, {"fnv1a64", o.checksum}});
  j["outputs"] = arr;
  auto checks_json = nlohmann::ordered_json::array();
  for (const auto& c : checks)
    checks_json.push_back(
        {{"id", c.id}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds}});
  j["checks"] = checks_json;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("manifest: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace torusflow
