#include "bench/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uld/errors.hpp"
#include "uld/version.hpp"

namespace uld::bench {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("manifest: cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hash_hex(ss.str());
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const std::string& out_dir, const std::string& config_text,
                    const std::map<std::string, std::string>& resolved_params,
                    const std::vector<std::string>& output_files, const std::string& started_at,
                    const std::string& finished_at, double wall_seconds) {
  nlohmann::json j;
  j["config_hash"] = hash_hex(config_text);
  j["code_version"] = uld::kVersion;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["wall_seconds"] = wall_seconds;
  j["parameters"] = resolved_params;
  nlohmann::json files = nlohmann::json::object();
  for (const std::string& f : output_files) files[f] = file_hash_hex(out_dir + "/" + f);
  j["file_checksums"] = files;
  std::ofstream out(out_dir + "/manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace uld::bench
