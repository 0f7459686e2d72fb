#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace uld::bench {

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);
std::string file_hash_hex(const std::string& path);

// Writes manifest.json: config hash, code version, timestamps, per-output-file
// checksums, and the resolved parameter echo.
void write_manifest(const std::string& out_dir, const std::string& config_text,
                    const std::map<std::string, std::string>& resolved_params,
                    const std::vector<std::string>& output_files, const std::string& started_at,
                    const std::string& finished_at, double wall_seconds);

std::string timestamp_now();

}  // namespace uld::bench
