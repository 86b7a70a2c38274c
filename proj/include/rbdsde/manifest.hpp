#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rbdsde {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// FNV-1a 64-bit digest, the checksum recorded for every output file.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

/// Run record written after all outputs: config echo, seed, version,
/// timestamps, per-command summary metrics and the digests of every file
/// the run produced. Written atomically (temp file + rename).
class RunManifest {
public:
    RunManifest(std::string command, std::uint64_t seed,
                std::string config_echo);

    void add_metric(const std::string& key, double value);
    void add_metric(const std::string& key, const std::string& value);

    /// Registers an output file that already exists on disk.
    void add_output(const std::string& path);

    /// Finalizes timestamps and writes <dir>/<command>.manifest.json.
    std::string write(const std::string& dir);

private:
    std::string command_;
    std::uint64_t seed_;
    std::string config_echo_;
    std::string started_;
    std::map<std::string, std::string> metrics_;
    std::vector<std::string> outputs_;
};

/// Writes bytes to path via a temporary file and rename.
void atomic_write(const std::string& path, const std::string& bytes);

} // namespace rbdsde
