#include "rbdsde/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rbdsde/errors.hpp"

namespace rbdsde {

namespace {

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("manifest: cannot read output file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw Error("atomic_write: cannot open " + tmp);
        f << bytes;
        if (!f) throw Error("atomic_write: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("atomic_write: rename to " + path + " failed");
}

RunManifest::RunManifest(std::string command, std::uint64_t seed,
                         std::string config_echo)
    : command_(std::move(command)),
      seed_(seed),
      config_echo_(std::move(config_echo)),
      started_(timestamp_now()) {}

void RunManifest::add_metric(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    metrics_[key] = buf;
}

void RunManifest::add_metric(const std::string& key,
                             const std::string& value) {
    metrics_[key] = value;
}

void RunManifest::add_output(const std::string& path) {
    outputs_.push_back(path);
}

std::string RunManifest::write(const std::string& dir) {
    nlohmann::json j;
    j["artifact_version"] = kArtifactVersion;
    j["command"] = command_;
    j["seed"] = seed_;
    j["config"] = config_echo_;
    j["started"] = started_;
    j["finished"] = timestamp_now();
    j["metrics"] = metrics_;
    auto& outs = j["outputs"] = nlohmann::json::array();
    for (const std::string& path : outputs_) {
        const std::string bytes = read_file(path);
        outs.push_back({{"path", path},
                        {"bytes", bytes.size()},
                        {"fnv1a64", fnv1a64_hex(bytes)}});
    }
    const std::string path = dir + "/" + command_ + ".manifest.json";
    atomic_write(path, j.dump(2) + "\n");
    return path;
}

} // namespace rbdsde
