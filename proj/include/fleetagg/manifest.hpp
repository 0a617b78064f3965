#ifndef FLEETAGG_MANIFEST_HPP
#define FLEETAGG_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fleetagg {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility record written next to the outputs of every CLI run.
struct RunManifest {
    std::string command;
    std::string config;  // effective configuration, config-file syntax
    std::optional<std::uint64_t> seed;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    double wall_time_seconds = 0.0;
    std::string version;

    /// JSON with input digests computed at write time.
    void write(const std::filesystem::path& path) const;
};

}  // namespace fleetagg

#endif  // FLEETAGG_MANIFEST_HPP
