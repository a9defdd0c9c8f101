#ifndef CMP_WORKBENCH_HPP
#define CMP_WORKBENCH_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cmp {

struct ArtifactEntry {
    std::string filename;
    std::string digest;  // fnv1a-64 of the file bytes, hex
};

struct ArtifactManifest {
    std::vector<ArtifactEntry> entries;
    std::string serialize() const;
};

/// One batch task: anticrossing, bloch, sidebands, tsm-sensitivity,
/// lsm-sensitivity, fit, or scan-limit, with its parameter blocks held as
/// parsed JSON.
struct RunConfig {
    std::string task;
    std::string raw_json;                 // full config document
    std::filesystem::path config_dir;     // for resolving relative inputs
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    bool force_overwrite = false;

    static RunConfig load(const std::filesystem::path& config_path,
                          const std::filesystem::path& output_dir,
                          std::uint64_t seed, bool force_overwrite);
};

/// Executes the task and writes its artifacts plus manifest.json.
/// Identical config and seed reproduce byte-identical artifacts.
ArtifactManifest run(const RunConfig& config);

/// Re-hashes every manifest entry against the files on disk.
bool verify_manifest(const ArtifactManifest& manifest,
                     const std::filesystem::path& output_dir);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace cmp

#endif
