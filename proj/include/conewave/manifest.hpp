#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace conewave {

// FNV-1a 64-bit content hash.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

struct ManifestEntry {
    std::string name;  // path relative to the manifest
    std::uint64_t hash = 0;
    std::uint64_t bytes = 0;
};

// Deterministic run manifest: sorted entries, config hash, no timestamps.
// Reruns with identical inputs produce byte-identical manifests.
struct Manifest {
    std::string tool;
    std::string config_json;
    std::vector<ManifestEntry> entries;

    void add_file(const std::string& dir, const std::string& name);
    std::string to_json() const;
};

Manifest manifest_from_json(const std::string& text);

// Verifies every entry against the files next to the manifest; returns the
// names that are missing or whose hash differs.
std::vector<std::string> verify_manifest(const std::string& manifest_path);

void save_manifest(const Manifest& m, const std::string& path);

}  // namespace conewave
