#include "conewave/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace conewave {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void Manifest::add_file(const std::string& dir, const std::string& name) {
    const std::string path = dir.empty() ? name : dir + "/" + name;
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot read " + path);
    ManifestEntry e;
    e.name = name;
    e.bytes = static_cast<std::uint64_t>(in.tellg());
    e.hash = fnv1a64_file(path);
    entries.push_back(e);
}

std::string Manifest::to_json() const {
    std::vector<ManifestEntry> sorted = entries;
    std::sort(sorted.begin(), sorted.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.name < b.name; });
    nlohmann::json j;
    j["tool"] = tool;
    j["config_hash"] = hash_hex(fnv1a64(config_json.data(), config_json.size()));
    j["files"] = nlohmann::json::array();
    for (const ManifestEntry& e : sorted)
        j["files"].push_back({{"name", e.name}, {"hash", hash_hex(e.hash)}, {"bytes", e.bytes}});
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    Manifest m;
    m.tool = j.value("tool", "");
    for (const auto& f : j.at("files")) {
        ManifestEntry e;
        e.name = f.at("name").get<std::string>();
        e.hash = std::stoull(f.at("hash").get<std::string>(), nullptr, 16);
        e.bytes = f.value("bytes", 0ULL);
        m.entries.push_back(e);
    }
    return m;
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot read " + manifest_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const Manifest m = manifest_from_json(ss.str());
    std::string dir = ".";
    const std::size_t slash = manifest_path.find_last_of('/');
    if (slash != std::string::npos) dir = manifest_path.substr(0, slash);
    std::vector<std::string> bad;
    for (const ManifestEntry& e : m.entries) {
        const std::string path = dir + "/" + e.name;
        std::ifstream f(path, std::ios::binary);
        if (!f) {
            bad.push_back(e.name);
            continue;
        }
        if (fnv1a64_file(path) != e.hash) bad.push_back(e.name);
    }
    return bad;
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << m.to_json();
}

}  // namespace conewave
