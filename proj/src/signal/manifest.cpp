#include "shmclassnet/signal/manifest.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "shmclassnet/error.hpp"

namespace shmclassnet::signal {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validate: return "validate";
        case Split::Test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "validate") return Split::Validate;
    if (s == "test") return Split::Test;
    throw Error("unknown split '" + s + "' (expected train, validate or test)");
}

std::size_t DatasetManifest::class_index(const std::string& label) const {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw Error("label '" + label + "' is not a declared class");
    return static_cast<std::size_t>(it - classes.begin());
}

std::vector<ManifestEntry> DatasetManifest::entries_for(Split split) const {
    std::vector<ManifestEntry> out;
    std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
                 [&](const ManifestEntry& e) { return e.split == split; });
    return out;
}

DatasetManifest load_manifest(const fs::path& manifest_path) {
    const std::string where = manifest_path.string();
    std::ifstream f(manifest_path);
    if (!f) throw Error("cannot open manifest '" + where + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ParseError(where + ": byte " + std::to_string(e.byte), e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1) {
            throw ParseError(where + ": field 'format_version'", "unsupported version");
        }
        DatasetManifest m;
        m.classes = j.at("classes").get<std::vector<std::string>>();
        if (m.classes.empty()) throw ParseError(where + ": field 'classes'", "no classes declared");
        const fs::path base = manifest_path.parent_path();
        const auto& entries = j.at("entries");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            const std::string ew = where + ": entries[" + std::to_string(i) + "]";
            ManifestEntry me;
            me.path = e.at("path").get<std::string>();
            if (me.path.is_relative()) me.path = base / me.path;
            me.label = e.at("label").get<std::string>();
            me.split = split_from_string(e.at("split").get<std::string>());
            if (std::find(m.classes.begin(), m.classes.end(), me.label) == m.classes.end()) {
                throw ParseError(ew + ": field 'label'", "'" + me.label + "' is not a declared class");
            }
            if (!fs::exists(me.path)) {
                throw Error("manifest entry " + std::to_string(i) + " references missing file: " +
                            me.path.string());
            }
            m.entries.push_back(std::move(me));
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(where, e.what());
    }
}

void save_manifest(const DatasetManifest& manifest, const fs::path& manifest_path) {
    const fs::path base = manifest_path.parent_path();
    if (!base.empty()) fs::create_directories(base);
    json entries = json::array();
    for (const auto& e : manifest.entries) {
        fs::path p = e.path;
        if (p.is_absolute() || !base.empty()) {
            std::error_code ec;
            auto rel = fs::relative(p, base.empty() ? fs::current_path() : base, ec);
            if (!ec && !rel.empty()) p = rel;
        }
        entries.push_back({{"path", p.generic_string()}, {"label", e.label}, {"split", to_string(e.split)}});
    }
    json j{{"format_version", 1}, {"classes", manifest.classes}, {"entries", entries}};
    std::ofstream f(manifest_path, std::ios::binary);
    if (!f) throw Error("cannot open '" + manifest_path.string() + "' for writing");
    f << j.dump(2) << '\n';
}

}  // namespace shmclassnet::signal
