#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace shmclassnet::signal {

enum class Split { Train, Validate, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct ManifestEntry {
    std::filesystem::path path;  // relative to the manifest directory when stored
    std::string label;
    Split split = Split::Train;
};

/// Labeled signal collection with train / validate / test splits.
struct DatasetManifest {
    std::vector<std::string> classes;
    std::vector<ManifestEntry> entries;

    std::size_t class_index(const std::string& label) const;
    std::vector<ManifestEntry> entries_for(Split split) const;
};

/// Reads `manifest.json`. Entry paths are resolved against the manifest's
/// directory and each must name an existing signal file; labels must be
/// declared in `classes`.
DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

/// Writes `manifest.json`; entry paths are stored relative to the manifest
/// directory when possible.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& manifest_path);

}  // namespace shmclassnet::signal
