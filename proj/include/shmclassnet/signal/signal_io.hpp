#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::signal {

struct Provenance {
    std::string system;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
    double noise_ratio = 0.0;
    bool filtered = false;

    bool operator==(const Provenance&) const = default;
};

struct LabeledSignal {
    TimeSeries signal;
    std::string label;  // empty for unlabeled signals
    Provenance provenance;
};

/// `<dir>/<name>.csv` -> `<dir>/<name>.meta.json`
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

/// Writes `<name>.csv` (header `t,<ch0>,...`) and the JSON metadata sidecar.
/// Samples are written in shortest round-trip decimal form.
void write_signal(const LabeledSignal& labeled, const std::filesystem::path& csv_path);

/// Reads a signal written by `write_signal` (or produced externally in the same format).
/// Throws ParseError naming the line or field on malformed input and
/// Error("missing metadata ...") when the sidecar is absent.
LabeledSignal read_signal(const std::filesystem::path& csv_path);

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace shmclassnet::signal
