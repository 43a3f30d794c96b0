#include "shmclassnet/signal/signal_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shmclassnet/error.hpp"

namespace shmclassnet::signal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

void append_double(std::string& out, double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("failed to format sample value");
    out.append(buf, end);
}

double parse_double(std::string_view field, const std::string& where) {
    // from_chars rejects a leading '+'; accept it for externally produced files.
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ParseError(where, "invalid number '" + std::string(field) + "'");
    }
    return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

template <typename T>
T require_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": field '" + key + "'", "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": field '" + key + "'", e.what());
    }
}

}  // namespace

fs::path meta_path_for(const fs::path& csv_path) {
    fs::path p = csv_path;
    return p.replace_extension(".meta.json");
}

json to_json(const Provenance& p) {
    return json{{"system", p.system},
                {"seed", p.seed},
                {"params", p.params},
                {"noise_ratio", p.noise_ratio},
                {"filtered", p.filtered}};
}

Provenance provenance_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": field 'provenance'", "expected an object");
    Provenance p;
    const std::string w = where + ": provenance";
    p.system = require_field<std::string>(j, "system", w);
    p.seed = require_field<std::uint64_t>(j, "seed", w);
    p.params = j.contains("params") ? j.at("params") : json::object();
    p.noise_ratio = require_field<double>(j, "noise_ratio", w);
    p.filtered = require_field<bool>(j, "filtered", w);
    return p;
}

void write_signal(const LabeledSignal& labeled, const fs::path& csv_path) {
    const TimeSeries& s = labeled.signal;
    if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());

    std::string out;
    out.reserve(s.size() * (s.num_channels() + 1) * 24);
    out += "t";
    for (const auto& ch : s.channels()) {
        out += ',';
        out += ch.name;
    }
    out += '\n';
    for (std::size_t k = 0; k < s.size(); ++k) {
        append_double(out, s.time(k));
        for (std::size_t c = 0; c < s.num_channels(); ++c) {
            out += ',';
            append_double(out, s.data()[c][k]);
        }
        out += '\n';
    }
    {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw Error("cannot open '" + csv_path.string() + "' for writing");
        f << out;
    }

    json channels = json::array();
    for (const auto& ch : s.channels()) channels.push_back({{"name", ch.name}, {"unit", ch.unit}});
    json meta{{"format_version", kFormatVersion},
              {"dt", s.dt()},
              {"t0", s.t0()},
              {"label", labeled.label},
              {"channels", channels},
              {"provenance", to_json(labeled.provenance)}};
    std::ofstream m(meta_path_for(csv_path), std::ios::binary);
    if (!m) throw Error("cannot open '" + meta_path_for(csv_path).string() + "' for writing");
    m << meta.dump(2) << '\n';
}

LabeledSignal read_signal(const fs::path& csv_path) {
    const fs::path meta_path = meta_path_for(csv_path);
    if (!fs::exists(csv_path)) throw Error("signal file not found: " + csv_path.string());
    if (!fs::exists(meta_path)) {
        throw Error("missing metadata: expected sidecar " + meta_path.string());
    }

    const std::string mwhere = meta_path.string();
    json meta;
    {
        std::ifstream m(meta_path);
        try {
            meta = json::parse(m);
        } catch (const json::parse_error& e) {
            throw ParseError(mwhere + ": byte " + std::to_string(e.byte), e.what());
        }
    }
    if (!meta.is_object()) throw ParseError(mwhere, "expected a JSON object");
    const int version = require_field<int>(meta, "format_version", mwhere);
    if (version != kFormatVersion) {
        throw ParseError(mwhere + ": field 'format_version'",
                         "unsupported version " + std::to_string(version));
    }
    const double dt = require_field<double>(meta, "dt", mwhere);
    const double t0 = meta.contains("t0") ? require_field<double>(meta, "t0", mwhere) : 0.0;
    const std::string label = require_field<std::string>(meta, "label", mwhere);
    const json jch = require_field<json>(meta, "channels", mwhere);
    if (!jch.is_array() || jch.empty()) {
        throw ParseError(mwhere + ": field 'channels'", "expected a non-empty array");
    }
    std::vector<ChannelInfo> channels;
    for (std::size_t i = 0; i < jch.size(); ++i) {
        const std::string w = mwhere + ": channels[" + std::to_string(i) + "]";
        channels.push_back({require_field<std::string>(jch[i], "name", w),
                            require_field<std::string>(jch[i], "unit", w)});
    }
    Provenance prov = meta.contains("provenance")
                          ? provenance_from_json(meta.at("provenance"), mwhere)
                          : Provenance{};

    std::ifstream f(csv_path);
    if (!f) throw Error("cannot open '" + csv_path.string() + "'");
    const std::string cwhere = csv_path.string();
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(f, line)) throw ParseError(cwhere + ":1", "missing header row");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    if (header.size() != channels.size() + 1 || header.front() != "t") {
        throw ParseError(cwhere + ":1", "header must be 't' followed by " +
                                            std::to_string(channels.size()) + " channel names");
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (header[c + 1] != channels[c].name) {
            throw ParseError(cwhere + ":1", "column '" + std::string(header[c + 1]) +
                                                "' does not match metadata channel '" +
                                                channels[c].name + "'");
        }
    }

    std::vector<std::vector<double>> data(channels.size());
    std::size_t k = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const std::string where = cwhere + ":" + std::to_string(lineno);
        const auto fields = split_commas(line);
        if (fields.size() != channels.size() + 1) {
            throw ParseError(where, "expected " + std::to_string(channels.size() + 1) +
                                        " fields, found " + std::to_string(fields.size()));
        }
        const double t = parse_double(fields[0], where);
        const double expected = t0 + static_cast<double>(k) * dt;
        if (std::abs(t - expected) > 1e-6 * (1.0 + std::abs(expected))) {
            throw ParseError(where, "time " + std::string(fields[0]) +
                                        " is off the uniform grid (dt from metadata)");
        }
        for (std::size_t c = 0; c < channels.size(); ++c) {
            data[c].push_back(parse_double(fields[c + 1], where));
        }
        ++k;
    }
    if (k == 0) throw ParseError(cwhere, "no samples");
    return LabeledSignal{TimeSeries(dt, std::move(channels), std::move(data), t0), label,
                         std::move(prov)};
}

}  // namespace shmclassnet::signal
