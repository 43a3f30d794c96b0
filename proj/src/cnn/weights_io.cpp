#include "shmclassnet/cnn/weights_io.hpp"

#include <fstream>

#include "shmclassnet/error.hpp"

namespace shmclassnet::cnn {

namespace {

using nlohmann::json;

std::vector<std::size_t> weight_shape(const NetworkSpec& spec, std::size_t i) {
    const auto& l = spec.layers[i];
    const std::size_t in = spec.channels_into(i);
    switch (l.kind) {
        case LayerKind::Conv: return {l.out_channels, in, l.kernel_length};
        case LayerKind::FullyConnected: return {l.out_channels, in};
        case LayerKind::BatchNorm: return {in};
        default: return {};
    }
}

json nest(const std::vector<double>& flat, const std::vector<std::size_t>& shape, std::size_t dim,
          std::size_t offset) {
    if (dim + 1 == shape.size()) {
        return json(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                                        flat.begin() + static_cast<std::ptrdiff_t>(offset + shape[dim])));
    }
    std::size_t stride = 1;
    for (std::size_t d = dim + 1; d < shape.size(); ++d) stride *= shape[d];
    json arr = json::array();
    for (std::size_t i = 0; i < shape[dim]; ++i) arr.push_back(nest(flat, shape, dim + 1, offset + i * stride));
    return arr;
}

void flatten(const json& j, const std::vector<std::size_t>& shape, std::size_t dim, std::vector<double>& out,
             const std::string& where) {
    if (!j.is_array() || j.size() != shape[dim]) throw ParseError(where, "array shape does not match the spec");
    for (const auto& v : j) {
        if (dim + 1 == shape.size()) {
            if (!v.is_number()) throw ParseError(where, "expected a number");
            out.push_back(v.get<double>());
        } else {
            flatten(v, shape, dim + 1, out, where);
        }
    }
}

}  // namespace

json to_json(const WeightsFile& w) {
    check_params(w.spec, w.params);
    json layers = json::array();
    for (std::size_t i = 0; i < w.spec.layers.size(); ++i) {
        const auto& lp = w.params.layers[i];
        const auto shape = weight_shape(w.spec, i);
        json l = {{"type", to_string(w.spec.layers[i].kind)}};
        if (!shape.empty()) {
            l["shapes"] = {{"weight", shape}, {"bias", {lp.bias.size()}}};
            l["weight"] = nest(lp.weight, shape, 0, 0);
            l["bias"] = lp.bias;
        }
        if (!lp.running_mean.empty()) {
            l["running_mean"] = lp.running_mean;
            l["running_var"] = lp.running_var;
        }
        layers.push_back(std::move(l));
    }
    return {{"format_version", 1},
            {"spec", to_json(w.spec)},
            {"layers", std::move(layers)},
            {"train_config", to_json(w.train_config)},
            {"seeds", {{"weight_init", w.train_config.weight_init_seed}, {"shuffle", w.train_config.shuffle_seed}}},
            {"classes", w.classes},
            {"preprocess",
             {{"channels", w.preprocess.channels},
              {"zscore", w.preprocess.zscore},
              {"standardize", w.preprocess.standardize},
              {"offset", w.preprocess.offset},
              {"scale", w.preprocess.scale}}}};
}

WeightsFile weights_from_json(const json& j) {
    if (j.value("format_version", 0) != 1) throw ParseError("format_version", "unsupported weights format");
    WeightsFile w;
    w.spec = network_spec_from_json(j.at("spec"));
    w.spec.validate();
    w.params = zero_params(w.spec);
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != w.spec.layers.size()) {
        throw ParseError("layers", "layer count does not match the spec");
    }
    for (std::size_t i = 0; i < w.spec.layers.size(); ++i) {
        const std::string where = "layers[" + std::to_string(i) + "]";
        const auto& l = layers[i];
        if (l.value("type", std::string()) != to_string(w.spec.layers[i].kind)) {
            throw ParseError(where + ".type", "layer type does not match the spec");
        }
        auto& lp = w.params.layers[i];
        const auto shape = weight_shape(w.spec, i);
        if (!shape.empty()) {
            lp.weight.clear();
            flatten(l.at("weight"), shape, 0, lp.weight, where + ".weight");
            lp.bias = l.at("bias").get<std::vector<double>>();
        }
        if (!lp.running_mean.empty()) {
            lp.running_mean = l.at("running_mean").get<std::vector<double>>();
            lp.running_var = l.at("running_var").get<std::vector<double>>();
        }
    }
    check_params(w.spec, w.params);
    if (j.contains("train_config")) w.train_config = train_config_from_json(j.at("train_config"));
    w.classes = j.value("classes", std::vector<std::string>{});
    if (j.contains("preprocess")) {
        const auto& p = j.at("preprocess");
        w.preprocess.channels = p.value("channels", w.preprocess.channels);
        w.preprocess.zscore = p.value("zscore", false);
        w.preprocess.standardize = p.value("standardize", false);
        w.preprocess.offset = p.value("offset", std::vector<double>{});
        w.preprocess.scale = p.value("scale", std::vector<double>{});
        const auto nch = w.preprocess.channels.size();
        if ((!w.preprocess.offset.empty() && w.preprocess.offset.size() != nch) ||
            w.preprocess.scale.size() != w.preprocess.offset.size()) {
            throw ParseError("preprocess", "offset and scale need one entry per channel");
        }
    }
    return w;
}

void save_weights(const WeightsFile& w, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    f << to_json(w).dump(1) << '\n';
    if (!f) throw Error("failed writing " + path);
}

WeightsFile load_weights(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open weights file " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ParseError(path, e.what());
    }
    try {
        return weights_from_json(j);
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
}

}  // namespace shmclassnet::cnn
