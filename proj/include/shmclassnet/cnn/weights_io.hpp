#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shmclassnet/cnn/train.hpp"

namespace shmclassnet::cnn {

/// How raw signals were turned into network input.
struct Preprocess {
    std::vector<std::string> channels{"disp"};
    bool zscore = false;        // per-signal zero mean, unit variance
    bool standardize = false;   // fit offset/scale on the training split
    std::vector<double> offset;  // per channel, applied as (x - offset) * scale; empty = identity
    std::vector<double> scale;

    bool operator==(const Preprocess&) const = default;
};

/// Everything needed to classify with a trained network.
struct WeightsFile {
    NetworkSpec spec;
    NetworkParams params;
    TrainConfig train_config;
    std::vector<std::string> classes;
    Preprocess preprocess;
};

nlohmann::json to_json(const WeightsFile& w);
WeightsFile weights_from_json(const nlohmann::json& j);

/// Writes indented JSON; output is a pure function of the contents.
void save_weights(const WeightsFile& w, const std::string& path);
WeightsFile load_weights(const std::string& path);

}  // namespace shmclassnet::cnn
