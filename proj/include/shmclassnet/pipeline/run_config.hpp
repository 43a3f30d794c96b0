#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shmclassnet/cnn/train.hpp"
#include "shmclassnet/kalman/kalman.hpp"

namespace shmclassnet::pipeline {

enum class SystemKind { Linear, FreeFall, BoucWen };
std::string to_string(SystemKind k);
SystemKind system_kind_from_string(const std::string& s);

/// Response quantity fed to the network.
enum class SignalChannel { Disp, Vel, Accel };
std::string to_string(SignalChannel c);
SignalChannel signal_channel_from_string(const std::string& s);

/// Where the displacement "measurement" comes from.
enum class DispSource {
    Independent, // clean displacement plus its own measurement noise
    Integrated   // double integral of the noisy acceleration
};
std::string to_string(DispSource d);
DispSource disp_source_from_string(const std::string& s);

struct Counts {
    std::size_t train_per_class = 3;
    std::size_t validate_per_class = 3;
    std::size_t test_per_class = 3;
};

struct RunConfig {
    std::string preset;
    SystemKind system = SystemKind::Linear;
    std::vector<std::string> classes{"A", "B", "C"};
    std::size_t dof = 2;  // 1-based degree of freedom (story) that is recorded
    SignalChannel channel = SignalChannel::Disp;
    bool fuse = false;
    double noise_ratio = 0.1;
    double dt = 0.01;
    double duration = 40.0;
    Counts counts;
    std::string network = "desk-scale";
    cnn::TrainConfig train;
    std::uint64_t seed = 2023;
    bool zscore = false;
    bool standardize = false;  // network inputs scaled by training-split mean and std
    DispSource disp_source = DispSource::Independent;

    // excitation
    double force_variance = 9.0;   // linear and free-fall white-noise force
    bool random_initial_conditions = true;  // linear: perturb x0, v0 per signal
    double initial_condition_spread = 0.5;  // half-width of the uniform perturbation
    bool total_accel = false;       // Bouc-Wen: report absolute accelerations
    std::vector<double> train_peaks_g{1.080, 0.827, 0.818};  // Bouc-Wen training records
    double eval_peak_min_g = 0.8;   // Bouc-Wen validate/test record peaks are drawn in this range
    double eval_peak_max_g = 1.1;

    kalman::FusionSettings fusion;

    void validate() const;
};

/// Named setups: linear3, freefall2, boucwen3 (datasets) and
/// fig2..fig7, sensitivity (reproduction runs).
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const RunConfig& c);
/// Fields missing from `j` keep the values of `base` (or of j["preset"] when given).
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace shmclassnet::pipeline
