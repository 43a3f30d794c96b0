#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "shmclassnet/cnn/train.hpp"
#include "shmclassnet/cnn/weights_io.hpp"
#include "shmclassnet/pipeline/run_config.hpp"
#include "shmclassnet/signal/manifest.hpp"
#include "shmclassnet/signal/signal_io.hpp"

namespace shmclassnet::pipeline {

/// Seed of one generated signal: a pure function of (master, class, split, index).
std::uint64_t signal_seed(std::uint64_t master, std::size_t class_index, signal::Split split,
                          std::size_t index);

/// Seed of the shared ground motion of a Bouc-Wen record (independent of the class).
std::uint64_t ground_motion_seed(std::uint64_t master, signal::Split split, std::size_t index);

/// Simulates one labeled signal. Channels: measured "accel", "disp", "vel"
/// followed by the clean "accel_true", "disp_true", "vel_true" of the recorded DOF.
signal::LabeledSignal generate_signal(const RunConfig& cfg, std::size_t class_index, signal::Split split,
                                      std::size_t index);

/// Writes every train / validate / test signal plus `manifest.json` under
/// `out_dir` and returns the manifest path. File names are
/// `<split>/<label>_<index>.csv`.
std::filesystem::path simulate_dataset(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Kalman-filters every signal of a dataset (acceleration as input, measured
/// displacement as observation; acceleration is double-integrated when no
/// displacement channel exists). The result keeps the manifest layout and
/// marks signals `filtered`; truth channels are carried over.
std::filesystem::path fuse_dataset(const std::filesystem::path& manifest_path,
                                   const kalman::FusionSettings& settings,
                                   const std::filesystem::path& out_dir);

/// Network input built from a signal: the named channels, optionally z-scored per channel.
cnn::Tensor1D make_input(const signal::TimeSeries& series, const cnn::Preprocess& pre);

struct LoadedExamples {
    std::vector<cnn::LabeledExample> examples;
    std::vector<std::string> names;  // manifest paths, in order
};

LoadedExamples load_examples(const signal::DatasetManifest& manifest, signal::Split split,
                             const cnn::Preprocess& pre);

/// Per-channel mean and inverse standard deviation over every sample of
/// `examples` (inverse 1 for a constant channel).
std::pair<std::vector<double>, std::vector<double>> channel_standardization(
    const std::vector<cnn::LabeledExample>& examples);

}  // namespace shmclassnet::pipeline
