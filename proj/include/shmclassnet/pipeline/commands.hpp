#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shmclassnet/cnn/gradcheck.hpp"
#include "shmclassnet/cnn/weights_io.hpp"
#include "shmclassnet/pipeline/run_config.hpp"
#include "shmclassnet/signal/manifest.hpp"

namespace shmclassnet::pipeline {

struct EvaluationRow {
    std::string name;
    std::optional<std::size_t> true_label;  // empty for unlabeled signals
    std::size_t predicted = 0;
    std::vector<double> probabilities;
};

struct EvaluationReport {
    std::vector<std::string> classes;
    std::vector<EvaluationRow> rows;
    std::vector<std::size_t> correct;    // per true class
    std::vector<std::size_t> incorrect;  // per true class

    explicit EvaluationReport(std::vector<std::string> class_names = {});

    void add(EvaluationRow row);
    std::size_t labeled_count() const;
    std::size_t correct_count() const;
    /// Σ correct / Σ labeled; nullopt when no row carries a label.
    std::optional<double> accuracy() const;

    /// `signal,true_label,predicted_label,p_<class>...,correct`
    void write_csv(std::ostream& os) const;
    void write_csv(const std::filesystem::path& path) const;
    /// `class,correct,incorrect,total` plus an `overall` row.
    void write_summary_csv(const std::filesystem::path& path) const;
    nlohmann::json summary() const;
};

/// Network input preparation implied by a run configuration.
cnn::Preprocess preprocess_for(const RunConfig& cfg);
/// The architecture named by `cfg.network` sized for the run's classes.
cnn::NetworkSpec network_for(const RunConfig& cfg);
/// cfg.train with its shuffle and weight-init seeds mixed with the master seed.
cnn::TrainConfig train_config_for(const RunConfig& cfg);

/// Generates the dataset and stores the effective configuration next to the
/// manifest as `run_config.json`. Returns the manifest path.
std::filesystem::path cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);

std::filesystem::path cmd_fuse(const std::filesystem::path& manifest_path,
                               const kalman::FusionSettings& settings, const std::filesystem::path& out_dir);

struct TrainOutputs {
    std::filesystem::path weights_path;
    std::filesystem::path report_path;
    cnn::WeightsFile weights;
    cnn::TrainReport report;
};

/// Trains on the train split (validating on the validate split when present)
/// and writes `weights.json` and `train_report.csv` into `out_dir`. With
/// `pre.standardize` and no stored offset, offset/scale are fitted on the
/// train split first.
TrainOutputs cmd_train(const std::filesystem::path& manifest_path, const cnn::NetworkSpec& spec,
                       cnn::Preprocess pre, const cnn::TrainConfig& train_cfg,
                       const std::filesystem::path& out_dir);

/// Classifies signal files. A signal's label counts as its true label when it
/// names one of the network's classes.
EvaluationReport classify_signals(const cnn::WeightsFile& weights,
                                  const std::vector<std::filesystem::path>& signal_paths);
EvaluationReport cmd_classify(const std::filesystem::path& weights_path,
                              const std::vector<std::filesystem::path>& signal_paths,
                              const std::optional<std::filesystem::path>& out_csv);

EvaluationReport evaluate(const cnn::WeightsFile& weights, const signal::DatasetManifest& manifest,
                          signal::Split split);
/// Writes `evaluation.csv` and `evaluation_summary.csv` into `out_dir`.
EvaluationReport cmd_evaluate(const std::filesystem::path& weights_path,
                              const std::filesystem::path& manifest_path, signal::Split split,
                              const std::filesystem::path& out_dir);

struct NetOutcome {
    std::string name;  // bundle subdirectory
    TrainOutputs train;
    EvaluationReport evaluation;
};

struct ReproduceResult {
    RunConfig config;
    std::vector<NetOutcome> nets;  // raw_net, fused_net and, for `sensitivity`, desk_net

    const NetOutcome& net(const std::string& name) const;
};

/// simulate -> fuse -> train raw and fused networks -> evaluate on the test
/// split. The `sensitivity` preset also trains the desk-scale network on the
/// same raw data for comparison. Writes a bundle with every CSV plus
/// `summary.json` under `out_dir`.
ReproduceResult cmd_reproduce(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Two-block network with kernel 1..6, 1..4 maps per block, 1..3 input
/// channels, 2..4 classes and either batch-norm mode, drawn from `seed`.
cnn::NetworkSpec random_small_spec(std::uint64_t seed);

/// Gradient check of one randomly initialized network on one random input.
cnn::GradCheckReport cmd_gradcheck(const cnn::NetworkSpec& spec, std::size_t length, std::uint64_t seed,
                                   const cnn::GradCheckOptions& opts);

}  // namespace shmclassnet::pipeline
