#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shmclassnet/cnn/network.hpp"

namespace shmclassnet::cnn {

enum class LrSchedule { Constant, StepDecay };

struct TrainConfig {
    std::size_t epochs = 15;
    std::size_t mini_batch = 1;
    double learning_rate = 0.001;
    LrSchedule schedule = LrSchedule::Constant;
    double decay_factor = 0.5;      // StepDecay only
    std::size_t decay_every = 5;    // epochs, StepDecay only
    LossKind loss = LossKind::CrossEntropy;
    std::uint64_t shuffle_seed = 1;
    std::uint64_t weight_init_seed = 2;

    void validate() const;
    /// Learning rate used during the zero-based `epoch`.
    double rate_for_epoch(std::size_t epoch) const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct LabeledExample {
    Tensor1D input;
    std::vector<double> target;  // one-hot

    static LabeledExample make(Tensor1D input, std::size_t label, std::size_t num_classes);
    std::size_t label() const;
};

struct TrainRow {
    std::size_t iteration = 0;  // 1-based update count
    std::size_t epoch = 0;      // 1-based
    double train_loss = 0.0;    // mean loss of the mini-batch
    double train_acc = 0.0;     // fraction correct over the last epoch-length window of examples
    std::optional<double> val_acc;  // set on the last iteration of each epoch
};

struct TrainReport {
    std::size_t epochs = 0;
    std::size_t mini_batch = 0;
    double learning_rate = 0.0;
    std::vector<TrainRow> rows;

    /// CSV with header `iteration,epoch,train_loss,train_acc,val_acc`.
    void write_csv(std::ostream& os) const;
    void write_csv(const std::string& path) const;

    /// First iteration whose train_acc reaches `threshold`, if any. Rows of the
    /// first epoch whose window is still partly empty are skipped.
    std::optional<std::size_t> iterations_to_accuracy(double threshold) const;
    /// Mean train_loss over the final epoch.
    double final_epoch_loss() const;
};

/// params -= rate * grads.
void sgd_step(NetworkParams& params, const GradientSet& grads, double rate);

struct TrainResult {
    NetworkParams params;
    TrainReport report;
};

/// Shuffled mini-batch SGD. Starts from `initial` when given, otherwise from
/// init_params(spec, cfg.weight_init_seed). Throws when a class has no
/// training example and NumericalError (with the iteration) on divergence.
TrainResult train(const NetworkSpec& spec, const std::optional<NetworkParams>& initial,
                  const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& validation_set, const TrainConfig& cfg);

/// Fraction of examples classified correctly.
double accuracy(const NetworkSpec& spec, const NetworkParams& params,
                const std::vector<LabeledExample>& examples);

}  // namespace shmclassnet::cnn
