#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "shmclassnet/cnn/layers.hpp"
#include "shmclassnet/cnn/network_spec.hpp"
#include "shmclassnet/cnn/tensor.hpp"

namespace shmclassnet::cnn {

/// Trainable state of one layer. For conv and fully connected layers
/// `weight`/`bias` are the kernel and bias; for batch norm they are the
/// scale and shift, plus running statistics. Parameter-free layers keep
/// everything empty.
struct LayerParams {
    std::vector<double> weight;
    std::vector<double> bias;
    std::vector<double> running_mean;
    std::vector<double> running_var;

    bool operator==(const LayerParams&) const = default;
};

struct NetworkParams {
    std::vector<LayerParams> layers;

    bool operator==(const NetworkParams&) const = default;
};

/// dE/d weight and dE/d bias per layer, mirroring NetworkParams.
struct LayerGrads {
    std::vector<double> weight;
    std::vector<double> bias;
};

struct GradientSet {
    std::vector<LayerGrads> layers;
};

/// All weights and biases zero; batch-norm scale 1, running variance 1.
NetworkParams zero_params(const NetworkSpec& spec);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)) for conv and fully connected
/// weights (conv fans include the kernel length); biases zero.
NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed);

GradientSet zero_grads(const NetworkSpec& spec, const NetworkParams& params);

/// Throws ShapeError when params do not match spec.
void check_params(const NetworkSpec& spec, const NetworkParams& params);

/// Per-layer intermediate values kept for backpropagation.
struct ForwardCache {
    std::vector<Tensor1D> inputs;             // input tensor of each tensor-valued layer
    std::vector<BatchNormCache> batchnorm;    // indexed by layer (empty for other layers)
    std::vector<double> pooled;               // input to the fully connected head
    std::size_t length = 0;                   // temporal length before pooling
    std::vector<double> logits;
};

struct ForwardResult {
    std::vector<double> probs;
    std::vector<double> logits;
    std::optional<ForwardCache> cache;  // present in train mode only
};

/// Runs the layer list. Train mode normalizes with per-example statistics
/// and returns a cache; it does not touch `params` (see update_running_stats).
ForwardResult network_forward(const NetworkSpec& spec, const NetworkParams& params,
                              const Tensor1D& input, Mode mode);

/// Exact gradient of the loss for the forward pass that produced `cache`.
GradientSet network_backward(const NetworkSpec& spec, const NetworkParams& params,
                             const ForwardCache& cache, std::span<const double> target,
                             LossKind kind);

/// Applies the batch-norm running-statistics update recorded in `cache`.
void update_running_stats(const NetworkSpec& spec, NetworkParams& params, const ForwardCache& cache);

/// Index of the most probable class (lowest index on ties) and the probabilities.
std::pair<std::size_t, std::vector<double>> classify(const NetworkSpec& spec,
                                                     const NetworkParams& params,
                                                     const Tensor1D& signal);

}  // namespace shmclassnet::cnn
