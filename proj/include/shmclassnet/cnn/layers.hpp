#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shmclassnet/cnn/tensor.hpp"

namespace shmclassnet::cnn {

// Causal 1D convolution. Weights are laid out [out][in][tau]:
//   out[o][t] = bias[o] + sum_{i, tau} w[o][i][tau] * in[i][t - tau],  in[i][s] = 0 for s < 0.
// Output length equals input length.
Tensor1D conv1d_forward(const Tensor1D& input, std::span<const double> weights,
                        std::span<const double> bias, std::size_t out_channels,
                        std::size_t kernel_length);

/// Accumulates dE/dw and dE/db into grad_weights / grad_bias and, when
/// grad_input is non-null, writes dE/d input.
void conv1d_backward(const Tensor1D& input, std::span<const double> weights,
                     const Tensor1D& grad_output, std::size_t kernel_length,
                     std::span<double> grad_weights, std::span<double> grad_bias,
                     Tensor1D* grad_input);

Tensor1D relu(const Tensor1D& x);
/// Gradient through relu given the layer's input.
Tensor1D relu_backward(const Tensor1D& input, const Tensor1D& grad_output);

enum class Mode { Train, Infer };

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

/// Statistics a train-mode batch norm normalizes with: the current example's
/// own (per channel, over time) or the running estimates.
enum class BatchNormStats { Example, Running };

struct BatchNormCache {
    std::vector<double> mean;      // per-channel statistics of this example
    std::vector<double> variance;  // biased
    std::vector<double> inv_std;   // scale actually applied
    Tensor1D normalized;
    bool running = false;          // normalized with running statistics
};

/// Batch normalization over the temporal axis of one example.
///
/// Train mode normalizes each channel by its own mean and (biased) variance
/// and, when `cache` is given, records them; `running_mean` / `running_var`
/// are then moved toward the example statistics with momentum 0.1 (the
/// running variance uses the unbiased estimate). Infer mode normalizes with
/// the running statistics and leaves them untouched.
///
/// With `stats == Running`, train mode normalizes with the running statistics
/// as they stand before this example (so train and infer outputs coincide);
/// the example statistics are still recorded and folded into the running ones.
Tensor1D batchnorm_forward(const Tensor1D& x, std::span<const double> gamma,
                           std::span<const double> beta, std::span<double> running_mean,
                           std::span<double> running_var, Mode mode,
                           BatchNormCache* cache = nullptr, double epsilon = kBatchNormEpsilon,
                           bool update_running = true, BatchNormStats stats = BatchNormStats::Example);

/// Train-mode gradient. Accumulates into grad_gamma / grad_beta.
Tensor1D batchnorm_backward(const BatchNormCache& cache, std::span<const double> gamma,
                            const Tensor1D& grad_output, std::span<double> grad_gamma,
                            std::span<double> grad_beta);

/// Moves running statistics toward the cached example statistics.
void batchnorm_update_running(const BatchNormCache& cache, std::size_t length,
                              std::span<double> running_mean, std::span<double> running_var,
                              double momentum = kBatchNormMomentum);

std::vector<double> global_avg_pool(const Tensor1D& x);
Tensor1D global_avg_pool_backward(std::size_t length, std::span<const double> grad_output);

/// logits = W v + b with W laid out [out][in].
std::vector<double> fc_forward(std::span<const double> v, std::span<const double> weight,
                               std::span<const double> bias);
/// Accumulates parameter gradients and returns dE/dv.
std::vector<double> fc_backward(std::span<const double> v, std::span<const double> weight,
                                std::span<const double> grad_output, std::span<double> grad_weight,
                                std::span<double> grad_bias);

/// Shifted-exponent softmax.
std::vector<double> softmax(std::span<const double> logits);

enum class LossKind { CrossEntropy, Mse };

/// Cross entropy: -log(max(p_true, 1e-15)). Mse: sum (p - r)^2.
double loss(std::span<const double> probs, std::span<const double> target, LossKind kind);

/// dE/d logits for softmax followed by `kind`.
std::vector<double> loss_grad_logits(std::span<const double> probs, std::span<const double> target,
                                     LossKind kind);

}  // namespace shmclassnet::cnn
