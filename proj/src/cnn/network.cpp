#include "shmclassnet/cnn/network.hpp"

#include <cmath>
#include <random>

#include "shmclassnet/error.hpp"

namespace shmclassnet::cnn {

namespace {

struct ParamShape {
    std::size_t weight = 0;
    std::size_t bias = 0;
    std::size_t stats = 0;
};

ParamShape shape_of(const NetworkSpec& spec, std::size_t i) {
    const auto& l = spec.layers[i];
    const std::size_t in = spec.channels_into(i);
    switch (l.kind) {
        case LayerKind::Conv: return {l.out_channels * in * l.kernel_length, l.out_channels, 0};
        case LayerKind::BatchNorm: return {in, in, in};
        case LayerKind::FullyConnected: return {l.out_channels * in, l.out_channels, 0};
        default: return {};
    }
}

}  // namespace

NetworkParams zero_params(const NetworkSpec& spec) {
    spec.validate();
    NetworkParams p;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto s = shape_of(spec, i);
        LayerParams lp;
        if (spec.layers[i].kind == LayerKind::BatchNorm) {
            lp.weight.assign(s.weight, 1.0);
            lp.bias.assign(s.bias, 0.0);
            lp.running_mean.assign(s.stats, 0.0);
            lp.running_var.assign(s.stats, 1.0);
        } else {
            lp.weight.assign(s.weight, 0.0);
            lp.bias.assign(s.bias, 0.0);
        }
        p.layers.push_back(std::move(lp));
    }
    return p;
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
    NetworkParams p = zero_params(spec);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& l = spec.layers[i];
        const auto in = static_cast<double>(spec.channels_into(i));
        double fan_in = 0.0, fan_out = 0.0;
        if (l.kind == LayerKind::Conv) {
            fan_in = in * static_cast<double>(l.kernel_length);
            fan_out = static_cast<double>(l.out_channels * l.kernel_length);
        } else if (l.kind == LayerKind::FullyConnected) {
            fan_in = in;
            fan_out = static_cast<double>(l.out_channels);
        } else {
            continue;
        }
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> uni(-bound, bound);
        for (double& w : p.layers[i].weight) w = uni(rng);
    }
    return p;
}

void check_params(const NetworkSpec& spec, const NetworkParams& params) {
    if (params.layers.size() != spec.layers.size()) {
        throw ShapeError("parameter set has " + std::to_string(params.layers.size()) +
                         " layers, network spec has " + std::to_string(spec.layers.size()));
    }
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto s = shape_of(spec, i);
        const auto& lp = params.layers[i];
        if (lp.weight.size() != s.weight || lp.bias.size() != s.bias ||
            lp.running_mean.size() != s.stats || lp.running_var.size() != s.stats) {
            throw ShapeError("parameters of layer " + std::to_string(i) + " (" +
                             to_string(spec.layers[i].kind) + ") do not match the spec");
        }
    }
}

GradientSet zero_grads(const NetworkSpec& spec, const NetworkParams& params) {
    check_params(spec, params);
    GradientSet g;
    for (const auto& lp : params.layers) {
        g.layers.push_back({std::vector<double>(lp.weight.size(), 0.0), std::vector<double>(lp.bias.size(), 0.0)});
    }
    return g;
}

ForwardResult network_forward(const NetworkSpec& spec, const NetworkParams& params,
                              const Tensor1D& input, Mode mode) {
    spec.validate();
    check_params(spec, params);
    input.validate();
    if (input.channels != spec.input_channels) {
        throw ShapeError("input has " + std::to_string(input.channels) + " channels, network expects " +
                         std::to_string(spec.input_channels));
    }

    const bool train = mode == Mode::Train;
    ForwardResult result;
    ForwardCache cache;
    if (train) {
        cache.inputs.resize(spec.layers.size());
        cache.batchnorm.resize(spec.layers.size());
        cache.length = input.length;
    }

    Tensor1D x = input;
    std::vector<double> v;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& l = spec.layers[i];
        const auto& lp = params.layers[i];
        switch (l.kind) {
            case LayerKind::Conv: {
                Tensor1D y = conv1d_forward(x, lp.weight, lp.bias, l.out_channels, l.kernel_length);
                if (train) cache.inputs[i] = std::move(x);
                x = std::move(y);
                break;
            }
            case LayerKind::Relu: {
                Tensor1D y = relu(x);
                if (train) cache.inputs[i] = std::move(x);
                x = std::move(y);
                break;
            }
            case LayerKind::BatchNorm: {
                // running stats are only read here; the copies satisfy the mutable span API
                std::vector<double> rm = lp.running_mean;
                std::vector<double> rv = lp.running_var;
                x = batchnorm_forward(x, lp.weight, lp.bias, rm, rv, mode,
                                      train ? &cache.batchnorm[i] : nullptr, kBatchNormEpsilon,
                                      /*update_running=*/false, l.bn_stats);
                break;
            }
            case LayerKind::GlobalAvgPool:
                v = global_avg_pool(x);
                if (train) cache.pooled = v;
                break;
            case LayerKind::FullyConnected:
                result.logits = fc_forward(v, lp.weight, lp.bias);
                break;
        }
    }
    result.probs = softmax(result.logits);
    if (train) {
        cache.logits = result.logits;
        result.cache = std::move(cache);
    }
    return result;
}

GradientSet network_backward(const NetworkSpec& spec, const NetworkParams& params,
                             const ForwardCache& cache, std::span<const double> target,
                             LossKind kind) {
    if (target.size() != spec.num_classes) throw ShapeError("target size does not match class count");
    GradientSet g = zero_grads(spec, params);
    const std::vector<double> probs = softmax(cache.logits);
    std::vector<double> dv = loss_grad_logits(probs, target, kind);
    Tensor1D dx;

    // the first layer never needs an input gradient
    for (std::size_t ii = spec.layers.size(); ii-- > 0;) {
        const auto& l = spec.layers[ii];
        const auto& lp = params.layers[ii];
        auto& lg = g.layers[ii];
        switch (l.kind) {
            case LayerKind::FullyConnected:
                dv = fc_backward(cache.pooled, lp.weight, dv, lg.weight, lg.bias);
                break;
            case LayerKind::GlobalAvgPool:
                dx = global_avg_pool_backward(cache.length, dv);
                break;
            case LayerKind::BatchNorm:
                dx = batchnorm_backward(cache.batchnorm[ii], lp.weight, dx, lg.weight, lg.bias);
                break;
            case LayerKind::Relu:
                dx = relu_backward(cache.inputs[ii], dx);
                break;
            case LayerKind::Conv: {
                Tensor1D din;
                conv1d_backward(cache.inputs[ii], lp.weight, dx, l.kernel_length, lg.weight, lg.bias,
                                ii > 0 ? &din : nullptr);
                dx = std::move(din);
                break;
            }
        }
    }
    return g;
}

void update_running_stats(const NetworkSpec& spec, NetworkParams& params, const ForwardCache& cache) {
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (spec.layers[i].kind != LayerKind::BatchNorm) continue;
        batchnorm_update_running(cache.batchnorm[i], cache.length, params.layers[i].running_mean,
                                 params.layers[i].running_var);
    }
}

std::pair<std::size_t, std::vector<double>> classify(const NetworkSpec& spec,
                                                     const NetworkParams& params,
                                                     const Tensor1D& signal) {
    auto fwd = network_forward(spec, params, signal, Mode::Infer);
    std::size_t best = 0;
    for (std::size_t j = 1; j < fwd.probs.size(); ++j) {
        if (fwd.probs[j] > fwd.probs[best]) best = j;
    }
    return {best, std::move(fwd.probs)};
}

}  // namespace shmclassnet::cnn
