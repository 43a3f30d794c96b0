#include "shmclassnet/cnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "shmclassnet/error.hpp"

namespace shmclassnet::cnn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

// Tap tau of a [out][in][tau] kernel as an out x in matrix.
RowMat tap_matrix(std::span<const double> weights, std::size_t out_ch, std::size_t in_ch,
                  std::size_t kernel_length, std::size_t tau) {
    RowMat m(static_cast<Eigen::Index>(out_ch), static_cast<Eigen::Index>(in_ch));
    for (std::size_t o = 0; o < out_ch; ++o) {
        for (std::size_t i = 0; i < in_ch; ++i) {
            m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) =
                weights[(o * in_ch + i) * kernel_length + tau];
        }
    }
    return m;
}

// Eigen picks its vectorized summation order from the address alignment, so the
// operands are copied into Eigen-owned (aligned) storage to keep results
// independent of where the caller's buffers happen to live.
RowMat aligned_copy(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
    return ConstRowMap(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

}  // namespace

Tensor1D conv1d_forward(const Tensor1D& input, std::span<const double> weights,
                        std::span<const double> bias, std::size_t out_channels,
                        std::size_t kernel_length) {
    const std::size_t in_ch = input.channels;
    const std::size_t L = input.length;
    if (kernel_length < 1 || weights.size() != out_channels * in_ch * kernel_length ||
        bias.size() != out_channels) {
        throw ShapeError("conv1d: weights are " + std::to_string(weights.size()) + " values, expected " +
                         std::to_string(out_channels) + "x" + std::to_string(in_ch) + "x" +
                         std::to_string(kernel_length));
    }
    if (input.values.size() != in_ch * L) throw ShapeError("conv1d: input buffer does not match its shape");
    Tensor1D out(out_channels, L);
    const auto Li = static_cast<Eigen::Index>(L);
    const RowMat x = aligned_copy(input.values, in_ch, L);
    RowMat y(static_cast<Eigen::Index>(out_channels), Li);
    for (std::size_t o = 0; o < out_channels; ++o) y.row(static_cast<Eigen::Index>(o)).setConstant(bias[o]);

    // y[:, tau:] += W_tau * x[:, :L - tau]
    const std::size_t taps = std::min(kernel_length, L);
    for (std::size_t tau = 0; tau < taps; ++tau) {
        const RowMat w = tap_matrix(weights, out_channels, in_ch, kernel_length, tau);
        const auto t = static_cast<Eigen::Index>(tau);
        y.rightCols(Li - t).noalias() += w * x.leftCols(Li - t);
    }
    RowMap(out.values.data(), static_cast<Eigen::Index>(out_channels), Li) = y;
    return out;
}

void conv1d_backward(const Tensor1D& input, std::span<const double> weights,
                     const Tensor1D& grad_output, std::size_t kernel_length,
                     std::span<double> grad_weights, std::span<double> grad_bias,
                     Tensor1D* grad_input) {
    const std::size_t in_ch = input.channels;
    const std::size_t out_ch = grad_output.channels;
    const std::size_t L = input.length;
    if (grad_output.length != L || weights.size() != out_ch * in_ch * kernel_length ||
        grad_weights.size() != weights.size() || grad_bias.size() != out_ch) {
        throw ShapeError("conv1d_backward: shape mismatch");
    }
    const auto Li = static_cast<Eigen::Index>(L);
    const auto Ii = static_cast<Eigen::Index>(in_ch);
    const auto Oi = static_cast<Eigen::Index>(out_ch);
    const RowMat x = aligned_copy(input.values, in_ch, L);
    const RowMat dy = aligned_copy(grad_output.values, out_ch, L);

    for (std::size_t o = 0; o < out_ch; ++o) {
        double s = 0.0;
        for (double v : grad_output.row(o)) s += v;
        grad_bias[o] += s;
    }

    RowMat dx;
    if (grad_input) dx = RowMat::Zero(Ii, Li);
    const std::size_t taps = std::min(kernel_length, L);
    RowMat gw(Oi, Ii);
    for (std::size_t tau = 0; tau < taps; ++tau) {
        const auto t = static_cast<Eigen::Index>(tau);
        gw.noalias() = dy.rightCols(Li - t) * x.leftCols(Li - t).transpose();
        for (std::size_t o = 0; o < out_ch; ++o) {
            for (std::size_t i = 0; i < in_ch; ++i) {
                grad_weights[(o * in_ch + i) * kernel_length + tau] +=
                    gw(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
            }
        }
        if (grad_input) {
            const RowMat w = tap_matrix(weights, out_ch, in_ch, kernel_length, tau);
            dx.leftCols(Li - t).noalias() += w.transpose() * dy.rightCols(Li - t);
        }
    }
    if (grad_input) {
        *grad_input = Tensor1D(in_ch, L);
        RowMap(grad_input->values.data(), Ii, Li) = dx;
    }
}

Tensor1D relu(const Tensor1D& x) {
    Tensor1D y = x;
    for (double& v : y.values) v = v > 0.0 ? v : 0.0;
    return y;
}

Tensor1D relu_backward(const Tensor1D& input, const Tensor1D& grad_output) {
    if (input.values.size() != grad_output.values.size()) throw ShapeError("relu_backward: shape mismatch");
    Tensor1D g = grad_output;
    for (std::size_t j = 0; j < g.values.size(); ++j) {
        if (!(input.values[j] > 0.0)) g.values[j] = 0.0;
    }
    return g;
}

Tensor1D batchnorm_forward(const Tensor1D& x, std::span<const double> gamma,
                           std::span<const double> beta, std::span<double> running_mean,
                           std::span<double> running_var, Mode mode, BatchNormCache* cache,
                           double epsilon, bool update_running, BatchNormStats stats) {
    const std::size_t C = x.channels;
    const std::size_t L = x.length;
    if (gamma.size() != C || beta.size() != C || running_mean.size() != C || running_var.size() != C) {
        throw ShapeError("batchnorm: parameter size does not match channel count");
    }
    Tensor1D y(C, L);
    if (mode == Mode::Infer) {
        for (std::size_t c = 0; c < C; ++c) {
            const double inv = 1.0 / std::sqrt(running_var[c] + epsilon);
            const auto xr = x.row(c);
            auto yr = y.row(c);
            for (std::size_t t = 0; t < L; ++t) yr[t] = gamma[c] * (xr[t] - running_mean[c]) * inv + beta[c];
        }
        return y;
    }

    if (L < 2) throw Error("batchnorm in train mode needs at least 2 samples per channel");
    BatchNormCache local;
    BatchNormCache& bc = cache ? *cache : local;
    bc.mean.assign(C, 0.0);
    bc.variance.assign(C, 0.0);
    bc.inv_std.assign(C, 0.0);
    bc.normalized = Tensor1D(C, L);
    bc.running = stats == BatchNormStats::Running;
    for (std::size_t c = 0; c < C; ++c) {
        const auto xr = x.row(c);
        double mean = 0.0;
        for (double v : xr) mean += v;
        mean /= static_cast<double>(L);
        double var = 0.0;
        for (double v : xr) var += (v - mean) * (v - mean);
        var /= static_cast<double>(L);
        bc.mean[c] = mean;
        bc.variance[c] = var;
        const double center = bc.running ? running_mean[c] : mean;
        const double inv = 1.0 / std::sqrt((bc.running ? running_var[c] : var) + epsilon);
        bc.inv_std[c] = inv;
        auto nr = bc.normalized.row(c);
        auto yr = y.row(c);
        for (std::size_t t = 0; t < L; ++t) {
            nr[t] = (xr[t] - center) * inv;
            yr[t] = gamma[c] * nr[t] + beta[c];
        }
    }
    if (update_running) batchnorm_update_running(bc, L, running_mean, running_var);
    return y;
}

void batchnorm_update_running(const BatchNormCache& cache, std::size_t length,
                              std::span<double> running_mean, std::span<double> running_var,
                              double momentum) {
    const double unbias = static_cast<double>(length) / static_cast<double>(length - 1);
    for (std::size_t c = 0; c < cache.mean.size(); ++c) {
        running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * cache.mean[c];
        running_var[c] = (1.0 - momentum) * running_var[c] + momentum * cache.variance[c] * unbias;
    }
}

Tensor1D batchnorm_backward(const BatchNormCache& cache, std::span<const double> gamma,
                            const Tensor1D& grad_output, std::span<double> grad_gamma,
                            std::span<double> grad_beta) {
    const std::size_t C = grad_output.channels;
    const std::size_t L = grad_output.length;
    if (cache.normalized.channels != C || cache.normalized.length != L) {
        throw ShapeError("batchnorm_backward: cache does not match gradient shape");
    }
    Tensor1D dx(C, L);
    const double inv_L = 1.0 / static_cast<double>(L);
    for (std::size_t c = 0; c < C; ++c) {
        const auto dy = grad_output.row(c);
        const auto xh = cache.normalized.row(c);
        double sum_dy = 0.0, sum_dy_xh = 0.0;
        for (std::size_t t = 0; t < L; ++t) {
            sum_dy += dy[t];
            sum_dy_xh += dy[t] * xh[t];
        }
        grad_gamma[c] += sum_dy_xh;
        grad_beta[c] += sum_dy;
        const double scale = gamma[c] * cache.inv_std[c];
        auto dxr = dx.row(c);
        if (cache.running) {
            for (std::size_t t = 0; t < L; ++t) dxr[t] = scale * dy[t];
            continue;
        }
        const double mean_dy = sum_dy * inv_L;
        const double mean_dy_xh = sum_dy_xh * inv_L;
        for (std::size_t t = 0; t < L; ++t) dxr[t] = scale * (dy[t] - mean_dy - xh[t] * mean_dy_xh);
    }
    return dx;
}

std::vector<double> global_avg_pool(const Tensor1D& x) {
    if (x.length < 1) throw ShapeError("global_avg_pool needs at least one sample");
    std::vector<double> v(x.channels);
    for (std::size_t c = 0; c < x.channels; ++c) {
        double s = 0.0;
        for (double e : x.row(c)) s += e;
        v[c] = s / static_cast<double>(x.length);
    }
    return v;
}

Tensor1D global_avg_pool_backward(std::size_t length, std::span<const double> grad_output) {
    Tensor1D g(grad_output.size(), length);
    for (std::size_t c = 0; c < grad_output.size(); ++c) {
        const double v = grad_output[c] / static_cast<double>(length);
        for (double& e : g.row(c)) e = v;
    }
    return g;
}

std::vector<double> fc_forward(std::span<const double> v, std::span<const double> weight,
                               std::span<const double> bias) {
    const std::size_t out = bias.size();
    const std::size_t in = v.size();
    if (weight.size() != out * in) {
        throw ShapeError("fully connected: weight has " + std::to_string(weight.size()) +
                         " values, expected " + std::to_string(out) + "x" + std::to_string(in));
    }
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
        double s = bias[o];
        for (std::size_t i = 0; i < in; ++i) s += weight[o * in + i] * v[i];
        y[o] = s;
    }
    return y;
}

std::vector<double> fc_backward(std::span<const double> v, std::span<const double> weight,
                                std::span<const double> grad_output, std::span<double> grad_weight,
                                std::span<double> grad_bias) {
    const std::size_t out = grad_output.size();
    const std::size_t in = v.size();
    std::vector<double> dv(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
        grad_bias[o] += grad_output[o];
        for (std::size_t i = 0; i < in; ++i) {
            grad_weight[o * in + i] += grad_output[o] * v[i];
            dv[i] += weight[o * in + i] * grad_output[o];
        }
    }
    return dv;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw ShapeError("softmax of an empty vector");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        p[j] = std::exp(logits[j] - mx);
        sum += p[j];
    }
    for (double& e : p) e /= sum;
    return p;
}

double loss(std::span<const double> probs, std::span<const double> target, LossKind kind) {
    if (probs.size() != target.size()) throw ShapeError("loss: prediction/target size mismatch");
    if (kind == LossKind::CrossEntropy) {
        double e = 0.0;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            if (target[j] != 0.0) e -= target[j] * std::log(std::max(probs[j], 1e-15));
        }
        return e;
    }
    double e = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) e += (probs[j] - target[j]) * (probs[j] - target[j]);
    return e;
}

std::vector<double> loss_grad_logits(std::span<const double> probs, std::span<const double> target,
                                     LossKind kind) {
    const std::size_t n = probs.size();
    std::vector<double> g(n);
    if (kind == LossKind::CrossEntropy) {
        // for a one-hot (or any normalized) target: p - r
        double tsum = 0.0;
        for (double t : target) tsum += t;
        for (std::size_t j = 0; j < n; ++j) g[j] = probs[j] * tsum - target[j];
        return g;
    }
    // softmax Jacobian applied to dE/dp = 2 (p - r)
    double dot = 0.0;
    std::vector<double> dp(n);
    for (std::size_t j = 0; j < n; ++j) {
        dp[j] = 2.0 * (probs[j] - target[j]);
        dot += probs[j] * dp[j];
    }
    for (std::size_t j = 0; j < n; ++j) g[j] = probs[j] * (dp[j] - dot);
    return g;
}

}  // namespace shmclassnet::cnn
