#include "shmclassnet/cnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace shmclassnet::cnn {

namespace {

struct Coord {
    std::size_t layer;
    bool bias;
    std::size_t index;
};

double example_loss(const NetworkSpec& spec, const NetworkParams& params, const LabeledExample& ex,
                    LossKind kind) {
    const auto fwd = network_forward(spec, params, ex.input, Mode::Train);
    return loss(fwd.probs, ex.target, kind);
}

}  // namespace

GradCheckReport grad_check(const NetworkSpec& spec, const NetworkParams& params,
                           const LabeledExample& example, const GradCheckOptions& opts) {
    const auto fwd = network_forward(spec, params, example.input, Mode::Train);
    const GradientSet grads = network_backward(spec, params, *fwd.cache, example.target, opts.loss);

    std::vector<Coord> coords;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        for (std::size_t i = 0; i < params.layers[l].weight.size(); ++i) coords.push_back({l, false, i});
        for (std::size_t i = 0; i < params.layers[l].bias.size(); ++i) coords.push_back({l, true, i});
    }
    if (opts.max_params > 0 && coords.size() > opts.max_params) {
        std::mt19937_64 rng(opts.subsample_seed);
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(opts.max_params);
        std::sort(coords.begin(), coords.end(), [](const Coord& a, const Coord& b) {
            return std::tie(a.layer, a.bias, a.index) < std::tie(b.layer, b.bias, b.index);
        });
    }

    GradCheckReport report;
    NetworkParams probe = params;
    for (const auto& c : coords) {
        auto& vec = c.bias ? probe.layers[c.layer].bias : probe.layers[c.layer].weight;
        const double orig = vec[c.index];
        vec[c.index] = orig + opts.h;
        const double up = example_loss(spec, probe, example, opts.loss);
        vec[c.index] = orig - opts.h;
        const double down = example_loss(spec, probe, example, opts.loss);
        vec[c.index] = orig;

        GradCheckEntry e;
        e.layer = c.layer;
        e.which = c.bias ? "bias" : "weight";
        e.index = c.index;
        e.analytic = c.bias ? grads.layers[c.layer].bias[c.index] : grads.layers[c.layer].weight[c.index];
        e.numeric = (up - down) / (2.0 * opts.h);
        const double denom = std::max({std::abs(e.analytic), std::abs(e.numeric), opts.denominator_floor});
        e.rel_error = std::abs(e.analytic - e.numeric) / denom;

        if (report.checked == 0 || e.rel_error > report.max_rel_error) {
            report.max_rel_error = e.rel_error;
            report.worst = e;
        }
        if (e.rel_error > opts.tolerance) report.violations.push_back(e);
        ++report.checked;
    }
    return report;
}

}  // namespace shmclassnet::cnn
