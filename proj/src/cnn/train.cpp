#include "shmclassnet/cnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>

#include "shmclassnet/error.hpp"

namespace shmclassnet::cnn {

void TrainConfig::validate() const {
    if (epochs < 1) throw Error("epochs must be >= 1");
    if (mini_batch < 1) throw Error("mini_batch must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw Error("learning rate must be positive");
    if (schedule == LrSchedule::StepDecay && (!(decay_factor > 0.0) || decay_every < 1)) {
        throw Error("step decay needs factor > 0 and every >= 1");
    }
}

double TrainConfig::rate_for_epoch(std::size_t epoch) const {
    if (schedule == LrSchedule::Constant) return learning_rate;
    return learning_rate * std::pow(decay_factor, static_cast<double>(epoch / decay_every));
}

nlohmann::json to_json(const TrainConfig& cfg) {
    nlohmann::json sched = {{"kind", cfg.schedule == LrSchedule::Constant ? "constant" : "step_decay"}};
    if (cfg.schedule == LrSchedule::StepDecay) {
        sched["factor"] = cfg.decay_factor;
        sched["every_n_epochs"] = cfg.decay_every;
    }
    return {{"epochs", cfg.epochs},
            {"mini_batch", cfg.mini_batch},
            {"learning_rate", cfg.learning_rate},
            {"lr_schedule", sched},
            {"loss", cfg.loss == LossKind::CrossEntropy ? "cross_entropy" : "mse"},
            {"shuffle_seed", cfg.shuffle_seed},
            {"weight_init_seed", cfg.weight_init_seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.mini_batch = j.value("mini_batch", c.mini_batch);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (j.contains("lr_schedule")) {
        const auto& s = j.at("lr_schedule");
        const std::string kind = s.value("kind", std::string("constant"));
        if (kind == "constant") {
            c.schedule = LrSchedule::Constant;
        } else if (kind == "step_decay") {
            c.schedule = LrSchedule::StepDecay;
            c.decay_factor = s.value("factor", c.decay_factor);
            c.decay_every = s.value("every_n_epochs", c.decay_every);
        } else {
            throw ParseError("lr_schedule.kind", "unknown schedule '" + kind + "'");
        }
    }
    const std::string loss = j.value("loss", std::string("cross_entropy"));
    if (loss == "cross_entropy") {
        c.loss = LossKind::CrossEntropy;
    } else if (loss == "mse") {
        c.loss = LossKind::Mse;
    } else {
        throw ParseError("loss", "unknown loss '" + loss + "'");
    }
    c.shuffle_seed = j.value("shuffle_seed", c.shuffle_seed);
    c.weight_init_seed = j.value("weight_init_seed", c.weight_init_seed);
    c.validate();
    return c;
}

LabeledExample LabeledExample::make(Tensor1D input, std::size_t label, std::size_t num_classes) {
    if (label >= num_classes) throw Error("label index out of range");
    LabeledExample e{std::move(input), std::vector<double>(num_classes, 0.0)};
    e.target[label] = 1.0;
    return e;
}

std::size_t LabeledExample::label() const {
    std::size_t ones = 0, idx = 0;
    for (std::size_t j = 0; j < target.size(); ++j) {
        if (target[j] == 1.0) {
            ++ones;
            idx = j;
        } else if (target[j] != 0.0) {
            throw Error("target is not one-hot");
        }
    }
    if (ones != 1) throw Error("target is not one-hot");
    return idx;
}

void TrainReport::write_csv(std::ostream& os) const {
    os << "iteration,epoch,train_loss,train_acc,val_acc\n";
    os.precision(17);
    for (const auto& r : rows) {
        os << r.iteration << ',' << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ',';
        if (r.val_acc) os << *r.val_acc;
        os << '\n';
    }
}

void TrainReport::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    write_csv(f);
    if (!f) throw Error("failed writing " + path);
}

std::optional<std::size_t> TrainReport::iterations_to_accuracy(double threshold) const {
    // The trailing window only spans a full epoch from the last iteration of epoch 1 on.
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const bool full = r.epoch > 1 || i + 1 == rows.size() || rows[i + 1].epoch > 1;
        if (full && r.train_acc >= threshold) return r.iteration;
    }
    return std::nullopt;
}

double TrainReport::final_epoch_loss() const {
    if (rows.empty()) return 0.0;
    const std::size_t last = rows.back().epoch;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.epoch == last) {
            sum += r.train_loss;
            ++n;
        }
    }
    return sum / static_cast<double>(n);
}

void sgd_step(NetworkParams& params, const GradientSet& grads, double rate) {
    if (grads.layers.size() != params.layers.size()) throw ShapeError("gradient set does not match parameters");
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& p = params.layers[l];
        const auto& g = grads.layers[l];
        if (g.weight.size() != p.weight.size() || g.bias.size() != p.bias.size()) {
            throw ShapeError("gradient set does not match parameters");
        }
        for (std::size_t i = 0; i < p.weight.size(); ++i) p.weight[i] -= rate * g.weight[i];
        for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= rate * g.bias[i];
    }
}

namespace {

void accumulate(GradientSet& into, const GradientSet& g) {
    for (std::size_t l = 0; l < into.layers.size(); ++l) {
        for (std::size_t i = 0; i < g.layers[l].weight.size(); ++i) into.layers[l].weight[i] += g.layers[l].weight[i];
        for (std::size_t i = 0; i < g.layers[l].bias.size(); ++i) into.layers[l].bias[i] += g.layers[l].bias[i];
    }
}

void scale(GradientSet& g, double s) {
    for (auto& l : g.layers) {
        for (double& v : l.weight) v *= s;
        for (double& v : l.bias) v *= s;
    }
}

std::size_t argmax(const std::vector<double>& p) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.size(); ++j) {
        if (p[j] > p[best]) best = j;
    }
    return best;
}

}  // namespace

double accuracy(const NetworkSpec& spec, const NetworkParams& params,
                const std::vector<LabeledExample>& examples) {
    if (examples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& e : examples) {
        if (classify(spec, params, e.input).first == e.label()) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

TrainResult train(const NetworkSpec& spec, const std::optional<NetworkParams>& initial,
                  const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& validation_set, const TrainConfig& cfg) {
    spec.validate();
    cfg.validate();
    std::vector<std::size_t> per_class(spec.num_classes, 0);
    for (const auto& e : train_set) {
        if (e.target.size() != spec.num_classes) throw ShapeError("example target size does not match class count");
        ++per_class[e.label()];
    }
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        if (per_class[c] == 0) throw Error("class " + std::to_string(c) + " has no training example");
    }

    TrainResult out;
    out.params = initial ? *initial : init_params(spec, cfg.weight_init_seed);
    check_params(spec, out.params);
    out.report.epochs = cfg.epochs;
    out.report.mini_batch = cfg.mini_batch;
    out.report.learning_rate = cfg.learning_rate;

    std::mt19937_64 rng(cfg.shuffle_seed);
    std::vector<std::size_t> order(train_set.size());
    std::deque<bool> window;
    std::size_t window_hits = 0;
    std::size_t iteration = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const double rate = cfg.rate_for_epoch(epoch);

        for (std::size_t start = 0; start < order.size(); start += cfg.mini_batch) {
            const std::size_t end = std::min(order.size(), start + cfg.mini_batch);
            ++iteration;
            GradientSet batch_grad = zero_grads(spec, out.params);
            double batch_loss = 0.0;
            for (std::size_t b = start; b < end; ++b) {
                const auto& ex = train_set[order[b]];
                auto fwd = network_forward(spec, out.params, ex.input, Mode::Train);
                const double l = loss(fwd.probs, ex.target, cfg.loss);
                if (!std::isfinite(l)) throw NumericalError("training diverged: non-finite loss", iteration);
                batch_loss += l;

                const bool hit = argmax(fwd.probs) == ex.label();
                window.push_back(hit);
                window_hits += hit ? 1 : 0;
                if (window.size() > train_set.size()) {
                    window_hits -= window.front() ? 1 : 0;
                    window.pop_front();
                }

                accumulate(batch_grad, network_backward(spec, out.params, *fwd.cache, ex.target, cfg.loss));
                update_running_stats(spec, out.params, *fwd.cache);
            }
            const auto n = static_cast<double>(end - start);
            scale(batch_grad, 1.0 / n);
            sgd_step(out.params, batch_grad, rate);
            for (const auto& l : out.params.layers) {
                for (double v : l.weight) {
                    if (!std::isfinite(v)) throw NumericalError("training diverged: non-finite weight", iteration);
                }
            }

            TrainRow row;
            row.iteration = iteration;
            row.epoch = epoch + 1;
            row.train_loss = batch_loss / n;
            row.train_acc = static_cast<double>(window_hits) / static_cast<double>(window.size());
            if (end == order.size() && !validation_set.empty()) {
                row.val_acc = accuracy(spec, out.params, validation_set);
            }
            out.report.rows.push_back(row);
        }
    }
    return out;
}

}  // namespace shmclassnet::cnn
