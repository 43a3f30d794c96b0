#include "shmclassnet/pipeline/commands.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "shmclassnet/error.hpp"
#include "shmclassnet/pipeline/dataset.hpp"
#include "shmclassnet/seeds.hpp"
#include "shmclassnet/signal/signal_io.hpp"

namespace shmclassnet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using signal::Split;

namespace {

constexpr std::uint64_t kShuffleTag = 0x5348;
constexpr std::uint64_t kInitTag = 0x494e;

void write_json(const json& j, const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << j.dump(2) << '\n';
    if (!f) throw Error("failed writing " + path.string());
}

std::optional<std::size_t> find_class(const std::vector<std::string>& classes, const std::string& label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - classes.begin());
}

}  // namespace

EvaluationReport::EvaluationReport(std::vector<std::string> class_names)
    : classes(std::move(class_names)), correct(classes.size(), 0), incorrect(classes.size(), 0) {}

void EvaluationReport::add(EvaluationRow row) {
    if (row.probabilities.size() != classes.size() || row.predicted >= classes.size()) {
        throw ShapeError("evaluation row for " + row.name + " does not match " + std::to_string(classes.size()) +
                         " classes");
    }
    if (row.true_label) {
        if (*row.true_label >= classes.size()) throw Error("true label out of range for " + row.name);
        ++(row.predicted == *row.true_label ? correct : incorrect)[*row.true_label];
    }
    rows.push_back(std::move(row));
}

std::size_t EvaluationReport::labeled_count() const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) n += correct[c] + incorrect[c];
    return n;
}

std::size_t EvaluationReport::correct_count() const {
    std::size_t n = 0;
    for (auto c : correct) n += c;
    return n;
}

std::optional<double> EvaluationReport::accuracy() const {
    const auto n = labeled_count();
    if (n == 0) return std::nullopt;
    return static_cast<double>(correct_count()) / static_cast<double>(n);
}

void EvaluationReport::write_csv(std::ostream& os) const {
    os << "signal,true_label,predicted_label";
    for (const auto& c : classes) os << ",p_" << c;
    os << ",correct\n";
    os.precision(17);
    for (const auto& r : rows) {
        os << r.name << ',' << (r.true_label ? classes[*r.true_label] : "") << ',' << classes[r.predicted];
        for (double p : r.probabilities) os << ',' << p;
        os << ',';
        if (r.true_label) os << (*r.true_label == r.predicted ? 1 : 0);
        os << '\n';
    }
}

void EvaluationReport::write_csv(const fs::path& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    write_csv(f);
    if (!f) throw Error("failed writing " + path.string());
}

void EvaluationReport::write_summary_csv(const fs::path& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << "class,correct,incorrect,total\n";
    for (std::size_t c = 0; c < classes.size(); ++c) {
        f << classes[c] << ',' << correct[c] << ',' << incorrect[c] << ',' << correct[c] + incorrect[c] << '\n';
    }
    f << "overall," << correct_count() << ',' << labeled_count() - correct_count() << ',' << labeled_count() << '\n';
    if (!f) throw Error("failed writing " + path.string());
}

json EvaluationReport::summary() const {
    json per = json::object();
    for (std::size_t c = 0; c < classes.size(); ++c) {
        per[classes[c]] = {{"correct", correct[c]}, {"incorrect", incorrect[c]}};
    }
    const auto acc = accuracy();
    return {{"signals", rows.size()},
            {"labeled", labeled_count()},
            {"correct", correct_count()},
            {"accuracy", acc ? json(*acc) : json(nullptr)},
            {"per_class", per}};
}

cnn::Preprocess preprocess_for(const RunConfig& cfg) {
    cnn::Preprocess pre;
    pre.channels = {to_string(cfg.channel)};
    pre.zscore = cfg.zscore;
    pre.standardize = cfg.standardize;
    return pre;
}

cnn::NetworkSpec network_for(const RunConfig& cfg) {
    return cnn::preset_spec(cfg.network, 1, cfg.classes.size());
}

cnn::TrainConfig train_config_for(const RunConfig& cfg) {
    auto tc = cfg.train;
    tc.shuffle_seed = derive_seed(cfg.seed, {kShuffleTag, cfg.train.shuffle_seed});
    tc.weight_init_seed = derive_seed(cfg.seed, {kInitTag, cfg.train.weight_init_seed});
    return tc;
}

fs::path cmd_simulate(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto manifest = simulate_dataset(cfg, out_dir);
    write_json(to_json(cfg), out_dir / "run_config.json");
    return manifest;
}

fs::path cmd_fuse(const fs::path& manifest_path, const kalman::FusionSettings& settings, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    return fuse_dataset(manifest_path, settings, out_dir);
}

TrainOutputs cmd_train(const fs::path& manifest_path, const cnn::NetworkSpec& spec, cnn::Preprocess pre,
                       const cnn::TrainConfig& train_cfg, const fs::path& out_dir) {
    const auto manifest = signal::load_manifest(manifest_path);
    if (pre.standardize && pre.offset.empty()) {
        auto raw = pre;
        raw.scale.clear();
        const auto fit = load_examples(manifest, Split::Train, raw);
        std::tie(pre.offset, pre.scale) = channel_standardization(fit.examples);
    }
    const auto train_set = load_examples(manifest, Split::Train, pre);
    const auto val_set = load_examples(manifest, Split::Validate, pre);
    if (spec.num_classes != manifest.classes.size()) {
        throw ShapeError("network has " + std::to_string(spec.num_classes) + " classes, dataset has " +
                         std::to_string(manifest.classes.size()));
    }
    if (spec.input_channels != pre.channels.size()) {
        throw ShapeError("network expects " + std::to_string(spec.input_channels) + " input channels, got " +
                         std::to_string(pre.channels.size()));
    }
    auto result = cnn::train(spec, std::nullopt, train_set.examples, val_set.examples, train_cfg);

    TrainOutputs out;
    out.weights = {spec, std::move(result.params), train_cfg, manifest.classes, pre};
    out.report = std::move(result.report);
    fs::create_directories(out_dir);
    out.weights_path = out_dir / "weights.json";
    out.report_path = out_dir / "train_report.csv";
    cnn::save_weights(out.weights, out.weights_path.string());
    out.report.write_csv(out.report_path.string());
    return out;
}

EvaluationReport classify_signals(const cnn::WeightsFile& weights, const std::vector<fs::path>& signal_paths) {
    EvaluationReport report(weights.classes);
    for (const auto& path : signal_paths) {
        try {
            const auto sig = signal::read_signal(path);
            const auto input = make_input(sig.signal, weights.preprocess);
            auto [predicted, probs] = cnn::classify(weights.spec, weights.params, input);
            report.add({path.string(), find_class(weights.classes, sig.label), predicted, std::move(probs)});
        } catch (const ParseError&) {
            throw;
        } catch (const ShapeError& e) {
            throw ShapeError(path.string() + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error(path.string() + ": " + e.what());
        }
    }
    return report;
}

EvaluationReport cmd_classify(const fs::path& weights_path, const std::vector<fs::path>& signal_paths,
                              const std::optional<fs::path>& out_csv) {
    const auto weights = cnn::load_weights(weights_path.string());
    auto report = classify_signals(weights, signal_paths);
    if (out_csv) {
        if (out_csv->has_parent_path()) fs::create_directories(out_csv->parent_path());
        report.write_csv(*out_csv);
    }
    return report;
}

EvaluationReport evaluate(const cnn::WeightsFile& weights, const signal::DatasetManifest& manifest, Split split) {
    if (manifest.classes != weights.classes) throw Error("dataset classes do not match the network's classes");
    std::vector<fs::path> paths;
    for (const auto& e : manifest.entries_for(split)) paths.push_back(e.path);
    if (paths.empty()) throw Error("dataset has no " + signal::to_string(split) + " signals");
    auto report = classify_signals(weights, paths);
    // labels come from the manifest, not from the signal files
    EvaluationReport labeled(weights.classes);
    const auto entries = manifest.entries_for(split);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto row = std::move(report.rows[i]);
        row.true_label = manifest.class_index(entries[i].label);
        row.name = (entries[i].path.parent_path().filename() / entries[i].path.filename()).generic_string();
        labeled.add(std::move(row));
    }
    return labeled;
}

EvaluationReport cmd_evaluate(const fs::path& weights_path, const fs::path& manifest_path, Split split,
                              const fs::path& out_dir) {
    const auto weights = cnn::load_weights(weights_path.string());
    const auto manifest = signal::load_manifest(manifest_path);
    auto report = evaluate(weights, manifest, split);
    fs::create_directories(out_dir);
    report.write_csv(out_dir / "evaluation.csv");
    report.write_summary_csv(out_dir / "evaluation_summary.csv");
    return report;
}

const NetOutcome& ReproduceResult::net(const std::string& name) const {
    for (const auto& n : nets) {
        if (n.name == name) return n;
    }
    throw Error("no network '" + name + "' in the bundle");
}

ReproduceResult cmd_reproduce(const RunConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    ReproduceResult result{cfg, {}};
    fs::create_directories(out_dir);
    write_json(to_json(cfg), out_dir / "config.json");

    const auto raw_manifest = cmd_simulate(cfg, out_dir / "data");
    const auto fused_manifest = cmd_fuse(raw_manifest, cfg.fusion, out_dir / "fused");
    const auto pre = preprocess_for(cfg);
    const auto tc = train_config_for(cfg);

    auto run_net = [&](const std::string& name, const cnn::NetworkSpec& spec, const fs::path& manifest) {
        const fs::path dir = out_dir / name;
        auto trained = cmd_train(manifest, spec, pre, tc, dir);
        auto evaluation = cmd_evaluate(trained.weights_path, manifest, Split::Test, dir);
        result.nets.push_back({name, std::move(trained), std::move(evaluation)});
    };
    const auto spec = network_for(cfg);
    run_net("raw_net", spec, raw_manifest);
    run_net("fused_net", spec, fused_manifest);
    if (cfg.network == "sensitivity") {
        run_net("desk_net", cnn::preset_spec("desk-scale", 1, cfg.classes.size()), raw_manifest);
    }

    json nets = json::object();
    for (const auto& n : result.nets) {
        const auto it90 = n.train.report.iterations_to_accuracy(0.9);
        auto s = n.evaluation.summary();
        s["final_epoch_loss"] = n.train.report.final_epoch_loss();
        s["iterations_to_90"] = it90 ? json(*it90) : json(nullptr);
        s["parameter_count"] = n.train.weights.spec.parameter_count();
        nets[n.name] = s;
    }
    write_json({{"preset", cfg.preset}, {"seed", cfg.seed}, {"network", cfg.network}, {"nets", nets}},
               out_dir / "summary.json");
    return result;
}

cnn::NetworkSpec random_small_spec(std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, {4}));
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    const auto stats = pick(0, 1) ? cnn::BatchNormStats::Running : cnn::BatchNormStats::Example;
    return cnn::two_block_spec(pick(1, 6), pick(1, 4), pick(1, 4), pick(1, 3), pick(2, 4), stats);
}

cnn::GradCheckReport cmd_gradcheck(const cnn::NetworkSpec& spec, std::size_t length, std::uint64_t seed,
                                   const cnn::GradCheckOptions& opts) {
    spec.validate();
    auto params = cnn::init_params(spec, derive_seed(seed, {1}));
    std::mt19937_64 rng(derive_seed(seed, {2}));
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> scale(0.5, 1.5), shift(-0.3, 0.3);
    // move batch-norm layers away from the identity so their terms are exercised
    for (auto& l : params.layers) {
        if (l.running_mean.empty()) continue;
        for (auto& v : l.running_mean) v = shift(rng);
        for (auto& v : l.running_var) v = scale(rng);
        for (auto& g : l.weight) g = scale(rng);
        for (auto& b : l.bias) b = shift(rng);
    }
    cnn::Tensor1D x(spec.input_channels, length);
    for (double& v : x.values) v = n01(rng);
    const auto label = static_cast<std::size_t>(derive_seed(seed, {3}) % spec.num_classes);
    return cnn::grad_check(spec, params, cnn::LabeledExample::make(std::move(x), label, spec.num_classes), opts);
}

}  // namespace shmclassnet::pipeline
