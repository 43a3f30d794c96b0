#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shmclassnet/error.hpp"
#include "shmclassnet/pipeline/commands.hpp"
#include "shmclassnet/signal/signal_io.hpp"

namespace fs = std::filesystem;
using namespace shmclassnet;
using pipeline::RunConfig;

namespace {

struct RunOptions {
    std::string preset;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string channel;
    bool total_accel = false;
    bool paper_scale = false;
    std::string network;
    std::optional<std::size_t> epochs;
    std::optional<double> learning_rate;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool training) {
    cmd->add_option("--preset", o.preset, "Named setup (" + [] {
        std::string s;
        for (const auto& n : pipeline::preset_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }() + ")");
    cmd->add_option("--config", o.config, "Run configuration JSON; overrides the preset");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--channel", o.channel, "Network input channel: disp, vel or accel");
    cmd->add_flag("--total-accel", o.total_accel, "Bouc-Wen: record absolute accelerations");
    if (training) {
        cmd->add_flag("--paper-scale", o.paper_scale, "Use the full-size network (slow)");
        cmd->add_option("--network", o.network, "Network preset: desk-scale, paper-scale, sensitivity");
        cmd->add_option("--epochs", o.epochs, "Training epochs");
        cmd->add_option("--lr", o.learning_rate, "Learning rate");
    }
}

RunConfig resolve(const RunOptions& o, const std::string& fallback_preset) {
    RunConfig cfg;
    if (!o.config.empty()) {
        cfg = pipeline::load_run_config(o.config);
        if (!o.preset.empty()) std::cerr << "note: --config takes precedence over --preset\n";
    } else {
        cfg = pipeline::preset_config(o.preset.empty() ? fallback_preset : o.preset);
    }
    if (o.seed) cfg.seed = *o.seed;
    if (!o.channel.empty()) cfg.channel = pipeline::signal_channel_from_string(o.channel);
    if (o.total_accel) cfg.total_accel = true;
    if (!o.network.empty()) cfg.network = o.network;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
    if (o.paper_scale) {
        if (cfg.network == "sensitivity") throw Error("--paper-scale cannot be combined with the sensitivity network");
        cfg.network = "paper-scale";
        std::cerr << "WARNING: --paper-scale selects kernels of length 2048 with 128/256 maps.\n"
                     "WARNING: training is orders of magnitude slower than the desk-scale default.\n";
    }
    cfg.validate();
    return cfg;
}

void print_report(const pipeline::EvaluationReport& r) {
    r.write_csv(std::cout);
    if (const auto acc = r.accuracy()) {
        std::cout << "accuracy " << r.correct_count() << "/" << r.labeled_count() << " = " << *acc << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model class selection from structural response signals with 1D CNNs"};
    app.require_subcommand(1);

    RunOptions sim_opts;
    std::string sim_out;
    auto* sim = app.add_subcommand("simulate", "Generate a labeled dataset");
    add_run_options(sim, sim_opts, false);
    sim->add_option("--out", sim_out, "Dataset directory")->required();

    std::string fuse_manifest, fuse_out, fuse_config;
    auto* fuse = app.add_subcommand("fuse", "Kalman-filter every signal of a dataset");
    fuse->add_option("--manifest", fuse_manifest, "Input manifest.json")->required()->check(CLI::ExistingFile);
    fuse->add_option("--config", fuse_config, "Fusion settings JSON")->check(CLI::ExistingFile);
    fuse->add_option("--out", fuse_out, "Output dataset directory")->required();

    RunOptions train_opts;
    std::string train_manifest, train_out;
    auto* train = app.add_subcommand("train", "Train a network on a dataset");
    add_run_options(train, train_opts, true);
    train->add_option("--manifest", train_manifest, "Dataset manifest.json")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "Directory for weights.json and train_report.csv")->required();

    std::string cls_weights, cls_out;
    std::vector<std::string> cls_signals;
    auto* cls = app.add_subcommand("classify", "Classify signal files");
    cls->add_option("--weights", cls_weights, "weights.json")->required()->check(CLI::ExistingFile);
    cls->add_option("--out", cls_out, "CSV output path");
    cls->add_option("signals", cls_signals, "Signal CSV files")->required()->check(CLI::ExistingFile);

    std::string ev_weights, ev_manifest, ev_out, ev_split = "test";
    auto* ev = app.add_subcommand("evaluate", "Evaluate a network on a labeled split");
    ev->add_option("--weights", ev_weights, "weights.json")->required()->check(CLI::ExistingFile);
    ev->add_option("--manifest", ev_manifest, "Dataset manifest.json")->required()->check(CLI::ExistingFile);
    ev->add_option("--split", ev_split, "train, validate or test")->capture_default_str();
    ev->add_option("--out", ev_out, "Report directory")->required();

    RunOptions rep_opts;
    std::string rep_out;
    auto* rep = app.add_subcommand("reproduce", "Run simulate, fuse, train and evaluate for a preset");
    add_run_options(rep, rep_opts, true);
    rep->add_option("--out", rep_out, "Bundle directory")->required();

    std::size_t gc_networks = 20, gc_length = 24;
    std::uint64_t gc_seed = 1;
    double gc_tol = 1e-4;
    std::string gc_spec;
    auto* gc = app.add_subcommand("gradcheck", "Compare backpropagation with finite differences");
    gc->add_option("--networks", gc_networks, "Number of random small networks")->capture_default_str();
    gc->add_option("--length", gc_length, "Input length")->capture_default_str();
    gc->add_option("--seed", gc_seed, "Seed")->capture_default_str();
    gc->add_option("--tolerance", gc_tol, "Maximum relative error")->capture_default_str();
    gc->add_option("--spec", gc_spec, "Check this network spec JSON instead of random ones")
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const auto cfg = resolve(sim_opts, "linear3");
            const auto manifest = pipeline::cmd_simulate(cfg, sim_out);
            std::cout << manifest.string() << "\n";
        } else if (*fuse) {
            nlohmann::json j = nlohmann::json::object();
            if (!fuse_config.empty()) {
                std::ifstream f(fuse_config);
                try {
                    j = nlohmann::json::parse(f);
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError(fuse_config, e.what());
                }
            }
            if (!j.contains("dt")) {
                const auto manifest = signal::load_manifest(fuse_manifest);
                if (manifest.entries.empty()) throw Error("manifest has no signals");
                j["dt"] = signal::read_signal(manifest.entries.front().path).signal.dt();
            }
            const auto settings = kalman::fusion_settings_from_json(j);
            std::cout << pipeline::cmd_fuse(fuse_manifest, settings, fuse_out).string() << "\n";
        } else if (*train) {
            const auto cfg = resolve(train_opts, "linear3");
            const auto out = pipeline::cmd_train(train_manifest, pipeline::network_for(cfg),
                                                 pipeline::preprocess_for(cfg), pipeline::train_config_for(cfg),
                                                 train_out);
            const auto& last = out.report.rows.back();
            std::cout << "weights " << out.weights_path.string() << "\nreport " << out.report_path.string()
                      << "\nfinal epoch loss " << out.report.final_epoch_loss() << "\n";
            if (last.val_acc) std::cout << "validation accuracy " << *last.val_acc << "\n";
        } else if (*cls) {
            std::vector<fs::path> paths(cls_signals.begin(), cls_signals.end());
            std::optional<fs::path> out;
            if (!cls_out.empty()) out = cls_out;
            print_report(pipeline::cmd_classify(cls_weights, paths, out));
        } else if (*ev) {
            print_report(pipeline::cmd_evaluate(ev_weights, ev_manifest, signal::split_from_string(ev_split), ev_out));
        } else if (*rep) {
            if (rep_opts.preset.empty() && rep_opts.config.empty()) throw Error("reproduce needs --preset or --config");
            const auto cfg = resolve(rep_opts, rep_opts.preset);
            const auto result = pipeline::cmd_reproduce(cfg, rep_out);
            for (const auto& n : result.nets) {
                const auto it90 = n.train.report.iterations_to_accuracy(0.9);
                std::cout << n.name << ": " << n.evaluation.correct_count() << "/" << n.evaluation.labeled_count()
                          << " correct, final epoch loss " << n.train.report.final_epoch_loss()
                          << ", iterations to 90% " << (it90 ? std::to_string(*it90) : "never") << "\n";
            }
            std::cout << "bundle " << rep_out << "\n";
        } else if (*gc) {
            cnn::GradCheckOptions opts;
            opts.tolerance = gc_tol;
            std::vector<cnn::NetworkSpec> specs;
            if (!gc_spec.empty()) {
                std::ifstream f(gc_spec);
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(f);
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError(gc_spec, e.what());
                }
                specs.push_back(cnn::network_spec_from_json(j));
            } else {
                for (std::size_t i = 0; i < gc_networks; ++i) specs.push_back(pipeline::random_small_spec(gc_seed + i));
            }
            double worst = 0.0;
            std::size_t failed = 0;
            for (std::size_t i = 0; i < specs.size(); ++i) {
                const auto r = pipeline::cmd_gradcheck(specs[i], gc_length, gc_seed + i, opts);
                worst = std::max(worst, r.max_rel_error);
                if (!r.passed()) ++failed;
                std::cout << "network " << i << ": " << r.checked << " coordinates, max rel error "
                          << r.max_rel_error << (r.passed() ? "" : "  FAIL") << "\n";
            }
            std::cout << "worst " << worst << ", " << failed << " of " << specs.size() << " networks above "
                      << gc_tol << "\n";
            return failed == 0 ? 0 : 1;
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
