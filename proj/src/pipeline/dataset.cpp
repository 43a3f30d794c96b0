#include "shmclassnet/pipeline/dataset.hpp"

#include <cmath>
#include <random>

#include "shmclassnet/error.hpp"
#include "shmclassnet/gendamp/gendamp.hpp"
#include "shmclassnet/kalman/kalman.hpp"
#include "shmclassnet/nonlinear/boucwen.hpp"
#include "shmclassnet/nonlinear/freefall.hpp"
#include "shmclassnet/nonlinear/ground_motion.hpp"
#include "shmclassnet/seeds.hpp"
#include "shmclassnet/signal/integrate.hpp"
#include "shmclassnet/signal/noise.hpp"

namespace shmclassnet::pipeline {

namespace fs = std::filesystem;
using signal::ChannelInfo;
using signal::LabeledSignal;
using signal::Split;
using signal::TimeSeries;

namespace {

constexpr double kGravity = 9.81;
constexpr std::uint64_t kGroundTag = 0x6772;

enum SubSeed : std::uint64_t { kForce = 1, kAccelNoise = 2, kInitial = 3, kDispNoise = 4, kVelNoise = 5, kPeak = 6 };

std::uint64_t split_index(Split s) { return static_cast<std::uint64_t>(s); }

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

struct CleanResponse {
    double dt;
    std::vector<double> x, v, a;
    double x0 = 0.0, v0 = 0.0;
    nlohmann::json params;
};

CleanResponse simulate_linear(const RunConfig& cfg, std::size_t class_index, std::uint64_t seed) {
    const auto models = gendamp::make_linear_experiment_models();
    const auto& sys = models.at(class_index);
    Eigen::VectorXd x0(2), v0(2);
    x0 << 1.0, 1.0;
    v0 << 0.0, 0.5;
    if (cfg.random_initial_conditions) {
        std::mt19937_64 rng(derive_seed(seed, {kInitial}));
        const double s = cfg.initial_condition_spread;
        std::uniform_real_distribution<double> u(-s, s);
        for (Eigen::Index i = 0; i < 2; ++i) x0(i) += u(rng);
        for (Eigen::Index i = 0; i < 2; ++i) v0(i) += u(rng);
    }
    const auto force = gendamp::white_noise_force(2, cfg.force_variance, cfg.dt, cfg.duration,
                                                  derive_seed(seed, {kForce}));
    const auto resp = gendamp::simulate_gendamp(sys, force, x0, v0, cfg.dt, cfg.duration);
    const std::string d = std::to_string(cfg.dof);
    CleanResponse r{cfg.dt, to_vector(resp.channel("x" + d)), to_vector(resp.channel("v" + d)),
                    to_vector(resp.channel("a" + d)), 0.0, 0.0, {}};
    r.x0 = x0(static_cast<Eigen::Index>(cfg.dof - 1));
    r.v0 = v0(static_cast<Eigen::Index>(cfg.dof - 1));
    r.params = {{"system", gendamp::to_json(sys)},
                {"x0", {x0(0), x0(1)}},
                {"v0", {v0(0), v0(1)}},
                {"force_variance", cfg.force_variance},
                {"dof", cfg.dof}};
    return r;
}

CleanResponse simulate_freefall_signal(const RunConfig& cfg, std::size_t class_index, std::uint64_t seed) {
    nonlinear::FreeFallSystem sys;
    sys.kernel = class_index == 0 ? gendamp::KernelSpec::exponential(100.0) : gendamp::KernelSpec::gaussian(100.0);
    sys.force_variance = cfg.force_variance;
    const double x0 = 0.1, v0 = 0.0;
    const auto res = nonlinear::simulate_freefall(sys, cfg.dt, cfg.duration, derive_seed(seed, {kForce}), x0, v0);
    CleanResponse r{cfg.dt, to_vector(res.response.channel("x")), to_vector(res.response.channel("v")),
                    to_vector(res.response.channel("a")), 0.0, 0.0, {}};
    r.x0 = x0;
    r.v0 = v0;
    r.params = {{"m", sys.m},
                {"c", sys.c},
                {"k", sys.k},
                {"gravity", sys.gravity},
                {"kernel", gendamp::to_json(sys.kernel)},
                {"force_variance", sys.force_variance},
                {"x0", x0},
                {"v0", v0},
                {"chatter_steps", res.chatter_steps}};
    return r;
}

double record_peak_g(const RunConfig& cfg, Split split, std::size_t index) {
    if (split == Split::Train && index < cfg.train_peaks_g.size()) return cfg.train_peaks_g[index];
    std::mt19937_64 rng(derive_seed(ground_motion_seed(cfg.seed, split, index), {kPeak}));
    std::uniform_real_distribution<double> u(cfg.eval_peak_min_g, cfg.eval_peak_max_g);
    return u(rng);
}

CleanResponse simulate_boucwen_signal(const RunConfig& cfg, std::size_t class_index, Split split,
                                      std::size_t index) {
    static const std::array<nonlinear::BoucWenVariant, 3> variants{
        nonlinear::BoucWenVariant::standard(), nonlinear::BoucWenVariant::degrading(),
        nonlinear::BoucWenVariant::pinching()};
    const auto building = nonlinear::ShearBuilding::uniform(6, 1.0, 9.0, 0.25, variants.at(class_index));
    const double peak_g = record_peak_g(cfg, split, index);
    const std::uint64_t gseed = ground_motion_seed(cfg.seed, split, index);
    const auto ground = nonlinear::synth_ground_motion(gseed, cfg.duration, cfg.dt, peak_g * kGravity);
    nonlinear::ShearOptions opts;
    opts.total_accel = cfg.total_accel;
    const auto res = nonlinear::simulate_shear_boucwen(building, ground, cfg.dt, opts);
    const std::string d = std::to_string(cfg.dof);
    CleanResponse r{cfg.dt, to_vector(res.response.channel("x" + d)), to_vector(res.response.channel("v" + d)),
                    to_vector(res.response.channel("a" + d)), 0.0, 0.0, {}};
    r.params = {{"variant", nonlinear::to_string(building.variant.kind)},
                {"stories", building.stories()},
                {"m", 1.0},
                {"k", 9.0},
                {"c", 0.25},
                {"ground_seed", gseed},
                {"peak_g", peak_g},
                {"total_accel", cfg.total_accel},
                {"dof", cfg.dof}};
    return r;
}

std::vector<double> noisy(const std::vector<double>& clean, double dt, double ratio, std::uint64_t seed) {
    const auto ts = TimeSeries::single(dt, {"s", ""}, clean);
    const auto out = signal::add_measurement_noise(ts, {ratio, seed});
    return to_vector(out.channel(0));
}

[[noreturn]] void rethrow_with(const std::string& who) {
    try {
        throw;
    } catch (const NumericalError& e) {
        throw NumericalError(who + ": " + e.what());
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(who + ": " + e.what());
    }
}

}  // namespace

std::uint64_t signal_seed(std::uint64_t master, std::size_t class_index, Split split, std::size_t index) {
    return derive_seed(master, {class_index, split_index(split), index});
}

std::uint64_t ground_motion_seed(std::uint64_t master, Split split, std::size_t index) {
    return derive_seed(master, {kGroundTag, split_index(split), index});
}

LabeledSignal generate_signal(const RunConfig& cfg, std::size_t class_index, Split split, std::size_t index) {
    if (class_index >= cfg.classes.size()) throw Error("class index out of range");
    const std::uint64_t seed = signal_seed(cfg.seed, class_index, split, index);
    const std::string who = to_string(cfg.system) + " signal " + cfg.classes[class_index] + "/" +
                            signal::to_string(split) + "/" + std::to_string(index);
    try {
        CleanResponse r;
        switch (cfg.system) {
            case SystemKind::Linear: r = simulate_linear(cfg, class_index, seed); break;
            case SystemKind::FreeFall: r = simulate_freefall_signal(cfg, class_index, seed); break;
            case SystemKind::BoucWen: r = simulate_boucwen_signal(cfg, class_index, split, index); break;
        }

        auto accel = noisy(r.a, r.dt, cfg.noise_ratio, derive_seed(seed, {kAccelNoise}));
        std::vector<double> disp;
        if (cfg.disp_source == DispSource::Independent) {
            disp = noisy(r.x, r.dt, cfg.noise_ratio, derive_seed(seed, {kDispNoise}));
        } else {
            const auto integ = signal::double_integrate(TimeSeries::single(r.dt, {"accel", "m/s^2"}, accel),
                                                        r.x0, r.v0);
            disp = to_vector(integ.channel("disp"));
        }
        auto vel = noisy(r.v, r.dt, cfg.noise_ratio, derive_seed(seed, {kVelNoise}));

        LabeledSignal out{
            TimeSeries(r.dt,
                       {{"accel", "m/s^2"}, {"disp", "m"}, {"vel", "m/s"},
                        {"accel_true", "m/s^2"}, {"disp_true", "m"}, {"vel_true", "m/s"}},
                       {std::move(accel), std::move(disp), std::move(vel), r.a, r.x, r.v}),
            cfg.classes[class_index],
            {}};
        out.provenance.system = to_string(cfg.system);
        out.provenance.seed = seed;
        out.provenance.params = r.params;
        out.provenance.params["disp_source"] = to_string(cfg.disp_source);
        out.provenance.noise_ratio = cfg.noise_ratio;
        out.provenance.filtered = false;
        return out;
    } catch (...) {
        rethrow_with(who);
    }
}

fs::path simulate_dataset(const RunConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    signal::DatasetManifest manifest;
    manifest.classes = cfg.classes;
    const std::array<std::pair<Split, std::size_t>, 3> splits{{{Split::Train, cfg.counts.train_per_class},
                                                               {Split::Validate, cfg.counts.validate_per_class},
                                                               {Split::Test, cfg.counts.test_per_class}}};
    for (const auto& [split, count] : splits) {
        if (count == 0) continue;
        fs::create_directories(out_dir / signal::to_string(split));
        for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
            for (std::size_t i = 0; i < count; ++i) {
                const auto sig = generate_signal(cfg, c, split, i);
                const fs::path path =
                    out_dir / signal::to_string(split) / (cfg.classes[c] + "_" + std::to_string(i) + ".csv");
                signal::write_signal(sig, path);
                manifest.entries.push_back({path, cfg.classes[c], split});
            }
        }
    }
    const fs::path mpath = out_dir / "manifest.json";
    signal::save_manifest(manifest, mpath);
    return mpath;
}

fs::path fuse_dataset(const fs::path& manifest_path, const kalman::FusionSettings& settings,
                      const fs::path& out_dir) {
    const auto manifest = signal::load_manifest(manifest_path);
    signal::DatasetManifest fused;
    fused.classes = manifest.classes;
    const fs::path root = manifest_path.parent_path();
    for (const auto& e : manifest.entries) {
        try {
            const auto sig = signal::read_signal(e.path);
            const auto& ts = sig.signal;
            if (std::abs(ts.dt() - settings.config.dt) > 1e-12 * ts.dt()) {
                throw Error("signal dt " + std::to_string(ts.dt()) + " does not match the filter dt " +
                            std::to_string(settings.config.dt));
            }
            const auto accel = ts.select("accel");
            const auto disp = ts.has_channel("disp") ? ts.select("disp")
                                                     : signal::double_integrate(accel).select("disp");
            std::vector<double> decimated;
            const auto dsrc = disp.channel(0);
            for (std::size_t k = 0; k < dsrc.size(); k += settings.config.disp_decimation) decimated.push_back(dsrc[k]);
            const auto disp_meas = TimeSeries::single(ts.dt() * static_cast<double>(settings.config.disp_decimation),
                                                      {"disp", "m"}, decimated, ts.t0());
            const auto est = kalman::fuse_signals(accel, disp_meas, settings.config,
                                                  settings.initial_state(decimated.front()));

            std::vector<ChannelInfo> chans{{"accel", "m/s^2"}, {"disp", "m"}, {"vel", "m/s"}};
            std::vector<std::vector<double>> data{to_vector(accel.channel(0)), to_vector(est.channel("disp")),
                                                  to_vector(est.channel("vel"))};
            for (const auto& name : {"accel_true", "disp_true", "vel_true"}) {
                if (ts.has_channel(name)) {
                    chans.push_back(ts.channel_info(ts.channel_index(name)));
                    data.push_back(to_vector(ts.channel(name)));
                }
            }
            LabeledSignal out{TimeSeries(ts.dt(), chans, data, ts.t0()), sig.label, sig.provenance};
            out.provenance.filtered = true;
            const fs::path rel = fs::relative(e.path, root);
            const fs::path dest = out_dir / rel;
            fs::create_directories(dest.parent_path());
            signal::write_signal(out, dest);
            fused.entries.push_back({dest, e.label, e.split});
        } catch (...) {
            rethrow_with(e.path.string());
        }
    }
    const fs::path mpath = out_dir / "manifest.json";
    signal::save_manifest(fused, mpath);
    return mpath;
}

cnn::Tensor1D make_input(const TimeSeries& series, const cnn::Preprocess& pre) {
    if (pre.channels.empty()) throw Error("no input channel selected");
    const std::size_t L = series.size();
    cnn::Tensor1D t(pre.channels.size(), L);
    for (std::size_t c = 0; c < pre.channels.size(); ++c) {
        const auto src = series.channel(pre.channels[c]);
        auto row = t.row(c);
        std::copy(src.begin(), src.end(), row.begin());
        if (pre.zscore) {
            double mean = 0.0;
            for (double v : row) mean += v;
            mean /= static_cast<double>(L);
            double var = 0.0;
            for (double v : row) var += (v - mean) * (v - mean);
            const double sd = std::sqrt(var / static_cast<double>(L));
            const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
            for (double& v : row) v = (v - mean) * scale;
        }
        if (!pre.offset.empty()) {
            for (double& v : row) v = (v - pre.offset.at(c)) * pre.scale.at(c);
        }
    }
    return t;
}

std::pair<std::vector<double>, std::vector<double>> channel_standardization(
    const std::vector<cnn::LabeledExample>& examples) {
    if (examples.empty()) throw Error("cannot fit standardization on an empty split");
    const std::size_t C = examples.front().input.channels;
    std::vector<double> mean(C, 0.0), inv(C, 1.0);
    for (std::size_t c = 0; c < C; ++c) {
        double n = 0.0, s = 0.0;
        for (const auto& e : examples) {
            for (double v : e.input.row(c)) s += v;
            n += static_cast<double>(e.input.length);
        }
        mean[c] = s / n;
        double var = 0.0;
        for (const auto& e : examples)
            for (double v : e.input.row(c)) var += (v - mean[c]) * (v - mean[c]);
        const double sd = std::sqrt(var / n);
        if (sd > 0.0) inv[c] = 1.0 / sd;
    }
    return {mean, inv};
}

LoadedExamples load_examples(const signal::DatasetManifest& manifest, Split split, const cnn::Preprocess& pre) {
    LoadedExamples out;
    for (const auto& e : manifest.entries_for(split)) {
        try {
            const auto sig = signal::read_signal(e.path);
            out.examples.push_back(cnn::LabeledExample::make(make_input(sig.signal, pre),
                                                             manifest.class_index(e.label), manifest.classes.size()));
            out.names.push_back(e.path.string());
        } catch (...) {
            rethrow_with(e.path.string());
        }
    }
    return out;
}

}  // namespace shmclassnet::pipeline
