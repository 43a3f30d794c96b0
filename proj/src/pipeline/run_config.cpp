#include "shmclassnet/pipeline/run_config.hpp"

#include <fstream>

#include "shmclassnet/error.hpp"

namespace shmclassnet::pipeline {

using nlohmann::json;

std::string to_string(SystemKind k) {
    switch (k) {
        case SystemKind::Linear: return "linear";
        case SystemKind::FreeFall: return "freefall";
        case SystemKind::BoucWen: return "boucwen";
    }
    return "linear";
}

SystemKind system_kind_from_string(const std::string& s) {
    for (auto k : {SystemKind::Linear, SystemKind::FreeFall, SystemKind::BoucWen}) {
        if (to_string(k) == s) return k;
    }
    throw Error("unknown system '" + s + "'");
}

std::string to_string(SignalChannel c) {
    switch (c) {
        case SignalChannel::Disp: return "disp";
        case SignalChannel::Vel: return "vel";
        case SignalChannel::Accel: return "accel";
    }
    return "disp";
}

SignalChannel signal_channel_from_string(const std::string& s) {
    for (auto c : {SignalChannel::Disp, SignalChannel::Vel, SignalChannel::Accel}) {
        if (to_string(c) == s) return c;
    }
    throw Error("unknown channel '" + s + "' (expected disp, vel or accel)");
}

std::string to_string(DispSource d) { return d == DispSource::Independent ? "independent" : "integrated"; }

DispSource disp_source_from_string(const std::string& s) {
    if (s == "independent") return DispSource::Independent;
    if (s == "integrated") return DispSource::Integrated;
    throw Error("unknown displacement source '" + s + "'");
}

void RunConfig::validate() const {
    if (classes.size() < 2) throw Error("a run needs at least two classes");
    if (counts.train_per_class < 1 || counts.test_per_class < 1) throw Error("counts must be >= 1");
    if (!(dt > 0.0) || !(duration > 0.0)) throw Error("dt and duration must be positive");
    if (!(noise_ratio >= 0.0)) throw Error("noise ratio must be non-negative");
    if (!(initial_condition_spread >= 0.0)) throw Error("initial condition spread must be non-negative");
    switch (system) {
        case SystemKind::Linear:
            if (classes.size() > 3) throw Error("the linear system defines models A, B and C only");
            if (dof < 1 || dof > 2) throw Error("the linear system has 2 degrees of freedom");
            break;
        case SystemKind::FreeFall:
            if (classes.size() > 2) throw Error("the free-fall system defines models A and B only");
            if (dof != 1) throw Error("the free-fall system has 1 degree of freedom");
            break;
        case SystemKind::BoucWen:
            if (classes.size() > 3) throw Error("the Bouc-Wen building defines models A, B and C only");
            if (dof < 1 || dof > 6) throw Error("the shear building has 6 stories");
            if (train_peaks_g.empty()) throw Error("Bouc-Wen runs need at least one training record");
            break;
    }
    train.validate();
    fusion.config.validate();
}

namespace {

RunConfig linear_base() {
    RunConfig c;
    c.system = SystemKind::Linear;
    c.classes = {"A", "B", "C"};
    c.dof = 2;
    c.dt = 0.01;
    c.duration = 40.0;
    c.counts = {3, 3, 3};
    return c;
}

RunConfig freefall_base() {
    RunConfig c;
    c.system = SystemKind::FreeFall;
    c.classes = {"A", "B"};
    c.dof = 1;
    c.dt = 0.01;
    c.duration = 100.0;
    c.counts = {3, 3, 5};
    c.standardize = true;  // displacements are ~1e-2 m
    return c;
}

RunConfig boucwen_base() {
    RunConfig c;
    c.system = SystemKind::BoucWen;
    c.classes = {"A", "B", "C"};
    c.dof = 1;
    c.dt = 0.02;
    c.duration = 40.0;
    c.counts = {3, 3, 3};
    return c;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"linear3", "freefall2", "boucwen3", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "sensitivity"};
}

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    if (name == "linear3" || name == "fig2") {
        c = linear_base();
    } else if (name == "fig3") {
        c = linear_base();
        c.channel = SignalChannel::Vel;
    } else if (name == "freefall2" || name == "fig4") {
        c = freefall_base();
    } else if (name == "fig5") {
        c = freefall_base();
        c.channel = SignalChannel::Vel;
    } else if (name == "boucwen3" || name == "fig6") {
        c = boucwen_base();
    } else if (name == "fig7") {
        c = boucwen_base();
        c.channel = SignalChannel::Vel;
    } else if (name == "sensitivity") {
        c = linear_base();
        c.dof = 1;
        c.network = "sensitivity";
    } else {
        throw Error("unknown preset '" + name + "'");
    }
    c.preset = name;
    c.fusion.config = kalman::KfConfig::with_dt(c.dt);
    return c;
}

json to_json(const RunConfig& c) {
    return {{"preset", c.preset},
            {"system", to_string(c.system)},
            {"classes", c.classes},
            {"dof", c.dof},
            {"channel", to_string(c.channel)},
            {"fuse", c.fuse},
            {"noise_ratio", c.noise_ratio},
            {"dt", c.dt},
            {"duration", c.duration},
            {"counts",
             {{"train_per_class", c.counts.train_per_class},
              {"validate_per_class", c.counts.validate_per_class},
              {"test_per_class", c.counts.test_per_class}}},
            {"network", c.network},
            {"train", cnn::to_json(c.train)},
            {"seed", c.seed},
            {"zscore", c.zscore},
            {"standardize", c.standardize},
            {"disp_source", to_string(c.disp_source)},
            {"force_variance", c.force_variance},
            {"random_initial_conditions", c.random_initial_conditions},
            {"initial_condition_spread", c.initial_condition_spread},
            {"total_accel", c.total_accel},
            {"train_peaks_g", c.train_peaks_g},
            {"eval_peak_range_g", {c.eval_peak_min_g, c.eval_peak_max_g}},
            {"fusion", kalman::to_json(c.fusion)}};
}

RunConfig run_config_from_json(const json& j) {
    try {
        RunConfig c = j.contains("preset") ? preset_config(j.at("preset").get<std::string>()) : RunConfig{};
        if (j.contains("system")) {
            // switching systems without a preset starts from that system's defaults
            const auto sys = system_kind_from_string(j.at("system").get<std::string>());
            if (!j.contains("preset") || sys != c.system) {
                c = preset_config(sys == SystemKind::Linear ? "linear3"
                                  : sys == SystemKind::FreeFall ? "freefall2" : "boucwen3");
                c.preset.clear();
            }
        }
        c.classes = j.value("classes", c.classes);
        c.dof = j.value("dof", c.dof);
        if (j.contains("channel")) c.channel = signal_channel_from_string(j.at("channel").get<std::string>());
        c.fuse = j.value("fuse", c.fuse);
        c.noise_ratio = j.value("noise_ratio", c.noise_ratio);
        const double old_dt = c.dt;
        c.dt = j.value("dt", c.dt);
        c.duration = j.value("duration", c.duration);
        if (j.contains("counts")) {
            const auto& n = j.at("counts");
            c.counts.train_per_class = n.value("train_per_class", c.counts.train_per_class);
            c.counts.validate_per_class = n.value("validate_per_class", c.counts.validate_per_class);
            c.counts.test_per_class = n.value("test_per_class", c.counts.test_per_class);
        }
        c.network = j.value("network", c.network);
        if (j.contains("train")) c.train = cnn::train_config_from_json(j.at("train"));
        c.seed = j.value("seed", c.seed);
        c.zscore = j.value("zscore", c.zscore);
        c.standardize = j.value("standardize", c.standardize);
        if (j.contains("disp_source")) c.disp_source = disp_source_from_string(j.at("disp_source").get<std::string>());
        c.force_variance = j.value("force_variance", c.force_variance);
        c.random_initial_conditions = j.value("random_initial_conditions", c.random_initial_conditions);
        c.initial_condition_spread = j.value("initial_condition_spread", c.initial_condition_spread);
        c.total_accel = j.value("total_accel", c.total_accel);
        c.train_peaks_g = j.value("train_peaks_g", c.train_peaks_g);
        if (j.contains("eval_peak_range_g")) {
            const auto r = j.at("eval_peak_range_g").get<std::vector<double>>();
            if (r.size() != 2) throw ParseError("eval_peak_range_g", "expected [min, max]");
            c.eval_peak_min_g = r[0];
            c.eval_peak_max_g = r[1];
        }
        if (j.contains("fusion")) {
            c.fusion = kalman::fusion_settings_from_json(j.at("fusion"));
            if (!j.at("fusion").contains("dt")) c.fusion.config.dt = c.dt;
        } else if (c.dt != old_dt) {
            c.fusion.config.dt = c.dt;
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ParseError("run config", e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open config " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ParseError(path, e.what());
    }
    return run_config_from_json(j);
}

}  // namespace shmclassnet::pipeline
