#include "shmclassnet/kalman/kalman.hpp"

#include <algorithm>
#include <cmath>

#include "shmclassnet/error.hpp"

namespace shmclassnet::kalman {

using Eigen::Matrix2d;
using Eigen::Vector2d;

KfConfig KfConfig::with_dt(double dt) {
    KfConfig cfg;
    cfg.dt = dt;
    return cfg;
}

Matrix2d KfConfig::Ad() const { return (Matrix2d() << 1.0, dt, 0.0, 1.0).finished(); }

Vector2d KfConfig::Bd() const { return {dt * dt / 2.0, dt}; }

void KfConfig::validate() const {
    if (!(dt > 0.0)) throw Error("Kalman filter dt must be positive");
    if (!(Rd > 0.0)) throw Error("measurement variance Rd must be positive");
    if (disp_decimation < 1) throw Error("displacement decimation must be >= 1");
    const double scale = Qd.cwiseAbs().maxCoeff();
    if ((Qd - Qd.transpose()).cwiseAbs().maxCoeff() > 1e-15 * std::max(scale, 1.0)) {
        throw Error("Qd must be symmetric");
    }
    // rank-deficient Qd (e.g. a single noise input) comes out of the solver a few ulps below zero
    if (Eigen::SelfAdjointEigenSolver<Matrix2d>(Qd).eigenvalues().minCoeff() < -1e-12 * scale) {
        throw Error("Qd must be positive semi-definite");
    }
}

KfState kf_predict(const KfState& state, double accel, const KfConfig& cfg) {
    if (!std::isfinite(accel) || !state.x.allFinite()) throw Error("kf_predict: non-finite input");
    const Matrix2d A = cfg.Ad();
    KfState out;
    out.x = A * state.x + cfg.Bd() * accel;
    out.P = A * state.P * A.transpose() + cfg.Qd;
    out.k = state.k + 1;
    return out;
}

KfUpdateResult kf_update(const KfState& state, double disp, const KfConfig& cfg) {
    if (!std::isfinite(disp) || !state.x.allFinite()) throw Error("kf_update: non-finite input");
    const Eigen::RowVector2d H = KfConfig::H();
    const double s = cfg.Rd + (H * state.P * H.transpose())(0, 0);
    if (!(s > 0.0)) throw NumericalError("non-positive innovation variance", state.k);

    KfUpdateResult r;
    r.trace.prior_x = state.x;
    r.trace.prior_P = state.P;
    const Vector2d J = state.P * H.transpose() / s;
    const double innovation = disp - (H * state.x)(0, 0);
    const Matrix2d IJH = Matrix2d::Identity() - J * H;

    r.state.x = state.x + J * innovation;
    const Matrix2d P = IJH * state.P * IJH.transpose() + J * cfg.Rd * J.transpose();
    r.state.P = 0.5 * (P + P.transpose());
    r.state.k = state.k;

    r.trace.gain = J;
    r.trace.innovation = innovation;
    r.trace.posterior_x = r.state.x;
    r.trace.posterior_P = r.state.P;
    return r;
}

signal::TimeSeries fuse_signals(const signal::TimeSeries& accel, const signal::TimeSeries& disp,
                                const KfConfig& cfg, std::optional<KfState> init) {
    cfg.validate();
    if (accel.num_channels() != 1 || disp.num_channels() != 1) {
        throw ShapeError("fuse_signals expects single-channel acceleration and displacement");
    }
    if (std::abs(accel.dt() - cfg.dt) > 1e-9 * cfg.dt) {
        throw Error("acceleration sampling step does not match the filter dt");
    }
    const double disp_dt = cfg.dt * static_cast<double>(cfg.disp_decimation);
    if (std::abs(disp.dt() - disp_dt) > 1e-9 * disp_dt || std::abs(disp.t0() - accel.t0()) > 1e-9 * cfg.dt) {
        throw Error("displacement grid is not aligned with the acceleration grid");
    }
    const std::size_t n = accel.size();
    const std::size_t dec = cfg.disp_decimation;
    const std::size_t expected_disp = (n + dec - 1) / dec;
    if (disp.size() < expected_disp) {
        throw Error("displacement has " + std::to_string(disp.size()) + " samples, grid needs " +
                    std::to_string(expected_disp));
    }

    const auto a = accel.channel(0);
    const auto d = disp.channel(0);
    KfState state = init ? *init : KfState{Vector2d(d[0], 0.0), Matrix2d::Identity() * 1e-2, 0};

    std::vector<double> xs(n), vs(n);
    xs[0] = state.x(0);
    vs[0] = state.x(1);
    for (std::size_t k = 1; k < n; ++k) {
        state = kf_predict(state, a[k - 1], cfg);
        if (k % dec == 0) state = kf_update(state, d[k / dec], cfg).state;
        if (!state.x.allFinite()) throw NumericalError("Kalman filter diverged", k);
        xs[k] = state.x(0);
        vs[k] = state.x(1);
    }
    return signal::TimeSeries(cfg.dt, {{"disp", "m"}, {"vel", "m/s"}}, {std::move(xs), std::move(vs)},
                              accel.t0());
}

KfState FusionSettings::initial_state(double first_disp) const {
    KfState s;
    s.x = x0 ? *x0 : Vector2d(first_disp, 0.0);
    s.P = Matrix2d::Identity() * P0_scale;
    return s;
}

FusionSettings fusion_settings_from_json(const nlohmann::json& j) {
    FusionSettings s;
    s.config.dt = j.value("dt", 0.01);
    s.config.Qd = Matrix2d::Identity() * j.value("Qd_scale", 1e-9);
    s.config.Rd = j.value("Rd", 1e-3);
    s.config.disp_decimation = j.value("disp_decimation", std::size_t{1});
    if (j.contains("x0") && !j.at("x0").is_null()) {
        const auto v = j.at("x0").get<std::vector<double>>();
        if (v.size() != 2) throw Error("fusion config 'x0' must have two entries");
        s.x0 = Vector2d(v[0], v[1]);
    }
    s.P0_scale = j.value("P0_scale", 1e-2);
    if (!(s.P0_scale >= 0.0)) throw Error("fusion config 'P0_scale' must be non-negative");
    s.config.validate();
    return s;
}

nlohmann::json to_json(const FusionSettings& s) {
    nlohmann::json j{{"dt", s.config.dt},
                     {"Qd_scale", s.config.Qd(0, 0)},
                     {"Rd", s.config.Rd},
                     {"disp_decimation", s.config.disp_decimation},
                     {"P0_scale", s.P0_scale}};
    j["x0"] = s.x0 ? nlohmann::json{(*s.x0)(0), (*s.x0)(1)} : nlohmann::json(nullptr);
    return j;
}

}  // namespace shmclassnet::kalman
