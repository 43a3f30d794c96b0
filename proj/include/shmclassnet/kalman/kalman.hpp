#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::kalman {

/// Displacement/velocity estimate with its covariance.
struct KfState {
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    Eigen::Matrix2d P = Eigen::Matrix2d::Identity() * 1e-2;
    std::size_t k = 0;
};

/// Kinematic model: acceleration drives [disp, vel] through
/// A_d = [[1, dt], [0, 1]], B_d = [dt^2/2, dt]; displacement is observed with H = [1 0].
struct KfConfig {
    double dt = 0.01;
    Eigen::Matrix2d Qd = Eigen::Matrix2d::Identity() * 1e-9;
    double Rd = 1e-3;
    std::size_t disp_decimation = 1;

    static KfConfig with_dt(double dt);

    Eigen::Matrix2d Ad() const;
    Eigen::Vector2d Bd() const;
    static Eigen::RowVector2d H() { return {1.0, 0.0}; }

    void validate() const;
};

struct KfStepTrace {
    Eigen::Vector2d gain;
    double innovation = 0.0;
    Eigen::Vector2d prior_x;
    Eigen::Matrix2d prior_P;
    Eigen::Vector2d posterior_x;
    Eigen::Matrix2d posterior_P;
};

KfState kf_predict(const KfState& state, double accel, const KfConfig& cfg);

struct KfUpdateResult {
    KfState state;
    KfStepTrace trace;
};

/// Joseph-form measurement update; the posterior covariance is symmetrized.
KfUpdateResult kf_update(const KfState& state, double disp, const KfConfig& cfg);

/// Runs predict on every acceleration sample and update wherever a
/// displacement sample exists (every `disp_decimation` steps, aligned at t0).
/// `init` defaults to x = [first displacement, 0], P = 1e-2 I.
/// Returns channels "disp" [m] and "vel" [m/s] on the acceleration grid.
signal::TimeSeries fuse_signals(const signal::TimeSeries& accel, const signal::TimeSeries& disp,
                                const KfConfig& cfg, std::optional<KfState> init = std::nullopt);

/// Fusion settings as stored in JSON: {dt, Qd_scale, Rd, disp_decimation, x0, P0_scale}.
struct FusionSettings {
    KfConfig config;
    std::optional<Eigen::Vector2d> x0;
    double P0_scale = 1e-2;

    KfState initial_state(double first_disp) const;
};

FusionSettings fusion_settings_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FusionSettings& s);

}  // namespace shmclassnet::kalman
