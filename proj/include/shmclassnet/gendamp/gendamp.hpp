#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "shmclassnet/gendamp/kernel.hpp"
#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::gendamp {

/// n-DOF linear system with convolution damping:
///   M xddot + C integral_0^t g(t - tau) xdot(tau) d tau + K x = f.
struct GenDampedSystem {
    Eigen::MatrixXd M;
    Eigen::MatrixXd C;
    Eigen::MatrixXd K;
    KernelSpec kernel;

    std::size_t dofs() const noexcept { return static_cast<std::size_t>(M.rows()); }
    /// Checks shapes, M symmetric positive definite, K symmetric positive semi-definite.
    void validate() const;
};

nlohmann::json to_json(const GenDampedSystem& s);
GenDampedSystem gendamp_system_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const nlohmann::json& j);

/// i.i.d. N(0, variance) force samples per DOF on round(duration/dt)+1 samples.
/// Channels are named f1..fn.
signal::TimeSeries white_noise_force(std::size_t n, double variance, double dt, double duration,
                                     std::uint64_t seed);

/// Number of steps round(duration/dt); throws when duration/dt is not an integer.
std::size_t step_count(double duration, double dt);

/// Time-steps the convolution-damped system from (x0, v0) under `force`.
///
/// Returns round(duration/dt)+1 samples with channels x1..xn, v1..vn, a1..an.
/// The initial acceleration solves M a0 = f(0) - C w0 - K x0 with w0 = v0 for
/// the Dirac kernel and w0 = 0 otherwise.
signal::TimeSeries simulate_gendamp(const GenDampedSystem& system, const signal::TimeSeries& force,
                                    const Eigen::VectorXd& x0, const Eigen::VectorXd& v0, double dt,
                                    double duration);

/// The 2-DOF chain used by the linear experiments:
/// M = I, C = [[3,-2],[-2,2]], K = [[20,-11],[-11,11]].
GenDampedSystem linear_experiment_system(const KernelSpec& kernel);

/// Models A, B and C: Exponential(1.5), Gaussian(1.5) and Dirac kernels on the same M, C, K.
std::array<GenDampedSystem, 3> make_linear_experiment_models();

}  // namespace shmclassnet::gendamp
