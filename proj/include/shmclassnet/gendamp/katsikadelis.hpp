#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "shmclassnet/gendamp/kernel.hpp"

namespace shmclassnet::gendamp {

/// Linear step z_k = F z_{k-1} + B u_k for the stacked state
/// z = [xddot, xdot, w, x] (4n entries) of
///
///   M xddot + C w + K x = f,   w(t) = integral_0^t g(t - tau) xdot(tau) d tau,
///
/// using average-acceleration kinematics and trapezoidal convolution
/// quadrature. The input is u_k = [f_k, 0, 0, f_w_k] where f_w_k is the
/// history part of the convolution (see ConvolutionHistory).
///
/// Because W_k depends only on dt, F and B are constant and built once.
/// For the Dirac kernel the fourth block row becomes w_k = xdot_k.
class ConvolutionStepper {
public:
    ConvolutionStepper(const Eigen::MatrixXd& M, const Eigen::MatrixXd& C, const Eigen::MatrixXd& K,
                       const KernelSpec& kernel, double dt);

    std::size_t dofs() const noexcept { return n_; }
    double dt() const noexcept { return dt_; }

    /// W_k, the weight of the most recent interval (0 for Dirac).
    double newest_weight() const noexcept { return newest_weight_; }

    Eigen::VectorXd step(const Eigen::VectorXd& z_prev, const Eigen::VectorXd& force,
                         const Eigen::VectorXd& history_forcing) const;

    const Eigen::MatrixXd& transition() const noexcept { return F_; }
    const Eigen::MatrixXd& input_map() const noexcept { return B_; }

    // Block accessors on a stacked state.
    auto accel(const Eigen::VectorXd& z) const { return z.segment(0, n_); }
    auto vel(const Eigen::VectorXd& z) const { return z.segment(n_, n_); }
    auto conv(const Eigen::VectorXd& z) const { return z.segment(2 * n_, n_); }
    auto disp(const Eigen::VectorXd& z) const { return z.segment(3 * n_, n_); }

private:
    std::size_t n_;
    double dt_;
    double newest_weight_;
    Eigen::MatrixXd F_;
    Eigen::MatrixXd B_;
};

/// Trapezoidal history of the convolution integral.
///
/// After pushing velocities xdot_0 .. xdot_{k-1}, `forcing()` returns
/// f_w_k = sum_{i=1}^{k-1} W_i (xdot_i + xdot_{i-1}) / 2 with
/// W_i = mass of g on [(k-i) dt, (k-i+1) dt].
class ConvolutionHistory {
public:
    ConvolutionHistory(const KernelSpec& kernel, std::size_t n, double dt, std::size_t max_steps);

    void push_velocity(const Eigen::VectorXd& xdot);
    Eigen::VectorXd forcing() const;
    /// Index k of the next step to be taken.
    std::size_t next_step() const noexcept { return velocities_.empty() ? 0 : velocities_.size(); }

private:
    bool dirac_;
    std::size_t n_;
    std::vector<double> lag_mass_;  // lag_mass_[j] = mass of g on [j dt, (j+1) dt]
    std::vector<Eigen::VectorXd> velocities_;
    std::vector<Eigen::VectorXd> midpoints_;  // midpoints_[i-1] = (xdot_i + xdot_{i-1}) / 2
};

}  // namespace shmclassnet::gendamp
