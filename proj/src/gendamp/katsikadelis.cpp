#include "shmclassnet/gendamp/katsikadelis.hpp"

#include "shmclassnet/error.hpp"

namespace shmclassnet::gendamp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ConvolutionStepper::ConvolutionStepper(const MatrixXd& M, const MatrixXd& C, const MatrixXd& K,
                                       const KernelSpec& kernel, double dt)
    : n_(static_cast<std::size_t>(M.rows())), dt_(dt) {
    const Eigen::Index n = M.rows();
    if (M.cols() != n || C.rows() != n || C.cols() != n || K.rows() != n || K.cols() != n) {
        throw ShapeError("M, C and K must be square matrices of the same size");
    }
    if (!(dt > 0.0)) throw Error("time step must be positive");
    kernel.validate();
    newest_weight_ = kernel.is_dirac() ? 0.0 : kernel_mass(kernel, 0.0, dt);

    const MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd lhs = MatrixXd::Zero(4 * n, 4 * n);
    MatrixXd rhs = MatrixXd::Zero(4 * n, 4 * n);
    const double W = newest_weight_;

    // equation of motion
    lhs.block(0, 0, n, n) = M;
    lhs.block(0, 2 * n, n, n) = C;
    lhs.block(0, 3 * n, n, n) = K;
    // x_k - dt xdot_k + dt^2/4 xddot_k = x_{k-1} - dt^2/4 xddot_{k-1}
    lhs.block(n, 0, n, n) = dt * dt / 4.0 * I;
    lhs.block(n, n, n, n) = -dt * I;
    lhs.block(n, 3 * n, n, n) = I;
    rhs.block(n, 0, n, n) = -dt * dt / 4.0 * I;
    rhs.block(n, 3 * n, n, n) = I;
    // xdot_k - dt/2 xddot_k = xdot_{k-1} + dt/2 xddot_{k-1}
    lhs.block(2 * n, 0, n, n) = -dt / 2.0 * I;
    lhs.block(2 * n, n, n, n) = I;
    rhs.block(2 * n, 0, n, n) = dt / 2.0 * I;
    rhs.block(2 * n, n, n, n) = I;
    if (kernel.is_dirac()) {
        // w_k = xdot_k
        lhs.block(3 * n, n, n, n) = -I;
        lhs.block(3 * n, 2 * n, n, n) = I;
    } else {
        // w_k - W/2 xdot_k = W/2 xdot_{k-1} + f_w_k
        lhs.block(3 * n, n, n, n) = -W / 2.0 * I;
        lhs.block(3 * n, 2 * n, n, n) = I;
        rhs.block(3 * n, n, n, n) = W / 2.0 * I;
    }

    Eigen::FullPivLU<MatrixXd> lu(lhs);
    if (!lu.isInvertible()) throw NumericalError("integration matrix singular", 1);
    B_ = lu.inverse();
    F_ = B_ * rhs;
}

VectorXd ConvolutionStepper::step(const VectorXd& z_prev, const VectorXd& force,
                                  const VectorXd& history_forcing) const {
    const Eigen::Index n = static_cast<Eigen::Index>(n_);
    VectorXd u = VectorXd::Zero(4 * n);
    u.segment(0, n) = force;
    u.segment(3 * n, n) = history_forcing;
    return F_ * z_prev + B_ * u;
}

ConvolutionHistory::ConvolutionHistory(const KernelSpec& kernel, std::size_t n, double dt,
                                       std::size_t max_steps)
    : dirac_(kernel.is_dirac()), n_(n) {
    if (dirac_) return;
    lag_mass_.reserve(max_steps + 1);
    for (std::size_t j = 0; j <= max_steps; ++j) {
        lag_mass_.push_back(kernel_mass(kernel, static_cast<double>(j) * dt,
                                        static_cast<double>(j + 1) * dt));
    }
    // Drop the exactly-zero tail (finite support or underflow).
    while (!lag_mass_.empty() && lag_mass_.back() == 0.0) lag_mass_.pop_back();
    velocities_.reserve(max_steps + 1);
    midpoints_.reserve(max_steps);
}

void ConvolutionHistory::push_velocity(const VectorXd& xdot) {
    if (dirac_) return;
    if (!velocities_.empty()) midpoints_.push_back(0.5 * (xdot + velocities_.back()));
    velocities_.push_back(xdot);
}

VectorXd ConvolutionHistory::forcing() const {
    VectorXd fw = VectorXd::Zero(static_cast<Eigen::Index>(n_));
    if (dirac_) return fw;
    // next step k = velocities_.size(); sum over i = 1 .. k-1 of W_i h_i, W_i at lag k - i
    const std::size_t k = velocities_.size();
    if (k < 2) return fw;
    const std::size_t span = lag_mass_.size();
    const std::size_t i_begin = (k > span) ? k - span + 1 : 1;
    for (std::size_t i = std::max<std::size_t>(i_begin, 1); i <= k - 1; ++i) {
        fw += lag_mass_[k - i] * midpoints_[i - 1];
    }
    return fw;
}

}  // namespace shmclassnet::gendamp
