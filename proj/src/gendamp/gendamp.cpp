#include "shmclassnet/gendamp/gendamp.hpp"

#include <cmath>
#include <random>

#include "shmclassnet/error.hpp"
#include "shmclassnet/gendamp/katsikadelis.hpp"

namespace shmclassnet::gendamp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

void GenDampedSystem::validate() const {
    const auto n = M.rows();
    if (n < 1 || M.cols() != n || C.rows() != n || C.cols() != n || K.rows() != n || K.cols() != n) {
        throw ShapeError("M, C and K must be square matrices of equal size");
    }
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error("mass matrix must be symmetric");
    }
    if (Eigen::LLT<MatrixXd>(M).info() != Eigen::Success) {
        throw Error("mass matrix must be positive definite");
    }
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, K.cwiseAbs().maxCoeff())) {
        throw Error("stiffness matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(K);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, K.cwiseAbs().maxCoeff())) {
        throw Error("stiffness matrix must be positive semi-definite");
    }
    kernel.validate();
}

json to_json(const KernelSpec& k) {
    json j{{"kind", to_string(k.kind)}};
    if (!k.is_dirac()) j["mu"] = k.mu;
    return j;
}

KernelSpec kernel_from_json(const json& j) {
    KernelSpec k;
    k.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
    if (!k.is_dirac()) k.mu = j.at("mu").get<double>();
    k.validate();
    return k;
}

namespace {

json matrix_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

MatrixXd matrix_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.empty()) throw Error(std::string("field '") + name + "' must be a 2D array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols) {
            throw Error(std::string("field '") + name + "' has ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace

json to_json(const GenDampedSystem& s) {
    return json{{"M", matrix_to_json(s.M)},
                {"C", matrix_to_json(s.C)},
                {"K", matrix_to_json(s.K)},
                {"kernel", to_json(s.kernel)}};
}

GenDampedSystem gendamp_system_from_json(const json& j) {
    GenDampedSystem s{matrix_from_json(j.at("M"), "M"), matrix_from_json(j.at("C"), "C"),
                      matrix_from_json(j.at("K"), "K"), kernel_from_json(j.at("kernel"))};
    s.validate();
    return s;
}

std::size_t step_count(double duration, double dt) {
    if (!(dt > 0.0) || !(duration > 0.0)) throw Error("duration and dt must be positive");
    const double ratio = duration / dt;
    const double steps = std::round(ratio);
    if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, steps)) {
        throw Error("duration/dt must be a positive integer count");
    }
    return static_cast<std::size_t>(steps);
}

signal::TimeSeries white_noise_force(std::size_t n, double variance, double dt, double duration,
                                     std::uint64_t seed) {
    if (n < 1) throw Error("white_noise_force needs at least one DOF");
    if (!(variance >= 0.0)) throw Error("force variance must be non-negative");
    const std::size_t samples = step_count(duration, dt) + 1;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sd = std::sqrt(variance);
    std::vector<std::vector<double>> data(n, std::vector<double>(samples, 0.0));
    std::vector<signal::ChannelInfo> channels;
    for (std::size_t d = 0; d < n; ++d) channels.push_back({"f" + std::to_string(d + 1), "N"});
    // sample-major so that the DOF-1 sequence does not depend on n
    for (std::size_t k = 0; k < samples; ++k) {
        for (std::size_t d = 0; d < n; ++d) data[d][k] = sd * gauss(rng);
    }
    return signal::TimeSeries(dt, std::move(channels), std::move(data));
}

signal::TimeSeries simulate_gendamp(const GenDampedSystem& system, const signal::TimeSeries& force,
                                    const VectorXd& x0, const VectorXd& v0, double dt,
                                    double duration) {
    system.validate();
    const std::size_t n = system.dofs();
    const auto ni = static_cast<Eigen::Index>(n);
    if (force.num_channels() != n) {
        throw ShapeError("force has " + std::to_string(force.num_channels()) + " channels, system has " +
                         std::to_string(n) + " DOFs");
    }
    if (x0.size() != ni || v0.size() != ni) throw ShapeError("initial condition size mismatch");
    if (std::abs(force.dt() - dt) > 1e-12 * dt) throw Error("force sampling step does not match dt");
    const std::size_t steps = step_count(duration, dt);
    if (force.size() < steps + 1) {
        throw Error("force covers " + std::to_string(force.size()) + " samples, need " +
                    std::to_string(steps + 1));
    }

    const ConvolutionStepper stepper(system.M, system.C, system.K, system.kernel, dt);
    ConvolutionHistory history(system.kernel, n, dt, steps);

    auto force_at = [&](std::size_t k) {
        VectorXd f(ni);
        for (std::size_t d = 0; d < n; ++d) f(static_cast<Eigen::Index>(d)) = force.data()[d][k];
        return f;
    };

    VectorXd z(4 * ni);
    const VectorXd w0 = system.kernel.is_dirac() ? v0 : VectorXd::Zero(ni);
    z.segment(0, ni) = system.M.ldlt().solve(force_at(0) - system.C * w0 - system.K * x0);
    z.segment(ni, ni) = v0;
    z.segment(2 * ni, ni) = w0;
    z.segment(3 * ni, ni) = x0;

    std::vector<std::vector<double>> out(3 * n, std::vector<double>(steps + 1));
    auto record = [&](std::size_t k) {
        for (std::size_t d = 0; d < n; ++d) {
            const auto di = static_cast<Eigen::Index>(d);
            out[d][k] = z(3 * ni + di);
            out[n + d][k] = z(ni + di);
            out[2 * n + d][k] = z(di);
        }
    };
    record(0);
    history.push_velocity(z.segment(ni, ni));

    for (std::size_t k = 1; k <= steps; ++k) {
        z = stepper.step(z, force_at(k), history.forcing());
        if (!z.allFinite()) throw NumericalError("integration diverged", k);
        history.push_velocity(z.segment(ni, ni));
        record(k);
    }

    std::vector<signal::ChannelInfo> channels;
    for (std::size_t d = 0; d < n; ++d) channels.push_back({"x" + std::to_string(d + 1), "m"});
    for (std::size_t d = 0; d < n; ++d) channels.push_back({"v" + std::to_string(d + 1), "m/s"});
    for (std::size_t d = 0; d < n; ++d) channels.push_back({"a" + std::to_string(d + 1), "m/s^2"});
    return signal::TimeSeries(dt, std::move(channels), std::move(out), force.t0());
}

GenDampedSystem linear_experiment_system(const KernelSpec& kernel) {
    const double m1 = 1.0, m2 = 1.0, c1 = 1.0, c2 = 2.0, k1 = 9.0, k2 = 11.0;
    GenDampedSystem s;
    s.M = (MatrixXd(2, 2) << m1, 0.0, 0.0, m2).finished();
    s.C = (MatrixXd(2, 2) << c1 + c2, -c2, -c2, c2).finished();
    s.K = (MatrixXd(2, 2) << k1 + k2, -k2, -k2, k2).finished();
    s.kernel = kernel;
    return s;
}

std::array<GenDampedSystem, 3> make_linear_experiment_models() {
    return {linear_experiment_system(KernelSpec::exponential(1.5)),
            linear_experiment_system(KernelSpec::gaussian(1.5)),
            linear_experiment_system(KernelSpec::dirac())};
}

}  // namespace shmclassnet::gendamp
