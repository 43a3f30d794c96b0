#include "shmclassnet/nonlinear/freefall.hpp"

#include <cmath>
#include <random>

#include "shmclassnet/error.hpp"
#include "shmclassnet/gendamp/gendamp.hpp"
#include "shmclassnet/gendamp/katsikadelis.hpp"

namespace shmclassnet::nonlinear {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void FreeFallSystem::validate() const {
    if (!(m > 0.0) || !(k > 0.0)) throw Error("free-fall system needs m > 0 and k > 0");
    if (!(c >= 0.0)) throw Error("free-fall damper coefficient must be non-negative");
    if (!(force_variance >= 0.0)) throw Error("force variance must be non-negative");
    kernel.validate();
}

FreeFallResult simulate_freefall(const FreeFallSystem& system, double dt, double duration,
                                 std::uint64_t seed, double x0, double v0,
                                 const FreeFallOptions& options) {
    system.validate();
    const std::size_t steps = gendamp::step_count(duration, dt);

    const MatrixXd M = MatrixXd::Constant(1, 1, system.m);
    const MatrixXd zero = MatrixXd::Zero(1, 1);
    const gendamp::ConvolutionStepper stepper(M, zero, zero, system.kernel, dt);
    gendamp::ConvolutionHistory history(system.kernel, 1, dt, steps);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(system.force_variance));
    auto applied_force = [&]() {
        const double noise = system.force_variance > 0.0 ? gauss(rng) : 0.0;
        return -system.m * system.gravity + noise;
    };

    auto indicator = [&](double x) -> bool {
        switch (options.contact) {
            case ContactMode::NeverContact: return false;
            case ContactMode::AlwaysContact: return true;
            case ContactMode::Physical: break;
        }
        return x <= system.contact_level;
    };
    auto contact_force = [&](bool h, double x, double v, double w) {
        return h ? system.c * v + system.c * w + system.k * x : 0.0;
    };

    std::vector<double> xs(steps + 1), vs(steps + 1), as(steps + 1);
    std::vector<std::uint8_t> hs(steps + 1);

    VectorXd z(4);
    const double w0 = system.kernel.is_dirac() ? v0 : 0.0;
    const bool h0 = indicator(x0);
    double fn = contact_force(h0, x0, v0, w0);
    z << (applied_force() - fn) / system.m, v0, w0, x0;
    xs[0] = x0;
    vs[0] = v0;
    as[0] = z(0);
    hs[0] = h0;
    history.push_velocity(z.segment(1, 1));

    FreeFallResult result{signal::TimeSeries::single(dt, {"x", "m"}, {0.0}), {}, 0};
    const double tol = options.tolerance;

    for (std::size_t k = 1; k <= steps; ++k) {
        const double f = applied_force();
        const VectorXd fw = history.forcing();
        VectorXd input(1);
        VectorXd z_new;
        bool converged = false;
        bool locked = false;
        int flips = 0;
        bool h_prev = hs[k - 1];
        bool first = true;
        for (int it = 0; it < options.max_iterations; ++it) {
            input(0) = f - fn;
            z_new = stepper.step(z, input, fw);
            if (!z_new.allFinite()) throw NumericalError("integration diverged", k);
            bool h = locked ? true : indicator(z_new(3));
            if (!first && h != h_prev) ++flips;
            first = false;
            h_prev = h;
            if (flips >= 2 && !locked) {
                locked = true;
                h = true;
                ++result.chatter_steps;
            }
            const double fn_new = contact_force(h, z_new(3), z_new(1), z_new(2));
            const double change = std::abs(fn_new - fn);
            fn = fn_new;
            if (change <= tol * std::max(1.0, std::abs(fn))) {
                input(0) = f - fn;
                z_new = stepper.step(z, input, fw);
                hs[k] = h;
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw NumericalError("contact force fixed-point iteration did not converge", k);
        }
        z = z_new;
        history.push_velocity(z.segment(1, 1));
        xs[k] = z(3);
        vs[k] = z(1);
        as[k] = z(0);
    }

    result.response = signal::TimeSeries(dt, {{"x", "m"}, {"v", "m/s"}, {"a", "m/s^2"}},
                                         {std::move(xs), std::move(vs), std::move(as)});
    result.contact = std::move(hs);
    return result;
}

}  // namespace shmclassnet::nonlinear
