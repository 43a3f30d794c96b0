#pragma once

#include <cstdint>
#include <vector>

#include "shmclassnet/gendamp/kernel.hpp"
#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::nonlinear {

/// Mass dropped onto a base with spring k, viscous damper c and convolution
/// damper c * g(t), all active only while x <= contact_level:
///
///   m xddot + H(x) (c xdot + c integral g(t - tau) xdot(tau) d tau + k x) = -m g + noise.
struct FreeFallSystem {
    double m = 1.0;
    double c = 3.0;
    double k = 1000.0;
    gendamp::KernelSpec kernel = gendamp::KernelSpec::exponential(100.0);
    double gravity = 9.81;
    double force_variance = 9.0;  // white-noise force added to -m g; 0 disables it
    double contact_level = 0.0;

    void validate() const;
};

enum class ContactMode {
    Physical,     // H(x) = 1 for x <= contact_level
    NeverContact, // H == 0 (ballistic check)
    AlwaysContact // H == 1 (linear check)
};

struct FreeFallOptions {
    ContactMode contact = ContactMode::Physical;
    double tolerance = 1e-10;
    int max_iterations = 50;
};

struct FreeFallResult {
    signal::TimeSeries response;       // channels x, v, a
    std::vector<std::uint8_t> contact; // H at each sample
    std::size_t chatter_steps = 0;     // steps resolved with the contact locked on
};

/// Steps the system with the convolution stepper (C, K replaced by zero blocks
/// and the contact force moved into the input) and solves the per-step coupling
/// between the state and the contact force by fixed-point iteration, starting
/// from the previous step's contact force.
///
/// When the contact indicator flips back and forth between iterates (an impact
/// landing right at the contact level), the step is finished with contact held
/// active so the iteration reduces to a smooth contraction.
FreeFallResult simulate_freefall(const FreeFallSystem& system, double dt, double duration,
                                 std::uint64_t seed, double x0, double v0,
                                 const FreeFallOptions& options = {});

}  // namespace shmclassnet::nonlinear
