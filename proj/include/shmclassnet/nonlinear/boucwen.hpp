#pragma once

#include <string>
#include <vector>

#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::nonlinear {

enum class BoucWenKind { Standard, Degrading, Pinching };

std::string to_string(BoucWenKind kind);
BoucWenKind boucwen_kind_from_string(const std::string& s);

/// Hysteretic law of the first story.
///
/// With Phi = beta sgn(xdot) |r|^{n-1} r + gamma |r|^n:
///   Standard   rdot = xdot (A - Phi)
///   Degrading  rdot = xdot (A - Phi) / eta,   eta = 1 + delta_eta eps
///   Pinching   rdot = xdot (A - Phi) / (1 + a(r) (A - Phi)),
///              a(r) = sqrt(2/pi) (s / sigma) exp(-r^2 / (2 sigma^2)),  s = delta_sigma eps
/// and in every case epsdot = r xdot. The pinching form is the series
/// slip-lock element of Baber and Noori; the slip term is evaluated with
/// (A - Phi) floored at 0 so the denominator stays >= 1.
struct BoucWenVariant {
    BoucWenKind kind = BoucWenKind::Standard;
    double A = 1.0;
    double beta = 2.0;
    double gamma = 1.0;
    double n = 2.0;
    double delta_eta = 0.4;
    double sigma = 0.1;
    double delta_sigma = 0.4;

    static BoucWenVariant standard();
    static BoucWenVariant degrading();
    static BoucWenVariant pinching();

    void validate() const;
};

struct BoucWenRates {
    double rdot;
    double epsdot;
};

BoucWenRates boucwen_rdot(const BoucWenVariant& variant, double xdot1, double r1, double eps1);

/// Shear-type building; story i connects floor i to floor i-1 (floor 0 = ground).
/// Story 1 resists with k_1 r1 + c_1 drift rate, the others linearly.
struct ShearBuilding {
    std::vector<double> mass;
    std::vector<double> stiffness;
    std::vector<double> damping;
    BoucWenVariant variant;

    static ShearBuilding uniform(std::size_t stories, double m, double k, double c,
                                 const BoucWenVariant& variant);
    std::size_t stories() const noexcept { return mass.size(); }
    void validate() const;
};

struct ShearOptions {
    bool total_accel = false;  // report absolute rather than ground-relative accelerations
};

struct ShearResult {
    signal::TimeSeries response;  // x1..xN, v1..vN, a1..aN (ground-relative x, v)
    std::vector<double> r1;
    std::vector<double> eps1;
};

/// RK4 integration from rest. `dt` must divide the ground-motion step; inside a
/// sampling interval the ground acceleration is interpolated linearly. Output
/// is sampled on the ground-motion grid.
ShearResult simulate_shear_boucwen(const ShearBuilding& building, const signal::TimeSeries& ground_accel,
                                   double dt, const ShearOptions& options = {});

}  // namespace shmclassnet::nonlinear
