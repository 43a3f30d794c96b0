#include "shmclassnet/nonlinear/boucwen.hpp"

#include <cmath>
#include <numbers>

#include "shmclassnet/error.hpp"

namespace shmclassnet::nonlinear {

std::string to_string(BoucWenKind kind) {
    switch (kind) {
        case BoucWenKind::Standard: return "standard";
        case BoucWenKind::Degrading: return "degrading";
        case BoucWenKind::Pinching: return "pinching";
    }
    return "standard";
}

BoucWenKind boucwen_kind_from_string(const std::string& s) {
    if (s == "standard") return BoucWenKind::Standard;
    if (s == "degrading") return BoucWenKind::Degrading;
    if (s == "pinching") return BoucWenKind::Pinching;
    throw Error("unknown Bouc-Wen variant '" + s + "'");
}

BoucWenVariant BoucWenVariant::standard() { return {}; }

BoucWenVariant BoucWenVariant::degrading() {
    BoucWenVariant v;
    v.kind = BoucWenKind::Degrading;
    return v;
}

BoucWenVariant BoucWenVariant::pinching() {
    BoucWenVariant v;
    v.kind = BoucWenKind::Pinching;
    return v;
}

void BoucWenVariant::validate() const {
    if (!(n >= 1.0)) throw Error("Bouc-Wen exponent n must be >= 1");
    if (kind == BoucWenKind::Pinching && !(sigma > 0.0)) {
        throw Error("pinching width sigma must be positive");
    }
}

BoucWenRates boucwen_rdot(const BoucWenVariant& v, double xdot1, double r1, double eps1) {
    if (!std::isfinite(xdot1) || !std::isfinite(r1) || !std::isfinite(eps1)) {
        throw Error("boucwen_rdot: non-finite input");
    }
    const double abs_r = std::abs(r1);
    const double sgn = (xdot1 > 0.0) - (xdot1 < 0.0);
    // |r|^{n-1} r and |r|^n; n = 2 avoids pow
    const double r_pow_n = (v.n == 2.0) ? abs_r * abs_r : std::pow(abs_r, v.n);
    const double r_pow_nm1_r = (v.n == 2.0) ? abs_r * r1 : std::pow(abs_r, v.n - 1.0) * r1;
    const double phi = v.beta * sgn * r_pow_nm1_r + v.gamma * r_pow_n;
    const double shape = v.A - phi;
    const double epsdot = r1 * xdot1;

    switch (v.kind) {
        case BoucWenKind::Standard:
            return {xdot1 * shape, epsdot};
        case BoucWenKind::Degrading: {
            const double eta = 1.0 + v.delta_eta * eps1;
            if (!(eta > 0.0)) throw Error("degradation function non-positive");
            return {xdot1 * shape / eta, epsdot};
        }
        case BoucWenKind::Pinching: {
            const double s = v.delta_sigma * eps1;
            const double slip = std::sqrt(2.0 / std::numbers::pi) * (s / v.sigma) *
                                std::exp(-r1 * r1 / (2.0 * v.sigma * v.sigma));
            const double denom = 1.0 + std::max(slip, 0.0) * std::max(shape, 0.0);
            return {xdot1 * shape / denom, epsdot};
        }
    }
    return {0.0, epsdot};
}

ShearBuilding ShearBuilding::uniform(std::size_t stories, double m, double k, double c,
                                     const BoucWenVariant& variant) {
    return ShearBuilding{std::vector<double>(stories, m), std::vector<double>(stories, k),
                         std::vector<double>(stories, c), variant};
}

void ShearBuilding::validate() const {
    const std::size_t n = mass.size();
    if (n < 1) throw Error("building needs at least one story");
    if (stiffness.size() != n || damping.size() != n) {
        throw ShapeError("per-story mass, stiffness and damping must have equal length");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(mass[i] > 0.0) || !(stiffness[i] > 0.0)) {
            throw Error("story " + std::to_string(i + 1) + " needs positive mass and stiffness");
        }
        if (!(damping[i] >= 0.0)) throw Error("story damping must be non-negative");
    }
    variant.validate();
}

namespace {

// State layout: x_0..x_{N-1}, v_0..v_{N-1}, r1, eps1.
struct ShearModel {
    const ShearBuilding& b;
    std::size_t n;

    void rhs(const std::vector<double>& s, double ag, std::vector<double>& ds) const {
        const double* x = s.data();
        const double* v = s.data() + n;
        const double r1 = s[2 * n];
        const double eps1 = s[2 * n + 1];
        // story shears
        double shear_above = 0.0;
        for (std::size_t ii = n; ii-- > 0;) {
            const double drift = x[ii] - (ii > 0 ? x[ii - 1] : 0.0);
            const double drift_rate = v[ii] - (ii > 0 ? v[ii - 1] : 0.0);
            const double restoring = ii == 0 ? b.stiffness[0] * r1 : b.stiffness[ii] * drift;
            const double shear = b.damping[ii] * drift_rate + restoring;
            ds[ii] = v[ii];
            ds[n + ii] = -ag - (shear - shear_above) / b.mass[ii];
            shear_above = shear;
        }
        const BoucWenRates rates = boucwen_rdot(b.variant, v[0], r1, eps1);
        ds[2 * n] = rates.rdot;
        ds[2 * n + 1] = rates.epsdot;
    }
};

}  // namespace

ShearResult simulate_shear_boucwen(const ShearBuilding& building, const signal::TimeSeries& ground_accel,
                                   double dt, const ShearOptions& options) {
    building.validate();
    if (ground_accel.num_channels() != 1) throw ShapeError("ground motion must be single-channel");
    if (!(dt > 0.0)) throw Error("time step must be positive");
    const double ratio = ground_accel.dt() / dt;
    const double substeps_d = std::round(ratio);
    if (substeps_d < 1.0 || std::abs(ratio - substeps_d) > 1e-9 * substeps_d) {
        throw Error("integration step must divide the ground-motion sampling step");
    }
    const auto substeps = static_cast<std::size_t>(substeps_d);
    const std::size_t n = building.stories();
    const std::size_t samples = ground_accel.size();
    const auto ag = ground_accel.channel(0);

    const ShearModel model{building, n};
    const std::size_t dim = 2 * n + 2;
    std::vector<double> s(dim, 0.0), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), deriv(dim);

    std::vector<std::vector<double>> out(3 * n, std::vector<double>(samples));
    std::vector<double> r1(samples), eps1(samples);
    auto record = [&](std::size_t k) {
        model.rhs(s, ag[k], deriv);
        for (std::size_t i = 0; i < n; ++i) {
            out[i][k] = s[i];
            out[n + i][k] = s[n + i];
            out[2 * n + i][k] = deriv[n + i] + (options.total_accel ? ag[k] : 0.0);
        }
        r1[k] = s[2 * n];
        eps1[k] = s[2 * n + 1];
    };
    record(0);

    const double h = dt;
    for (std::size_t k = 0; k + 1 < samples; ++k) {
        for (std::size_t sub = 0; sub < substeps; ++sub) {
            const double frac0 = static_cast<double>(sub) / substeps_d;
            const double frac_mid = (static_cast<double>(sub) + 0.5) / substeps_d;
            const double frac1 = static_cast<double>(sub + 1) / substeps_d;
            const double a0 = ag[k] + frac0 * (ag[k + 1] - ag[k]);
            const double am = ag[k] + frac_mid * (ag[k + 1] - ag[k]);
            const double a1 = ag[k] + frac1 * (ag[k + 1] - ag[k]);

            model.rhs(s, a0, k1);
            for (std::size_t j = 0; j < dim; ++j) tmp[j] = s[j] + 0.5 * h * k1[j];
            model.rhs(tmp, am, k2);
            for (std::size_t j = 0; j < dim; ++j) tmp[j] = s[j] + 0.5 * h * k2[j];
            model.rhs(tmp, am, k3);
            for (std::size_t j = 0; j < dim; ++j) tmp[j] = s[j] + h * k3[j];
            model.rhs(tmp, a1, k4);
            for (std::size_t j = 0; j < dim; ++j) {
                s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        for (double v : s) {
            if (!std::isfinite(v)) throw NumericalError("integration diverged", k + 1);
        }
        record(k + 1);
    }

    std::vector<signal::ChannelInfo> channels;
    for (std::size_t i = 0; i < n; ++i) channels.push_back({"x" + std::to_string(i + 1), "m"});
    for (std::size_t i = 0; i < n; ++i) channels.push_back({"v" + std::to_string(i + 1), "m/s"});
    for (std::size_t i = 0; i < n; ++i) channels.push_back({"a" + std::to_string(i + 1), "m/s^2"});
    return ShearResult{signal::TimeSeries(ground_accel.dt(), std::move(channels), std::move(out),
                                          ground_accel.t0()),
                       std::move(r1), std::move(eps1)};
}

}  // namespace shmclassnet::nonlinear
