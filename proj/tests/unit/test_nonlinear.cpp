#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "shmclassnet/error.hpp"
#include "shmclassnet/nonlinear/boucwen.hpp"
#include "shmclassnet/nonlinear/freefall.hpp"
#include "shmclassnet/nonlinear/ground_motion.hpp"

using namespace shmclassnet;
using namespace shmclassnet::nonlinear;

namespace {

constexpr double kG = 9.81;

signal::TimeSeries harmonic_ground(double amp, double freq_hz, double duration, double dt) {
    const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k)
        a[k] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(k) * dt);
    return signal::TimeSeries::single(dt, {"ag", "m/s^2"}, a);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST(BoucWen, RdotExamples) {
    auto lin = BoucWenVariant::standard();
    lin.beta = 0.0;
    lin.gamma = 0.0;
    for (double r : {-0.7, 0.0, 0.3})
        for (double v : {-2.0, 0.5}) EXPECT_DOUBLE_EQ(boucwen_rdot(lin, v, r, 0.0).rdot, v);

    const auto a = BoucWenVariant::standard();
    EXPECT_EQ(a.A, 1.0);
    EXPECT_EQ(a.beta, 2.0);
    EXPECT_EQ(a.gamma, 1.0);
    EXPECT_EQ(a.n, 2.0);
    EXPECT_DOUBLE_EQ(boucwen_rdot(a, 1.0, 0.0, 0.0).rdot, 1.0);
    // r = 0.5, xdot = 1: Phi = 2*0.25 + 0.25
    EXPECT_DOUBLE_EQ(boucwen_rdot(a, 1.0, 0.5, 0.0).rdot, 1.0 - 0.75);
    // xdot = -1 flips the sign of the beta term
    EXPECT_DOUBLE_EQ(boucwen_rdot(a, -1.0, 0.5, 0.0).rdot, -(1.0 - (-0.5 + 0.25)));
    EXPECT_DOUBLE_EQ(boucwen_rdot(a, -1.5, 0.4, 0.0).epsdot, 0.4 * -1.5);
}

TEST(BoucWen, DegradingWithoutDegradationIsStandard) {
    auto b = BoucWenVariant::degrading();
    b.delta_eta = 0.0;
    auto p = BoucWenVariant::pinching();
    p.delta_sigma = 0.0;
    const auto a = BoucWenVariant::standard();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 10000; ++i) {
        const double v = u(rng), r = 0.5 * u(rng), e = std::abs(u(rng));
        const auto ra = boucwen_rdot(a, v, r, e);
        EXPECT_NEAR(boucwen_rdot(b, v, r, e).rdot, ra.rdot, 1e-14);
        EXPECT_NEAR(boucwen_rdot(p, v, r, e).rdot, ra.rdot, 1e-14);
        EXPECT_EQ(boucwen_rdot(b, v, r, e).epsdot, ra.epsdot);
    }
}

TEST(BoucWen, DegradationSlowsRate) {
    const auto b = BoucWenVariant::degrading();
    const auto a = BoucWenVariant::standard();
    const double eta = 1.0 + b.delta_eta * 2.0;
    EXPECT_NEAR(boucwen_rdot(b, 1.0, 0.2, 2.0).rdot, boucwen_rdot(a, 1.0, 0.2, 2.0).rdot / eta, 1e-15);
    EXPECT_THROW(boucwen_rdot(b, 1.0, 0.2, -1.0 / b.delta_eta - 0.1), Error);
}

TEST(BoucWen, PinchingNearZero) {
    const auto p = BoucWenVariant::pinching();
    const auto a = BoucWenVariant::standard();
    // Slip is strongest at r = 0 and fades for |r| >> sigma.
    EXPECT_LT(boucwen_rdot(p, 1.0, 0.0, 1.0).rdot, boucwen_rdot(a, 1.0, 0.0, 1.0).rdot);
    EXPECT_NEAR(boucwen_rdot(p, 1.0, 0.55, 1.0).rdot, boucwen_rdot(a, 1.0, 0.55, 1.0).rdot, 1e-6);
}

TEST(BoucWen, VariantValidation) {
    auto v = BoucWenVariant::standard();
    v.n = 0.5;
    EXPECT_THROW(v.validate(), Error);
    auto p = BoucWenVariant::pinching();
    p.sigma = 0.0;
    EXPECT_THROW(p.validate(), Error);
    for (auto k : {BoucWenKind::Standard, BoucWenKind::Degrading, BoucWenKind::Pinching})
        EXPECT_EQ(boucwen_kind_from_string(to_string(k)), k);
    auto s = ShearBuilding::uniform(6, 1, 9, 0.25, BoucWenVariant::standard());
    EXPECT_NO_THROW(s.validate());
    s.stiffness[3] = 0.0;
    EXPECT_THROW(s.validate(), Error);
}

TEST(Shear, ZeroGroundZeroResponse) {
    const auto b = ShearBuilding::uniform(6, 1, 9, 0.25, BoucWenVariant::pinching());
    const auto r = simulate_shear_boucwen(b, harmonic_ground(0.0, 1.0, 10.0, 0.02), 0.02);
    ASSERT_EQ(r.response.num_channels(), 18u);
    for (std::size_t c = 0; c < 18; ++c) EXPECT_EQ(max_abs(r.response.channel(c)), 0.0);
}

TEST(Shear, LinearDegeneracyMatchesExactOracle) {
    auto v = BoucWenVariant::standard();
    v.beta = 0.0;
    v.gamma = 0.0;
    const auto b = ShearBuilding::uniform(6, 1, 9, 0.25, v);
    const auto ag = synth_ground_motion(17, 30.0, 0.02, 0.827 * kG);
    const auto r = simulate_shear_boucwen(b, ag, 0.002);
    const auto ref = oracle::linear_shear_exact(6, 1.0, 9.0, 0.25, ag.channel(0), 0.02);
    ASSERT_EQ(ref.size(), r.response.size());
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k)
        for (int i = 0; i < 6; ++i) {
            err = std::max(err, std::abs(r.response.channel(i)[k] - ref[k][i]));
            scale = std::max(scale, std::abs(ref[k][i]));
        }
    EXPECT_LE(err, 1e-6 * scale);
    // and r1 is the first-story drift
    for (std::size_t k = 0; k < ref.size(); ++k) ASSERT_NEAR(r.r1[k], r.response.channel(0)[k], 1e-9 * scale);
}

TEST(Shear, TotalAccelerationAddsGround) {
    const auto b = ShearBuilding::uniform(6, 1, 9, 0.25, BoucWenVariant::standard());
    const auto ag = synth_ground_motion(5, 10.0, 0.02, 0.5 * kG);
    const auto rel = simulate_shear_boucwen(b, ag, 0.02);
    const auto tot = simulate_shear_boucwen(b, ag, 0.02, {.total_accel = true});
    for (std::size_t k = 0; k < ag.size(); ++k)
        for (int i = 0; i < 6; ++i) {
            ASSERT_EQ(rel.response.channel(i)[k], tot.response.channel(i)[k]);
            ASSERT_NEAR(tot.response.channel(12 + i)[k], rel.response.channel(12 + i)[k] + ag.channel(0)[k], 1e-12);
        }
}

TEST(Shear, HystereticBoundAndDissipation) {
    const double rmax = std::sqrt(1.0 / 3.0);  // (A / (beta + gamma))^{1/n}
    for (auto variant : {BoucWenVariant::standard(), BoucWenVariant::degrading(), BoucWenVariant::pinching()}) {
        const auto b = ShearBuilding::uniform(6, 1, 9, 0.25, variant);
        const auto ag = synth_ground_motion(23, 40.0, 0.02, 1.08 * kG);
        const auto r = simulate_shear_boucwen(b, ag, 0.02);
        if (variant.kind == BoucWenKind::Standard) {
            EXPECT_LE(max_abs(r.r1), 1.01 * rmax);
        }
        // eps1 = integral r1 drift-rate over closed drift cycles is non-decreasing
        const auto x1 = r.response.channel(0);
        std::size_t start = 0;
        for (std::size_t k = 1; k < x1.size(); ++k) {
            if (x1[k - 1] < 0.0 && x1[k] >= 0.0) {
                // the sampled cycle is closed only up to the end-point drift mismatch
                const double open = max_abs(r.r1) * (std::abs(x1[k]) + std::abs(x1[start]));
                if (start > 0) {
                    EXPECT_GE(r.eps1[k] - r.eps1[start], -open - 1e-12) << to_string(variant.kind) << " k=" << k;
                }
                start = k;
            }
        }
    }
}

TEST(Shear, SteadyHysteresisLoopsHavePositiveArea) {
    const auto b = ShearBuilding::uniform(6, 1, 9, 0.25, BoucWenVariant::standard());
    const auto r = simulate_shear_boucwen(b, harmonic_ground(4.0, 0.4, 60.0, 0.01), 0.01);
    const auto x1 = r.response.channel(0);
    // hysteresis leaves a residual drift, so cycles are cut at the steady-state midline
    const auto steady = static_cast<std::size_t>(20.0 / 0.01);
    const auto [lo, hi] = std::minmax_element(x1.begin() + steady, x1.end());
    const double mid = 0.5 * (*lo + *hi);
    std::vector<std::size_t> ups;
    for (std::size_t k = steady + 1; k < x1.size(); ++k)
        if (x1[k - 1] < mid && x1[k] >= mid) ups.push_back(k);
    ASSERT_GE(ups.size(), 5u);
    EXPECT_GT(max_abs(r.r1), 0.5);  // well into the nonlinear range
    for (std::size_t c = 0; c + 1 < ups.size(); ++c) {
        double area = 0.0;
        for (std::size_t k = ups[c] + 1; k <= ups[c + 1]; ++k)
            area += 9.0 * 0.5 * (r.r1[k] + r.r1[k - 1]) * (x1[k] - x1[k - 1]);
        EXPECT_GT(area, 0.0) << "cycle " << c;
    }
}

TEST(Shear, StepHalvingConverges) {
    for (auto variant : {BoucWenVariant::standard(), BoucWenVariant::degrading(), BoucWenVariant::pinching()}) {
        const auto b = ShearBuilding::uniform(6, 1, 9, 0.25, variant);
        const auto ag = synth_ground_motion(29, 30.0, 0.02, 0.818 * kG);
        const double d1 = max_abs(simulate_shear_boucwen(b, ag, 0.02).response.channel(0));
        const double d2 = max_abs(simulate_shear_boucwen(b, ag, 0.01).response.channel(0));
        EXPECT_LE(std::abs(d1 - d2), 1e-3 * d2) << to_string(variant.kind);
    }
}

TEST(Shear, RejectsIncompatibleStep) {
    const auto b = ShearBuilding::uniform(6, 1, 9, 0.25, BoucWenVariant::standard());
    EXPECT_THROW(simulate_shear_boucwen(b, harmonic_ground(1.0, 1.0, 2.0, 0.02), 0.015), Error);
}

TEST(GroundMotion, PeakDeterminismAndBand) {
    const double peak = 0.827 * kG;
    const auto a = synth_ground_motion(101, 30.0, 0.02, peak);
    EXPECT_NEAR(max_abs(a.channel(0)), peak, 1e-9);
    EXPECT_EQ(a.size(), 1501u);
    EXPECT_EQ(a.data(), synth_ground_motion(101, 30.0, 0.02, peak).data());
    EXPECT_NE(a.data(), synth_ground_motion(102, 30.0, 0.02, peak).data());

    const std::vector<double> x(a.channel(0).begin(), a.channel(0).end());
    const double df = 1.0 / (static_cast<double>(x.size()) * 0.02);
    double total = 0.0, outside = 0.0;
    for (std::size_t k = 0; k <= x.size() / 2; ++k) {
        const double p = oracle::dft_power(x, k);
        const double f = static_cast<double>(k) * df;
        total += p;
        if (f < 0.25 || f > 20.0) outside += p;
    }
    EXPECT_LT(outside, 0.05 * total);
    EXPECT_THROW(synth_ground_motion(1, 10.0, 0.02, 0.0), Error);
    GroundMotionShape bad;
    bad.corner_hz = -1.0;
    EXPECT_THROW(synth_ground_motion(1, 10.0, 0.02, 1.0, bad), Error);
}

TEST(GroundMotion, CornerTiltsEnergyTowardLowFrequencies) {
    // share of 4..8 Hz power against 0.5..1 Hz power, flat vs rolled off
    auto ratio = [](double corner) {
        GroundMotionShape shape;
        shape.corner_hz = corner;
        const auto a = synth_ground_motion(7, 40.0, 0.02, 1.0, shape);
        const std::vector<double> x(a.channel(0).begin(), a.channel(0).end());
        const double df = 1.0 / (static_cast<double>(x.size()) * 0.02);
        double hi = 0.0, lo = 0.0;
        for (std::size_t k = 1; k <= x.size() / 2; ++k) {
            const double f = static_cast<double>(k) * df;
            if (f >= 4.0 && f <= 8.0) hi += oracle::dft_power(x, k);
            if (f >= 0.5 && f <= 1.0) lo += oracle::dft_power(x, k);
        }
        return hi / lo;
    };
    const double flat = ratio(0.0), tilted = ratio(1.0);
    // |H(f)|^2 of a forward-backward one-pole is ((1 + (f/fc)^2))^-2: 4..8 Hz vs 0.5..1 Hz drops by > 100x
    EXPECT_LT(tilted, flat / 100.0);
}

TEST(FreeFall, BallisticWithoutContact) {
    FreeFallSystem s;
    s.force_variance = 0.0;
    const auto r = simulate_freefall(s, 0.01, 2.0, 1, 0.1, 0.0, {.contact = ContactMode::NeverContact});
    for (std::size_t k = 0; k < r.response.size(); ++k) {
        const double t = r.response.time(k);
        ASSERT_NEAR(r.response.channel(0)[k], 0.1 - 0.5 * kG * t * t, 1e-6) << "t=" << t;
        ASSERT_NEAR(r.response.channel(1)[k], -kG * t, 1e-6);
        ASSERT_EQ(r.contact[k], 0);
    }
}

TEST(FreeFall, DefaultRunBouncesAndStaysFinite) {
    const FreeFallSystem s;
    const auto r = simulate_freefall(s, 0.01, 100.0, 7, 0.5, 0.0);
    ASSERT_EQ(r.response.size(), 10001u);
    std::size_t flips = 0;
    for (std::size_t k = 1; k < r.contact.size(); ++k) flips += r.contact[k] != r.contact[k - 1];
    EXPECT_GE(flips, 1u);
    for (std::size_t c = 0; c < 3; ++c)
        for (double v : r.response.channel(c)) ASSERT_TRUE(std::isfinite(v));
    // contact flag agrees with the position
    for (std::size_t k = 0; k < r.contact.size(); ++k)
        if (r.contact[k]) {
            ASSERT_LE(r.response.channel(0)[k], s.contact_level + 1e-12);
        }
}

TEST(FreeFall, TrajectoryIsContinuous) {
    const FreeFallSystem s;
    const double dt = 0.01;
    const auto r = simulate_freefall(s, dt, 100.0, 11, 0.5, 0.0);
    const auto x = r.response.channel(0), v = r.response.channel(1), a = r.response.channel(2);
    for (std::size_t k = 1; k < x.size(); ++k) {
        const double bound = std::max(std::abs(v[k - 1]), std::abs(v[k])) * dt +
                             0.5 * std::max(std::abs(a[k - 1]), std::abs(a[k])) * dt * dt + 1e-6;
        ASSERT_LE(std::abs(x[k] - x[k - 1]), bound) << "k=" << k;
    }
}

TEST(FreeFall, AlwaysInContactDiracMatchesLinearOracle) {
    FreeFallSystem s;
    s.kernel = gendamp::KernelSpec::dirac();
    s.force_variance = 0.0;
    const auto r = simulate_freefall(s, 0.01, 5.0, 1, 0.0, 0.0, {.contact = ContactMode::AlwaysContact});
    oracle::Mat M(1, 1), C(1, 1), K(1, 1);
    M << s.m;
    C << 2.0 * s.c;
    K << s.k;
    const auto ref = oracle::viscous_displacements(M, C, K, oracle::Vec::Zero(1), oracle::Vec::Zero(1), 1e-5,
                                                   500000, 1000, [&](double) { return oracle::Vec::Constant(1, -s.m * kG); });
    ASSERT_EQ(ref.size(), r.response.size());
    double err = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) err = std::max(err, std::abs(r.response.channel(0)[k] - ref[k][0]));
    EXPECT_LE(err, 1e-3);
}

TEST(FreeFall, NoiseIsSeeded) {
    const FreeFallSystem s;
    const auto a = simulate_freefall(s, 0.01, 10.0, 3, 0.5, 0.0);
    const auto b = simulate_freefall(s, 0.01, 10.0, 3, 0.5, 0.0);
    const auto c = simulate_freefall(s, 0.01, 10.0, 4, 0.5, 0.0);
    EXPECT_EQ(a.response.data(), b.response.data());
    EXPECT_NE(a.response.data(), c.response.data());
}

TEST(FreeFall, Validation) {
    FreeFallSystem s;
    s.m = 0.0;
    EXPECT_THROW(s.validate(), Error);
    s = FreeFallSystem{};
    s.c = -1.0;
    EXPECT_THROW(s.validate(), Error);
    EXPECT_THROW(simulate_freefall(FreeFallSystem{}, 0.0, 1.0, 1, 0.1, 0.0), Error);
}
