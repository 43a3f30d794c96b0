#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "shmclassnet/error.hpp"
#include "shmclassnet/gendamp/gendamp.hpp"
#include "shmclassnet/kalman/kalman.hpp"
#include "shmclassnet/signal/integrate.hpp"
#include "shmclassnet/signal/noise.hpp"

using namespace shmclassnet;
using namespace shmclassnet::kalman;
using Eigen::Matrix2d;
using Eigen::Vector2d;

namespace {

signal::TimeSeries series(double dt, std::vector<double> v, const char* name = "a") {
    return signal::TimeSeries::single(dt, {name, ""}, std::move(v));
}

double rms_error(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST(Kalman, ConfigMatrices) {
    const auto c = KfConfig::with_dt(0.02);
    EXPECT_EQ(c.Ad(), (Matrix2d() << 1, 0.02, 0, 1).finished());
    EXPECT_TRUE(c.Bd().isApprox(Vector2d(0.0002, 0.02)));
    EXPECT_EQ(c.Qd, Matrix2d::Identity() * 1e-9);
    EXPECT_EQ(c.Rd, 1e-3);
    auto bad = c;
    bad.Rd = 0.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.Qd(0, 1) = 1.0;
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.disp_decimation = 0;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Kalman, PredictExamples) {
    KfConfig cfg;
    cfg.Qd.setZero();
    KfState s{Vector2d::Zero(), Matrix2d::Zero(), 0};
    auto p = kf_predict(s, 0.0, cfg);
    EXPECT_EQ(p.x, Vector2d::Zero());
    EXPECT_EQ(p.P, Matrix2d::Zero());
    EXPECT_EQ(p.k, 1u);

    p = kf_predict(s, 1.0, cfg);
    EXPECT_NEAR(p.x(0), 5e-5, 1e-18);
    EXPECT_NEAR(p.x(1), 0.01, 1e-18);

    cfg.Qd = Matrix2d::Identity() * 1e-9;
    EXPECT_EQ(kf_predict(s, 0.0, cfg).P, Matrix2d::Identity() * 1e-9);
}

TEST(Kalman, UpdateExamples) {
    KfConfig cfg;
    KfState s{Vector2d(1.0, 0.0), Matrix2d::Identity(), 0};
    const auto u = kf_update(s, 2.0, cfg);
    EXPECT_NEAR(u.trace.gain(0), 1.0 / 1.001, 1e-15);
    EXPECT_NEAR(u.trace.gain(1), 0.0, 1e-15);
    EXPECT_NEAR(u.state.x(0), 1.0 + 1.0 / 1.001, 1e-12);
    EXPECT_NEAR(u.state.x(0), 1.999001, 1e-6);
    EXPECT_DOUBLE_EQ(u.trace.innovation, 1.0);

    const Matrix2d P = (Matrix2d() << 0.3, 0.1, 0.1, 0.2).finished();
    const KfState s2{Vector2d(0.7, -0.2), P, 4};
    const auto z = kf_update(s2, 0.7, cfg);
    EXPECT_EQ(z.state.x, s2.x);
    EXPECT_EQ(z.state.k, 4u);
}

TEST(Kalman, UpdateConvergesMonotonically) {
    KfConfig cfg;
    KfState s{Vector2d(0.0, 0.0), Matrix2d::Identity() * 0.5, 0};
    double gap = std::abs(s.x(0) - 3.0);
    for (int i = 0; i < 50; ++i) {
        s = kf_update(s, 3.0, cfg).state;
        const double g = std::abs(s.x(0) - 3.0);
        EXPECT_LT(g, gap);
        gap = g;
    }
}

TEST(Kalman, NonPositiveInnovationVariance) {
    KfConfig cfg;
    cfg.Rd = 1e-3;
    KfState s{Vector2d::Zero(), (Matrix2d() << -1.0, 0, 0, 1).finished(), 0};
    EXPECT_THROW(kf_update(s, 1.0, cfg), Error);
}

TEST(Kalman, JosephMatchesSimpleForm) {
    KfConfig cfg;
    cfg.Rd = 0.05;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < 200; ++i) {
        Eigen::Matrix2d L;
        L << u(rng), 0, u(rng) - 0.5, u(rng);
        const KfState s{Vector2d(u(rng), u(rng)), L * L.transpose(), 0};
        const auto r = kf_update(s, u(rng), cfg);
        const Eigen::RowVector2d H(1.0, 0.0);
        const Vector2d J = s.P * H.transpose() / (cfg.Rd + (H * s.P * H.transpose())(0, 0));
        const Matrix2d simple = (Matrix2d::Identity() - J * H) * s.P;
        EXPECT_LE((r.state.P - simple).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE((r.trace.gain - J).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Kalman, TranslationEquivariance) {
    KfConfig cfg;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        Eigen::Matrix2d L;
        L << 1 + u(rng), 0, u(rng), 1 + u(rng);
        const KfState s{Vector2d(u(rng), u(rng)), 0.1 * L * L.transpose(), 0};
        const double d = u(rng), shift = 0.25 * u(rng);
        KfState t = s;
        t.x(0) += shift;
        const auto a = kf_update(s, d, cfg);
        const auto b = kf_update(t, d + shift, cfg);
        EXPECT_NEAR(b.state.x(0) - shift, a.state.x(0), 1e-12);
        EXPECT_NEAR(b.state.x(1), a.state.x(1), 1e-12);
    }
}

TEST(Kalman, CovarianceStaysSymmetricPsd) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    KfConfig cfg;
    KfState s;
    double worst_asym = 0.0, worst_eig = 0.0;
    for (int i = 0; i < 100000; ++i) {
        if (i % 1000 == 0) {
            cfg.dt = 0.001 + 0.05 * u(rng);
            cfg.Rd = std::pow(10.0, -6.0 + 5.0 * u(rng));
            Eigen::Matrix2d L;
            L << u(rng), 0, u(rng) - 0.5, u(rng);
            cfg.Qd = std::pow(10.0, -10.0 + 8.0 * u(rng)) * L * L.transpose();
        }
        s = kf_predict(s, 10.0 * (u(rng) - 0.5), cfg);
        if (u(rng) < 0.7) {
            const auto r = kf_update(s, u(rng), cfg);
            ASSERT_LE(r.trace.posterior_P.trace(), r.trace.prior_P.trace() + 1e-12);
            s = r.state;
        }
        worst_asym = std::max(worst_asym, std::abs(s.P(0, 1) - s.P(1, 0)));
        worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Matrix2d>(s.P).eigenvalues().minCoeff());
    }
    EXPECT_LE(worst_asym, 1e-12);
    EXPECT_GE(worst_eig, -1e-12);
}

TEST(Fuse, ZeroInZeroOut) {
    const auto a = series(0.01, std::vector<double>(500, 0.0));
    const auto d = series(0.01, std::vector<double>(500, 0.0), "d");
    const auto f = fuse_signals(a, d, KfConfig{});
    ASSERT_EQ(f.num_channels(), 2u);
    for (std::size_t c = 0; c < 2; ++c)
        for (double v : f.channel(c)) ASSERT_EQ(v, 0.0);
}

TEST(Fuse, ConstantAccelerationTracksTruth) {
    const double dt = 0.01;
    const std::size_t n = 2000;
    std::vector<double> a(n, 1.0), d(n);
    for (std::size_t k = 0; k < n; ++k) d[k] = 0.5 * (k * dt) * (k * dt);
    const auto f = fuse_signals(series(dt, a), series(dt, d, "d"), KfConfig{}, KfState{});
    for (std::size_t k = 100; k < n; ++k) {
        ASSERT_NEAR(f.channel("vel")[k], k * dt, 1e-6) << k;
        ASSERT_NEAR(f.channel("disp")[k], d[k], 1e-6) << k;
    }
}

TEST(Fuse, ConvergesFromWrongInitialState) {
    const double dt = 0.01;
    const std::size_t n = 6000;
    std::vector<double> a(n, 1.0), d(n);
    for (std::size_t k = 0; k < n; ++k) d[k] = 0.5 * (k * dt) * (k * dt);
    KfState init{Vector2d(0.05, -0.2), Matrix2d::Identity(), 0};
    const auto f = fuse_signals(series(dt, a), series(dt, d, "d"), KfConfig{}, init);
    double tail = 0.0;
    for (std::size_t k = n - 1000; k < n; ++k)
        tail = std::max({tail, std::abs(f.channel("vel")[k] - k * dt), std::abs(f.channel("disp")[k] - d[k])});
    EXPECT_LE(tail, 1e-6);
}

TEST(Fuse, Decimation) {
    const double dt = 0.01;
    const std::size_t n = 1001;
    std::vector<double> a(n, 1.0), d;
    for (std::size_t k = 0; k < n; k += 5) d.push_back(0.5 * (k * dt) * (k * dt));
    KfConfig cfg;
    cfg.disp_decimation = 5;
    const auto f = fuse_signals(series(dt, a), series(5 * dt, d, "d"), cfg, KfState{});
    EXPECT_EQ(f.size(), n);
    for (std::size_t k = 0; k < n; ++k) ASSERT_NEAR(f.channel("vel")[k], k * dt, 1e-9);
    // wrong displacement grid
    EXPECT_THROW(fuse_signals(series(dt, a), series(dt, d, "d"), cfg), Error);
    EXPECT_THROW(fuse_signals(series(0.02, a), series(5 * dt, d, "d"), cfg), Error);
}

TEST(Fuse, BeatsDoubleIntegrationOnNoisyData) {
    const double dt = 0.01;
    const auto sys = gendamp::linear_experiment_system(gendamp::KernelSpec::dirac());
    const auto force = gendamp::white_noise_force(2, 9.0, dt, 40.0, 5);
    const auto r = gendamp::simulate_gendamp(sys, force, Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0.5), dt, 40.0);
    const auto x_true = r.select("x2");
    const auto a_true = r.select("a2");
    const auto a_noisy = signal::add_measurement_noise(a_true, {0.1, 31});
    const auto x_noisy = signal::add_measurement_noise(x_true, {0.1, 32});

    const auto integrated = signal::double_integrate(a_noisy, 1.0, 0.5);
    const auto fused = fuse_signals(a_noisy, x_noisy, KfConfig::with_dt(dt));
    const double e_int = rms_error(integrated.channel("disp"), x_true.channel(0));
    const double e_kf = rms_error(fused.channel("disp"), x_true.channel(0));
    EXPECT_LE(e_kf, e_int);
}

TEST(Fuse, SettingsJson) {
    const auto s = fusion_settings_from_json(
        nlohmann::json{{"dt", 0.02}, {"Qd_scale", 1e-8}, {"Rd", 2e-3}, {"disp_decimation", 2}, {"x0", {0.1, 0.2}},
                       {"P0_scale", 0.5}});
    EXPECT_EQ(s.config.dt, 0.02);
    EXPECT_EQ(s.config.Qd, Matrix2d::Identity() * 1e-8);
    EXPECT_EQ(s.config.Rd, 2e-3);
    EXPECT_EQ(s.config.disp_decimation, 2u);
    ASSERT_TRUE(s.x0.has_value());
    EXPECT_EQ(*s.x0, Vector2d(0.1, 0.2));
    EXPECT_EQ(s.initial_state(9.0).P, Matrix2d::Identity() * 0.5);
    const auto back = fusion_settings_from_json(to_json(s));
    EXPECT_EQ(back.config.Rd, s.config.Rd);
    EXPECT_EQ(back.config.disp_decimation, 2u);
    EXPECT_EQ(*back.x0, *s.x0);
    const auto dflt = fusion_settings_from_json(nlohmann::json::object());
    EXPECT_EQ(dflt.initial_state(0.3).x, Vector2d(0.3, 0.0));
}
