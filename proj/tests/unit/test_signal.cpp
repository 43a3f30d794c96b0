#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "shmclassnet/error.hpp"
#include "shmclassnet/signal/integrate.hpp"
#include "shmclassnet/signal/manifest.hpp"
#include "shmclassnet/signal/noise.hpp"
#include "shmclassnet/signal/signal_io.hpp"
#include "test_util.hpp"

using namespace shmclassnet;
using namespace shmclassnet::signal;

namespace {

TimeSeries sine(std::size_t n, double dt, double amp = 1.0, double freq = 1.0) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = amp * std::sin(2.0 * std::numbers::pi * freq * dt * static_cast<double>(k));
    return TimeSeries::single(dt, {"x", "m"}, v);
}

}  // namespace

TEST(TimeSeries, RejectsBadConstruction) {
    EXPECT_THROW(TimeSeries(0.0, {{"a", ""}}, {{1.0}}), Error);
    EXPECT_THROW(TimeSeries(0.1, {{"a", ""}}, {{}}), Error);
    EXPECT_THROW(TimeSeries(0.1, {{"a", ""}, {"b", ""}}, {{1.0, 2.0}, {1.0}}), Error);
    EXPECT_THROW(TimeSeries(0.1, {{"a", ""}}, {{1.0, std::nan("")}}), Error);
    EXPECT_THROW(TimeSeries(0.1, {{"a", ""}}, {{1.0, INFINITY}}), Error);
}

TEST(TimeSeries, ChannelAccess) {
    TimeSeries ts(0.5, {{"a", "m"}, {"b", "m/s"}}, {{1, 2, 3}, {4, 5, 6}}, 1.0);
    EXPECT_EQ(ts.size(), 3u);
    EXPECT_EQ(ts.channel("b")[2], 6.0);
    EXPECT_DOUBLE_EQ(ts.time(2), 2.0);
    EXPECT_EQ(ts.select("b").num_channels(), 1u);
    EXPECT_THROW(ts.channel("c"), Error);
}

TEST(Rms, Examples) {
    EXPECT_EQ(rms(TimeSeries::single(1.0, {"x", ""}, {0, 0, 0, 0})), 0.0);
    EXPECT_DOUBLE_EQ(rms(TimeSeries::single(1.0, {"x", ""}, {3, 3, 3})), 3.0);
    // 1000 samples per period over 5 periods
    EXPECT_NEAR(rms(sine(5000, 1e-3)), 1.0 / std::sqrt(2.0), 1e-3);
    EXPECT_THROW(rms(std::span<const double>{}), Error);
}

TEST(Rms, EmptySignalMessage) {
    try {
        rms(std::span<const double>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("empty signal"), std::string::npos);
    }
}

TEST(Rms, ScalesWithAbsoluteFactor) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s(1 + rng() % 500);
        for (double& v : s) v = g(rng);
        const double c = g(rng) * 10.0;
        std::vector<double> cs(s);
        for (double& v : cs) v *= c;
        EXPECT_NEAR(rms(cs), std::abs(c) * rms(s), 1e-12 * std::abs(c) * rms(s));
    }
}

TEST(Noise, ZeroRatioIsIdentity) {
    const auto s = sine(1000, 0.01);
    const auto out = add_measurement_noise(s, {0.0, 7});
    EXPECT_EQ(out.data(), s.data());
}

TEST(Noise, StdFollowsRatio) {
    const auto s = sine(100000, 1e-3);
    EXPECT_NEAR(noise_std(s.channel(0), 0.1), 0.070711, 1e-4);
    const auto out = add_measurement_noise(s, {0.1, 11});
    std::vector<double> diff(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) diff[k] = out.channel(0)[k] - s.channel(0)[k];
    const double ratio = rms(diff) / rms(s);
    EXPECT_GE(ratio, 0.095);
    EXPECT_LE(ratio, 0.105);
}

TEST(Noise, SeedDeterminism) {
    const auto s = sine(2000, 0.01);
    EXPECT_EQ(add_measurement_noise(s, {0.1, 5}).data(), add_measurement_noise(s, {0.1, 5}).data());
    EXPECT_NE(add_measurement_noise(s, {0.1, 5}).data(), add_measurement_noise(s, {0.1, 6}).data());
}

TEST(Noise, PerChannelRms) {
    TimeSeries ts(0.01, {{"a", ""}, {"b", ""}}, {std::vector<double>(20000, 1.0), std::vector<double>(20000, 100.0)});
    const auto out = add_measurement_noise(ts, {0.1, 9});
    std::vector<double> da(ts.size()), db(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        da[k] = out.channel(0)[k] - 1.0;
        db[k] = out.channel(1)[k] - 100.0;
    }
    EXPECT_NEAR(rms(da), 0.1, 0.005);
    EXPECT_NEAR(rms(db), 10.0, 0.5);
    // channel 0 matches the single-channel call
    const auto single = add_measurement_noise(ts.select(0), {0.1, 9});
    EXPECT_EQ(single.data()[0], out.data()[0]);
}

TEST(DoubleIntegrate, ZeroInput) {
    const auto r = double_integrate(TimeSeries::single(0.01, {"a", "m/s^2"}, std::vector<double>(100, 0.0)));
    for (double v : r.channel("disp")) EXPECT_EQ(v, 0.0);
    for (double v : r.channel("vel")) EXPECT_EQ(v, 0.0);
}

TEST(DoubleIntegrate, ConstantAcceleration) {
    const auto r = double_integrate(TimeSeries::single(0.01, {"a", "m/s^2"}, std::vector<double>(101, 2.0)));
    EXPECT_NEAR(r.channel("vel")[100], 2.0, 1e-9);
    EXPECT_NEAR(r.channel("disp")[100], 1.0, 1e-9);
}

TEST(DoubleIntegrate, SineConvergesToAnalytic) {
    const double dt = 1e-3;
    const std::size_t n = 10001;
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = -std::sin(dt * static_cast<double>(k));
    const auto r = double_integrate(TimeSeries::single(dt, {"a", ""}, a), 0.0, 1.0);
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(r.channel("disp")[k] - std::sin(dt * static_cast<double>(k))));
    EXPECT_LE(err, 1e-4);
}

TEST(DoubleIntegrate, QuadraticPolynomialsReproduced) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double c0 = u(rng), c1 = u(rng), c2 = u(rng);
        const double dt = 0.01;
        const std::size_t n = 500;
        // x = c0 + c1 t + c2 t^2 -> a = 2 c2
        const auto r = double_integrate(TimeSeries::single(dt, {"a", ""}, std::vector<double>(n, 2.0 * c2)), c0, c1);
        double err = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = dt * static_cast<double>(k);
            err = std::max(err, std::abs(r.channel("disp")[k] - (c0 + c1 * t + c2 * t * t)));
        }
        EXPECT_LE(err, 1e-9);
    }
}

TEST(DoubleIntegrate, NeedsTwoSamples) {
    EXPECT_THROW(double_integrate(TimeSeries::single(0.01, {"a", ""}, {1.0})), Error);
}

TEST(SignalIo, RoundTrip) {
    testutil::TempDir dir;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1e3);
    std::vector<double> a(257), b(257);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng) * 1e-9;
    LabeledSignal s{TimeSeries(0.02, {{"accel", "m/s^2"}, {"disp", "m"}}, {a, b}), "B",
                    {"boucwen", 99, {{"peak_g", 0.827}}, 0.1, true}};
    const auto path = dir.path() / "sig.csv";
    write_signal(s, path);
    const auto r = read_signal(path);
    EXPECT_EQ(r.label, "B");
    EXPECT_EQ(r.signal.dt(), 0.02);
    EXPECT_EQ(r.signal.channels(), s.signal.channels());
    EXPECT_EQ(r.provenance, s.provenance);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(r.signal.channel(c)[k], s.signal.channel(c)[k], 1e-10);
    }
}

TEST(SignalIo, MissingMetadata) {
    testutil::TempDir dir;
    const auto path = dir.path() / "x.csv";
    std::ofstream(path) << "t,x\n0,1\n0.1,2\n";
    try {
        read_signal(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("missing metadata"), std::string::npos);
    }
}

TEST(SignalIo, MalformedCsvNamesLine) {
    testutil::TempDir dir;
    LabeledSignal s{TimeSeries::single(0.1, {"x", "m"}, {1.0, 2.0, 3.0}), "A", {}};
    const auto path = dir.path() / "x.csv";
    write_signal(s, path);
    std::ofstream(path) << "t,x\n0,1\n0.1,oops\n0.2,3\n";
    try {
        read_signal(path);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(e.where().find(":3"), std::string::npos) << e.what();
    }
}

TEST(SignalIo, MalformedMetaNamesField) {
    testutil::TempDir dir;
    LabeledSignal s{TimeSeries::single(0.1, {"x", "m"}, {1.0, 2.0}), "A", {}};
    const auto path = dir.path() / "x.csv";
    write_signal(s, path);
    std::ofstream(meta_path_for(path)) << R"({"format_version": 1, "dt": "fast", "label": "A", "channels": []})";
    EXPECT_THROW(read_signal(path), ParseError);
}

TEST(Manifest, RoundTripAndMissingFile) {
    testutil::TempDir dir;
    LabeledSignal s{TimeSeries::single(0.1, {"x", "m"}, {1.0, 2.0}), "A", {}};
    write_signal(s, dir.path() / "a.csv");
    DatasetManifest m{{"A", "B"}, {{dir.path() / "a.csv", "A", Split::Train}}};
    save_manifest(m, dir.path() / "manifest.json");
    const auto loaded = load_manifest(dir.path() / "manifest.json");
    ASSERT_EQ(loaded.entries.size(), 1u);
    EXPECT_EQ(loaded.entries[0].label, "A");
    EXPECT_EQ(loaded.class_index("B"), 1u);

    m.entries.push_back({dir.path() / "gone.csv", "B", Split::Test});
    save_manifest(m, dir.path() / "manifest.json");
    try {
        load_manifest(dir.path() / "manifest.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("gone.csv"), std::string::npos);
    }
}

TEST(Manifest, RejectsUndeclaredLabel) {
    testutil::TempDir dir;
    LabeledSignal s{TimeSeries::single(0.1, {"x", "m"}, {1.0, 2.0}), "Z", {}};
    write_signal(s, dir.path() / "a.csv");
    std::ofstream(dir.path() / "manifest.json")
        << R"({"format_version": 1, "classes": ["A"], "entries": [{"path": "a.csv", "label": "Z", "split": "train"}]})";
    EXPECT_THROW(load_manifest(dir.path() / "manifest.json"), Error);
}
