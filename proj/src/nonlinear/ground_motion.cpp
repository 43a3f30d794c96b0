#include "shmclassnet/nonlinear/ground_motion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "shmclassnet/error.hpp"
#include "shmclassnet/gendamp/gendamp.hpp"

namespace shmclassnet::nonlinear {

namespace {

// Direct-form I biquad.
struct Biquad {
    double b0, b1, b2, a1, a2;

    void run(std::vector<double>& x) const {
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        for (double& v : x) {
            const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = v;
            y2 = y1;
            y1 = y;
            v = y;
        }
    }
};

// RBJ cookbook sections; Q values of a 4th-order Butterworth.
constexpr std::array<double, 2> kButterworthQ{0.54119610014619698, 1.3065629648763766};

Biquad lowpass(double fc, double fs, double q) {
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double cw = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return {(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
            (1.0 - alpha) / a0};
}

Biquad highpass(double fc, double fs, double q) {
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double cw = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return {(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0, -2.0 * cw / a0,
            (1.0 - alpha) / a0};
}

}  // namespace

signal::TimeSeries synth_ground_motion(std::uint64_t seed, double duration, double dt,
                                       double peak_accel, const GroundMotionShape& shape) {
    if (!(peak_accel > 0.0)) throw Error("peak acceleration must be positive");
    const double fs = 1.0 / dt;
    if (!(shape.corner_hz >= 0.0)) throw Error("ground-motion corner frequency must be non-negative");
    if (!(shape.low_hz > 0.0) || !(shape.high_hz > shape.low_hz) || !(shape.high_hz < fs / 2.0)) {
        throw Error("ground-motion band must satisfy 0 < low < high < Nyquist");
    }
    const std::size_t samples = gendamp::step_count(duration, dt) + 1;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> a(samples);
    const double t_rise = shape.rise_fraction * duration;
    const double t_decay = shape.decay_start * duration;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) * dt;
        double env = 1.0;
        if (t < t_rise) env = t / t_rise;
        else if (t > t_decay) env = std::max(0.0, (duration - t) / (duration - t_decay));
        a[k] = env * gauss(rng);
    }

    std::vector<Biquad> sections;
    for (double q : kButterworthQ) sections.push_back(highpass(shape.low_hz, fs, q));
    for (double q : kButterworthQ) sections.push_back(lowpass(shape.high_hz, fs, q));
    // forward-backward pass for zero phase
    for (const auto& s : sections) s.run(a);
    std::reverse(a.begin(), a.end());
    for (const auto& s : sections) s.run(a);
    std::reverse(a.begin(), a.end());
    if (shape.corner_hz > 0.0) {
        const double pole = std::exp(-2.0 * std::numbers::pi * shape.corner_hz * dt);
        for (int pass = 0; pass < 2; ++pass) {
            double y = 0.0;
            for (double& v : a) v = y = pole * y + (1.0 - pole) * v;
            std::reverse(a.begin(), a.end());
        }
    }

    double peak = 0.0;
    for (double v : a) peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0)) throw NumericalError("synthetic ground motion is identically zero");
    const double scale = peak_accel / peak;
    for (double& v : a) v *= scale;
    return signal::TimeSeries::single(dt, {"ag", "m/s^2"}, std::move(a));
}

}  // namespace shmclassnet::nonlinear
