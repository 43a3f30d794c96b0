#include "shmclassnet/signal/noise.hpp"

#include <cmath>
#include <random>

#include "shmclassnet/error.hpp"
#include "shmclassnet/seeds.hpp"

namespace shmclassnet::signal {

double rms(std::span<const double> samples) {
    if (samples.empty()) throw Error("empty signal");
    long double acc = 0.0L;
    for (double v : samples) acc += static_cast<long double>(v) * v;
    return static_cast<double>(std::sqrt(acc / static_cast<long double>(samples.size())));
}

double rms(const TimeSeries& series) {
    if (series.num_channels() != 1) {
        throw ShapeError("rms expects a single-channel signal");
    }
    return rms(series.channel(0));
}

double noise_std(std::span<const double> samples, double ratio) {
    if (!(ratio >= 0.0) || !std::isfinite(ratio)) {
        throw Error("noise ratio must be a finite non-negative number");
    }
    return ratio * rms(samples);
}

TimeSeries add_measurement_noise(const TimeSeries& series, const NoiseModel& noise) {
    auto data = series.data();
    for (std::size_t c = 0; c < data.size(); ++c) {
        const double sd = noise_std(data[c], noise.ratio);
        if (sd == 0.0) continue;
        std::mt19937_64 rng(c == 0 ? noise.seed : derive_seed(noise.seed, {c}));
        std::normal_distribution<double> gauss(0.0, sd);
        for (double& v : data[c]) v += gauss(rng);
    }
    return TimeSeries(series.dt(), series.channels(), std::move(data), series.t0());
}

}  // namespace shmclassnet::signal
