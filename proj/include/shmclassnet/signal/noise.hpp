#pragma once

#include <cstdint>
#include <span>

#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::signal {

/// Additive Gaussian measurement noise defined as a ratio of the signal RMS.
struct NoiseModel {
    double ratio = 0.1;
    std::uint64_t seed = 0;
};

/// Root mean square of the samples. Throws on an empty span.
double rms(std::span<const double> samples);
/// RMS of a single-channel series.
double rms(const TimeSeries& series);

/// Standard deviation of the noise that `add_measurement_noise` injects into `samples`.
double noise_std(std::span<const double> samples, double ratio);

/// Returns `series` plus i.i.d. zero-mean Gaussian noise, channel by channel.
///
/// Each channel gets noise with std = ratio * rms(channel), drawn from a
/// generator seeded by (seed, channel index), so channel 0 of a multi-channel
/// series receives the same sequence as the equivalent single-channel call.
TimeSeries add_measurement_noise(const TimeSeries& series, const NoiseModel& noise);

}  // namespace shmclassnet::signal
