#pragma once

#include <cstdint>

#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::nonlinear {

struct GroundMotionShape {
    double low_hz = 0.5;
    double high_hz = 10.0;
    double corner_hz = 1.0;        // first-order roll-off inside the band; 0 keeps it flat
    double rise_fraction = 0.15;   // envelope ramps up over this fraction of the record
    double decay_start = 0.6;      // and ramps down from here to the end
};

/// Synthetic accelerogram: Gaussian white noise under a trapezoidal envelope,
/// band-passed with a zero-phase 4th-order Butterworth (low_hz..high_hz),
/// tilted by a zero-phase first-order low-pass at corner_hz and rescaled so that max |a| == peak_accel. Channel "ag" in m/s^2 with
/// round(duration/dt)+1 samples.
signal::TimeSeries synth_ground_motion(std::uint64_t seed, double duration, double dt,
                                       double peak_accel, const GroundMotionShape& shape = {});

}  // namespace shmclassnet::nonlinear
