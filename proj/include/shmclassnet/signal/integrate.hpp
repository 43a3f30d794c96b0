#pragma once

#include "shmclassnet/signal/time_series.hpp"

namespace shmclassnet::signal {

/// Cumulative trapezoidal double integration of a single-channel acceleration.
///
/// v[k+1] = v[k] + dt (a[k] + a[k+1]) / 2, x[k+1] = x[k] + dt (v[k] + v[k+1]) / 2,
/// starting from (x0, v0). Returns channels "disp" [m] and "vel" [m/s].
/// Requires at least two samples.
TimeSeries double_integrate(const TimeSeries& accel, double x0 = 0.0, double v0 = 0.0);

}  // namespace shmclassnet::signal
