#include "shmclassnet/signal/integrate.hpp"

#include "shmclassnet/error.hpp"

namespace shmclassnet::signal {

TimeSeries double_integrate(const TimeSeries& accel, double x0, double v0) {
    if (accel.num_channels() != 1) {
        throw ShapeError("double_integrate expects a single-channel acceleration");
    }
    const std::size_t n = accel.size();
    if (n < 2) throw Error("double_integrate needs at least 2 samples, got " + std::to_string(n));

    const auto a = accel.channel(0);
    const double dt = accel.dt();
    std::vector<double> x(n), v(n);
    x[0] = x0;
    v[0] = v0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        v[k + 1] = v[k] + 0.5 * dt * (a[k] + a[k + 1]);
        x[k + 1] = x[k] + 0.5 * dt * (v[k] + v[k + 1]);
    }
    return TimeSeries(dt, {{"disp", "m"}, {"vel", "m/s"}}, {std::move(x), std::move(v)}, accel.t0());
}

}  // namespace shmclassnet::signal
