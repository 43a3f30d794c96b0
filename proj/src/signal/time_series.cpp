#include "shmclassnet/signal/time_series.hpp"

#include <algorithm>
#include <cmath>

#include "shmclassnet/error.hpp"

namespace shmclassnet::signal {

TimeSeries::TimeSeries(double dt, std::vector<ChannelInfo> channels,
                       std::vector<std::vector<double>> data, double t0)
    : dt_(dt), t0_(t0), channels_(std::move(channels)), data_(std::move(data)) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw Error("time step must be positive and finite");
    }
    if (!std::isfinite(t0_)) {
        throw Error("start time must be finite");
    }
    if (channels_.empty() || channels_.size() != data_.size()) {
        throw ShapeError("channel metadata count (" + std::to_string(channels_.size()) +
                         ") does not match data channel count (" + std::to_string(data_.size()) +
                         ")");
    }
    const std::size_t n = data_.front().size();
    if (n == 0) {
        throw Error("empty signal");
    }
    for (std::size_t c = 0; c < data_.size(); ++c) {
        if (data_[c].size() != n) {
            throw ShapeError("channel '" + channels_[c].name + "' has length " +
                             std::to_string(data_[c].size()) + ", expected " + std::to_string(n));
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (!std::isfinite(data_[c][k])) {
                throw Error("non-finite sample in channel '" + channels_[c].name + "' at index " +
                            std::to_string(k));
            }
        }
    }
}

TimeSeries TimeSeries::single(double dt, ChannelInfo channel, std::vector<double> samples,
                              double t0) {
    std::vector<ChannelInfo> info{std::move(channel)};
    std::vector<std::vector<double>> data;
    data.push_back(std::move(samples));
    return TimeSeries(dt, std::move(info), std::move(data), t0);
}

bool TimeSeries::has_channel(const std::string& name) const noexcept {
    return std::any_of(channels_.begin(), channels_.end(),
                       [&](const ChannelInfo& ch) { return ch.name == name; });
}

std::size_t TimeSeries::channel_index(const std::string& name) const {
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        if (channels_[c].name == name) return c;
    }
    throw Error("no channel named '" + name + "'");
}

std::span<const double> TimeSeries::channel(const std::string& name) const {
    return data_[channel_index(name)];
}

TimeSeries TimeSeries::select(std::size_t c) const {
    return single(dt_, channels_.at(c), data_.at(c), t0_);
}

TimeSeries TimeSeries::select(const std::string& name) const { return select(channel_index(name)); }

TimeSeries TimeSeries::with_channels(const TimeSeries& other) const {
    if (other.size() != size()) {
        throw ShapeError("cannot append channels of length " + std::to_string(other.size()) +
                         " to a signal of length " + std::to_string(size()));
    }
    auto channels = channels_;
    auto data = data_;
    channels.insert(channels.end(), other.channels_.begin(), other.channels_.end());
    data.insert(data.end(), other.data_.begin(), other.data_.end());
    return TimeSeries(dt_, std::move(channels), std::move(data), t0_);
}

}  // namespace shmclassnet::signal
