#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shmclassnet::signal {

struct ChannelInfo {
    std::string name;
    std::string unit;

    bool operator==(const ChannelInfo&) const = default;
};

/// Uniformly sampled multi-channel signal.
///
/// All channels share one length N >= 1, the time step is positive and every
/// sample is finite. The constructor enforces this; instances are immutable
/// apart from assignment.
class TimeSeries {
public:
    TimeSeries(double dt, std::vector<ChannelInfo> channels, std::vector<std::vector<double>> data,
               double t0 = 0.0);

    /// Convenience for single-channel signals.
    static TimeSeries single(double dt, ChannelInfo channel, std::vector<double> samples,
                             double t0 = 0.0);

    double dt() const noexcept { return dt_; }
    double t0() const noexcept { return t0_; }
    std::size_t size() const noexcept { return data_.front().size(); }
    std::size_t num_channels() const noexcept { return channels_.size(); }

    const std::vector<ChannelInfo>& channels() const noexcept { return channels_; }
    const ChannelInfo& channel_info(std::size_t c) const { return channels_.at(c); }
    std::span<const double> channel(std::size_t c) const { return data_.at(c); }
    std::span<const double> channel(const std::string& name) const;
    const std::vector<std::vector<double>>& data() const noexcept { return data_; }

    bool has_channel(const std::string& name) const noexcept;
    std::size_t channel_index(const std::string& name) const;

    /// Sample time of index k.
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }

    /// Single-channel view of channel `c` (copies the samples).
    TimeSeries select(std::size_t c) const;
    TimeSeries select(const std::string& name) const;

    /// Returns a copy with channels appended; lengths must match.
    TimeSeries with_channels(const TimeSeries& other) const;

private:
    double dt_;
    double t0_;
    std::vector<ChannelInfo> channels_;
    std::vector<std::vector<double>> data_;
};

}  // namespace shmclassnet::signal
