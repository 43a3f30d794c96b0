#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shmclassnet::cnn {

/// C x L array stored channel-major: values[c * length + t].
struct Tensor1D {
    std::size_t channels = 0;
    std::size_t length = 0;
    std::vector<double> values;

    Tensor1D() = default;
    Tensor1D(std::size_t c, std::size_t l, double fill = 0.0)
        : channels(c), length(l), values(c * l, fill) {}
    Tensor1D(std::size_t c, std::size_t l, std::vector<double> v);

    double& at(std::size_t c, std::size_t t) { return values[c * length + t]; }
    double at(std::size_t c, std::size_t t) const { return values[c * length + t]; }
    std::span<double> row(std::size_t c) { return {values.data() + c * length, length}; }
    std::span<const double> row(std::size_t c) const { return {values.data() + c * length, length}; }

    /// Throws unless C, L >= 1, the buffer matches C * L and every value is finite.
    void validate() const;

    bool operator==(const Tensor1D&) const = default;
};

}  // namespace shmclassnet::cnn
