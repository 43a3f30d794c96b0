#include "shmclassnet/cnn/tensor.hpp"

#include <cmath>
#include <string>

#include "shmclassnet/error.hpp"

namespace shmclassnet::cnn {

Tensor1D::Tensor1D(std::size_t c, std::size_t l, std::vector<double> v)
    : channels(c), length(l), values(std::move(v)) {
    if (values.size() != c * l) {
        throw ShapeError("tensor buffer holds " + std::to_string(values.size()) + " values, expected " +
                         std::to_string(c * l));
    }
}

void Tensor1D::validate() const {
    if (channels < 1 || length < 1) throw ShapeError("tensor needs at least one channel and one sample");
    if (values.size() != channels * length) throw ShapeError("tensor buffer size mismatch");
    for (double v : values) {
        if (!std::isfinite(v)) throw Error("tensor contains a non-finite value");
    }
}

}  // namespace shmclassnet::cnn
