#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace shmclassnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `where()` names the offending line or field.
class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what)
        : Error(where + ": " + what), where_(where) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Integrator or optimizer failure; carries the step (or iteration) index when known.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
        : Error(step ? what + " at step " + std::to_string(*step) : what), step_(step) {}

    std::optional<std::size_t> step() const noexcept { return step_; }

private:
    std::optional<std::size_t> step_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

}  // namespace shmclassnet
