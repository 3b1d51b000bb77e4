#pragma once

#include <stdexcept>
#include <string>

namespace msc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Spaces, functions or vectors whose sizes do not fit together.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A pointwise function returned a non-finite value at a node.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, double x, double y, double z)
        : Error(what), x_(x), y_(y), z_(z) {}

    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }
    double z() const noexcept { return z_; }

private:
    double x_, y_, z_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace msc
