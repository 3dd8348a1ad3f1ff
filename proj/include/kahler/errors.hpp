#pragma once

#include <stdexcept>
#include <string>

namespace kahler {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A type invariant (symmetry, finiteness, positivity of a parameter) was violated.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted is singular to working tolerance.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double min_abs_eigenvalue)
        : Error(what), min_abs_eigenvalue_(min_abs_eigenvalue) {}
    double min_abs_eigenvalue() const noexcept { return min_abs_eigenvalue_; }

private:
    double min_abs_eigenvalue_;
};

class StencilError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace kahler
