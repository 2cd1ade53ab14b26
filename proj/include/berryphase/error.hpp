#pragma once

#include <stdexcept>
#include <string>

namespace berryphase {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: shapes, ranges, non-finite values.
class InputError : public Error {
public:
    using Error::Error;
};

/// Unknown name in a catalog lookup.
class LookupError : public Error {
public:
    using Error::Error;
};

/// A level crossing sits on (or within the stencil of) the requested point.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Self-consistent iteration ran out of budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Overlap product too small to trust: the loop is under-sampled.
class ResolutionError : public Error {
public:
    ResolutionError(const std::string& what, double magnitude)
        : Error(what), magnitude_(magnitude) {}

    double magnitude() const noexcept { return magnitude_; }

private:
    double magnitude_;
};

/// SCF failure at one sample of a loop; wraps the underlying ConvergenceError.
class PathFailure : public Error {
public:
    PathFailure(const std::string& what, int sample, double best_residual)
        : Error(what), sample_(sample), best_residual_(best_residual) {}

    int sample() const noexcept { return sample_; }
    double best_residual() const noexcept { return best_residual_; }

private:
    int sample_;
    double best_residual_;
};

}  // namespace berryphase
