#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace harmonet {

inline constexpr const char* kVersion = "0.1.0";

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A vertex encoding that the network does not recognize.
struct InvalidVertexError : Error {
    using Error::Error;
};

/// An operation needed function values outside the supplied window.
struct WindowTooSmallError : Error {
    explicit WindowTooSmallError(const std::string& what, std::string vertex = {})
        : Error(what), offending_vertex(std::move(vertex)) {}
    std::string offending_vertex;
};

/// A stated precondition failed (e.g. a function is not harmonic within tolerance).
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what, double residual = 0.0)
        : Error(what), max_residual(residual) {}
    double max_residual;
};

/// A linear solve or other numeric step failed.
struct NumericalError : Error {
    using Error::Error;
};

/// Malformed spec file or parameters.
struct SpecError : Error {
    using Error::Error;
};

/// Neumaier compensated summation. Used wherever a deterministic, order-stable
/// sum of many terms is required (boundary sums, Monte Carlo reductions).
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline bool approx_eq(double a, double b, double rel, double abs_tol = 0.0) {
    double diff = std::abs(a - b);
    return diff <= abs_tol || diff <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace harmonet
