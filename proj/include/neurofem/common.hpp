#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace neurofem {

using Index = Eigen::Index;

/// Physical point; 1D problems only use the first coordinate.
using Point = Eigen::Vector2d;

inline Point point1d(double x) { return Point(x, 0.0); }

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class OutOfDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised by dense_solve when a pivot falls below the singularity threshold.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, double min_pivot)
        : std::runtime_error(what), min_pivot_(min_pivot) {}
    double min_pivot() const { return min_pivot_; }

private:
    double min_pivot_;
};

/// A state problem could not be solved. `reason` is a short machine-readable tag.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(std::string reason, const std::string& what, double estimate = 0.0)
        : std::runtime_error(what), reason_(std::move(reason)), estimate_(estimate) {}
    const std::string& reason() const { return reason_; }
    /// The stability or conditioning estimate that triggered the failure.
    double estimate() const { return estimate_; }

private:
    std::string reason_;
    double estimate_;
};

}  // namespace neurofem
