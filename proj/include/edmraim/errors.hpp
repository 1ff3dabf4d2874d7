#ifndef EDMRAIM_ERRORS_HPP
#define EDMRAIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace edm {

// Bad user input: malformed config, violated preconditions.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Scenario violates a geometry invariant (too few satellites, coincident or coplanar points).
class GeometryError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Numerical breakdown: eigensolver failure, zero denominators, non-finite values.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A tracked eigenvalue is not simple, so first-order perturbation does not apply.
class DegenerateEigenvalueError : public NumericalError {
public:
    DegenerateEigenvalueError(const std::string& what, std::size_t eigen_index, double gap)
        : NumericalError(what), eigen_index_(eigen_index), gap_(gap) {}

    std::size_t eigen_index() const { return eigen_index_; }
    double gap() const { return gap_; }

private:
    std::size_t eigen_index_;
    double gap_;
};

// Output could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace edm

#endif // EDMRAIM_ERRORS_HPP
