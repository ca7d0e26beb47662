#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace weylab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChartDegeneracyError : public Error {
public:
    using Error::Error;
};

class InvalidFieldError : public Error {
public:
    using Error::Error;
};

class MeshQualityError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
class UsageError : public Error {
public:
    using Error::Error;
};

/// The square root branch with Im > 0 is not defined (z^2 - r0 on the closed positive axis).
class BranchError : public Error {
public:
    using Error::Error;
};

/// Iterative eigensolver did not reach the requested residual.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double achieved_residual)
        : Error(what + " (achieved residual " + std::to_string(achieved_residual) + ")"),
          achieved_residual_(achieved_residual)
    {
    }
    double achieved_residual() const noexcept { return achieved_residual_; }

private:
    double achieved_residual_;
};

/// The spectral basis does not reach the ellipticity horizon needed for truncation.
class InsufficientSpectrumError : public Error {
public:
    InsufficientSpectrumError(const std::string& what, std::size_t required_modes, double required_eigenvalue)
        : Error(what), required_modes_(required_modes), required_eigenvalue_(required_eigenvalue)
    {
    }
    std::size_t required_modes() const noexcept { return required_modes_; }
    double required_eigenvalue() const noexcept { return required_eigenvalue_; }

private:
    std::size_t required_modes_;
    double required_eigenvalue_;
};

} // namespace weylab
