#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace resgrad {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state component became NaN or infinite.
class NonFiniteStateError : public Error {
public:
    using Error::Error;
};

/// A parameter record violates its invariants (b < 0, k <= 0, overdamped exact solution, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested system name is not in the built-in catalog.
class CatalogError : public Error {
public:
    explicit CatalogError(const std::string& name)
        : Error("unknown system '" + name + "' (expected dho, duffing or vdp)"), name_(name) {}
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Fixed-point iteration of an implicit step did not contract within the iteration cap.
class ConvergenceError : public Error {
public:
    ConvergenceError(double residual, int iterations, std::optional<std::size_t> step = std::nullopt)
        : Error(format(residual, iterations, step)), residual_(residual), iterations_(iterations),
          step_(step) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] std::optional<std::size_t> step() const noexcept { return step_; }

    [[nodiscard]] ConvergenceError at_step(std::size_t step) const {
        return ConvergenceError(residual_, iterations_, step);
    }

private:
    static std::string format(double residual, int iterations, std::optional<std::size_t> step) {
        std::string msg = "fixed-point iteration did not converge after " +
                          std::to_string(iterations) + " iterations (last residual " +
                          std::to_string(residual) + ")";
        if (step) msg += " at step " + std::to_string(*step);
        return msg;
    }

    double residual_;
    int iterations_;
    std::optional<std::size_t> step_;
};

/// NaN or Inf produced while iterating an implicit step.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Regression input that cannot be fit (zero error maxima, fewer than two distinct steps).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// Energy ratio requested at a point where the energy vanishes.
class ZeroEnergyError : public Error {
public:
    explicit ZeroEnergyError(std::size_t index)
        : Error("energy vanishes at trajectory index " + std::to_string(index)), index_(index) {}
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Malformed command line or configuration file.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace resgrad
