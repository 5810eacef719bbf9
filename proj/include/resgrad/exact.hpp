#pragma once

#include <cmath>

#include "resgrad/core.hpp"
#include "resgrad/error.hpp"

namespace resgrad {

/// Closed-form trajectory of the underdamped oscillator q'' + b q' + k q = 0 started at t = 0.
/// The reservoir follows from conservation of K: w(t) = K0 - H(q(t), p(t)).
class DhoExactSolution {
public:
    DhoExactSolution(double q0, double p0, DampedOscillatorParams params)
        : q0_(q0), p0_(p0), params_(params) {
        params_.validate();
        if (!params_.underdamped()) {
            throw DomainError("exact solution requires an underdamped oscillator (b^2 < 4k)");
        }
        if (!std::isfinite(q0) || !std::isfinite(p0)) {
            throw NonFiniteStateError("non-finite initial condition");
        }
        omega_ = std::sqrt(params_.k - 0.25 * params_.b * params_.b);
        a_ = q0;
        b_ = (p0 + 0.5 * params_.b * q0) / omega_;
        k0_ = 0.5 * p0 * p0 + 0.5 * params_.k * q0 * q0;
    }

    DhoExactSolution(const State& initial, DampedOscillatorParams params)
        : DhoExactSolution(initial.q, initial.p, params) {}

    [[nodiscard]] double q0() const noexcept { return q0_; }
    [[nodiscard]] double p0() const noexcept { return p0_; }
    [[nodiscard]] const DampedOscillatorParams& params() const noexcept { return params_; }
    [[nodiscard]] double omega() const noexcept { return omega_; }
    [[nodiscard]] double cos_amplitude() const noexcept { return a_; }
    [[nodiscard]] double sin_amplitude() const noexcept { return b_; }
    /// Initial energy, equal to K along the whole trajectory.
    [[nodiscard]] double k0() const noexcept { return k0_; }

    [[nodiscard]] State at(double t) const {
        if (!std::isfinite(t)) throw NonFiniteStateError("non-finite time");
        const double decay = std::exp(-0.5 * params_.b * t);
        const double c = std::cos(omega_ * t);
        const double s = std::sin(omega_ * t);
        const double osc = a_ * c + b_ * s;
        const double q = decay * osc;
        const double p = decay * (omega_ * (b_ * c - a_ * s) - 0.5 * params_.b * osc);
        const double w = k0_ - 0.5 * p * p - 0.5 * params_.k * q * q;
        return {t, q, p, w};
    }

private:
    double q0_;
    double p0_;
    DampedOscillatorParams params_;
    double omega_ = 0.0;
    double a_ = 0.0;
    double b_ = 0.0;
    double k0_ = 0.0;
};

[[nodiscard]] inline State exact_state(const DhoExactSolution& sol, double t) { return sol.at(t); }

}  // namespace resgrad
