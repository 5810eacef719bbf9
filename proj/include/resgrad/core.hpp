#pragma once

// Augmented dissipative systems: the phase point (t, q, p, w), where the reservoir w
// accumulates the work done by the dissipative force D, and the effectively conserved
// generator K = p^2/2 + V(q) + w.

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "resgrad/error.hpp"

namespace resgrad {

struct State {
    double t = 0.0;
    double q = 0.0;
    double p = 0.0;
    double w = 0.0;

    friend bool operator==(const State&, const State&) = default;
};

[[nodiscard]] inline bool is_finite(const State& s) noexcept {
    return std::isfinite(s.t) && std::isfinite(s.q) && std::isfinite(s.p) && std::isfinite(s.w);
}

inline void require_finite(const State& s) {
    if (!is_finite(s)) {
        throw NonFiniteStateError("non-finite state (t=" + std::to_string(s.t) +
                                  ", q=" + std::to_string(s.q) + ", p=" + std::to_string(s.p) +
                                  ", w=" + std::to_string(s.w) + ")");
    }
}

/// Time derivatives of the augmented state (q, p, w).
struct Rates {
    double dq = 0.0;
    double dp = 0.0;
    double dw = 0.0;
};

/// Partial derivatives of K with respect to q and p.
struct Gradient {
    double gq = 0.0;
    double gp = 0.0;
};

// ---------------------------------------------------------------------------
// System definitions
// ---------------------------------------------------------------------------

/// Something the integrators can step: conservative potential plus a non-potential
/// dissipative force D(q, p) and its discrete counterpart.
template <class S>
concept DissipativeSystem = requires(const S& sys, double x) {
    { sys.potential(x) } -> std::convertible_to<double>;
    { sys.force(x) } -> std::convertible_to<double>;
    { sys.potential_quotient(x, x) } -> std::convertible_to<double>;
    { sys.dissipation(x, x) } -> std::convertible_to<double>;
    { sys.discrete_dissipation(x, x, x, x) } -> std::convertible_to<double>;
};

/// (V(q1) - V(q0)) / (q1 - q0) for an arbitrary potential, switching to the analytic
/// limit V'(midpoint) once the two abscissae agree to within rounding.
template <class Potential, class Derivative>
[[nodiscard]] double difference_quotient(const Potential& potential, const Derivative& derivative,
                                         double q0, double q1) {
    const double dq = q1 - q0;
    const double threshold =
        1e3 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(q0), std::abs(q1)});
    if (std::abs(dq) < threshold) return derivative(0.5 * (q0 + q1));
    return (potential(q1) - potential(q0)) / dq;
}

struct DampedOscillatorParams {
    double b = 0.1;  ///< damping constant
    double k = 1.0;  ///< stiffness

    void validate() const {
        if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("damping b must be finite and >= 0");
        if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("stiffness k must be finite and > 0");
    }

    /// b^2 < 4k, the regime with a closed-form oscillating solution.
    [[nodiscard]] bool underdamped() const noexcept { return b * b < 4.0 * k; }

    friend bool operator==(const DampedOscillatorParams&, const DampedOscillatorParams&) = default;
};

/// V = k q^2 / 2, D = b p.
struct DampedOscillator {
    DampedOscillatorParams params{};

    [[nodiscard]] double potential(double q) const { return 0.5 * params.k * q * q; }
    [[nodiscard]] double force(double q) const { return -params.k * q; }
    [[nodiscard]] double potential_quotient(double q0, double q1) const {
        return 0.5 * params.k * (q0 + q1);
    }
    [[nodiscard]] double dissipation(double, double p) const { return params.b * p; }
    [[nodiscard]] double discrete_dissipation(double, double, double p0, double p1) const {
        return 0.5 * params.b * (p0 + p1);
    }
};

struct DuffingParams {
    double alpha = 1.0;  ///< linear stiffness
    double beta = 1.0;   ///< cubic stiffness
    double b = 0.1;      ///< linear damping

    friend bool operator==(const DuffingParams&, const DuffingParams&) = default;
};

/// V = alpha q^2 / 2 + beta q^4 / 4, D = b p.
struct Duffing {
    DuffingParams params{};

    [[nodiscard]] double potential(double q) const {
        const double q2 = q * q;
        return 0.5 * params.alpha * q2 + 0.25 * params.beta * q2 * q2;
    }
    [[nodiscard]] double force(double q) const {
        return -(params.alpha * q + params.beta * q * q * q);
    }
    [[nodiscard]] double potential_quotient(double q0, double q1) const {
        // (q1^4 - q0^4) / (q1 - q0) = (q0 + q1)(q0^2 + q1^2)
        return 0.5 * params.alpha * (q0 + q1) +
               0.25 * params.beta * (q0 + q1) * (q0 * q0 + q1 * q1);
    }
    [[nodiscard]] double dissipation(double, double p) const { return params.b * p; }
    [[nodiscard]] double discrete_dissipation(double q0, double q1, double p0, double p1) const {
        return 0.5 * (dissipation(q0, p0) + dissipation(q1, p1));
    }
};

struct VanDerPolParams {
    double mu = 1.0;

    friend bool operator==(const VanDerPolParams&, const VanDerPolParams&) = default;
};

/// V = q^2 / 2, D = mu (q^2 - 1) p. D < 0 inside |q| < 1 injects energy.
struct VanDerPol {
    VanDerPolParams params{};

    [[nodiscard]] double potential(double q) const { return 0.5 * q * q; }
    [[nodiscard]] double force(double q) const { return -q; }
    [[nodiscard]] double potential_quotient(double q0, double q1) const { return 0.5 * (q0 + q1); }
    [[nodiscard]] double dissipation(double q, double p) const {
        return params.mu * (q * q - 1.0) * p;
    }
    [[nodiscard]] double discrete_dissipation(double q0, double q1, double p0, double p1) const {
        return 0.5 * (dissipation(q0, p0) + dissipation(q1, p1));
    }
};

using SystemParams = std::variant<DampedOscillatorParams, DuffingParams, VanDerPolParams>;

/// Type-erased system record. Holds the defining functions together with the name and
/// parameter record of the system it was built from.
class SystemSpec {
public:
    template <DissipativeSystem S>
    SystemSpec(std::string name, S sys, SystemParams params)
        : name_(std::move(name)),
          params_(params),
          potential_([sys](double q) { return sys.potential(q); }),
          force_([sys](double q) { return sys.force(q); }),
          quotient_([sys](double q0, double q1) { return sys.potential_quotient(q0, q1); }),
          dissipation_([sys](double q, double p) { return sys.dissipation(q, p); }),
          discrete_([sys](double q0, double q1, double p0, double p1) {
              return sys.discrete_dissipation(q0, q1, p0, p1);
          }) {}

    /// Custom system from plain callables; the discrete dissipation defaults to the endpoint
    /// average and the potential quotient to the guarded difference quotient.
    static SystemSpec custom(std::string name, std::function<double(double)> potential,
                             std::function<double(double)> force,
                             std::function<double(double, double)> dissipation) {
        SystemSpec spec;
        spec.name_ = std::move(name);
        spec.potential_ = potential;
        spec.force_ = force;
        spec.dissipation_ = dissipation;
        spec.quotient_ = [potential, force](double q0, double q1) {
            return difference_quotient(potential, [&](double q) { return -force(q); }, q0, q1);
        };
        spec.discrete_ = [dissipation](double q0, double q1, double p0, double p1) {
            return 0.5 * (dissipation(q0, p0) + dissipation(q1, p1));
        };
        return spec;
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const std::optional<SystemParams>& params() const noexcept { return params_; }

    [[nodiscard]] double potential(double q) const { return potential_(q); }
    [[nodiscard]] double force(double q) const { return force_(q); }
    [[nodiscard]] double potential_quotient(double q0, double q1) const { return quotient_(q0, q1); }
    [[nodiscard]] double dissipation(double q, double p) const { return dissipation_(q, p); }
    [[nodiscard]] double discrete_dissipation(double q0, double q1, double p0, double p1) const {
        return discrete_(q0, q1, p0, p1);
    }

private:
    SystemSpec() = default;

    std::string name_;
    std::optional<SystemParams> params_;
    std::function<double(double)> potential_;
    std::function<double(double)> force_;
    std::function<double(double, double)> quotient_;
    std::function<double(double, double)> dissipation_;
    std::function<double(double, double, double, double)> discrete_;
};

/// Parameters of a damped harmonic oscillator, when the system is one.
[[nodiscard]] inline std::optional<DampedOscillatorParams> oscillator_params(const DampedOscillator& sys) {
    return sys.params;
}

[[nodiscard]] inline std::optional<DampedOscillatorParams> oscillator_params(const SystemSpec& sys) {
    if (sys.params()) {
        if (const auto* p = std::get_if<DampedOscillatorParams>(&*sys.params())) return *p;
    }
    return std::nullopt;
}

template <DissipativeSystem S>
[[nodiscard]] std::optional<DampedOscillatorParams> oscillator_params(const S&) {
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Built-in catalog
// ---------------------------------------------------------------------------

/// Parameter overrides for the built-in catalog. b is shared by the oscillator and Duffing.
struct SystemOptions {
    double b = 0.1;
    double k = 1.0;
    double mu = 1.0;
    double alpha = 1.0;
    double beta = 1.0;

    friend bool operator==(const SystemOptions&, const SystemOptions&) = default;
};

[[nodiscard]] inline SystemSpec make_dho(DampedOscillatorParams params = {}) {
    params.validate();
    return SystemSpec("dho", DampedOscillator{params}, params);
}

[[nodiscard]] inline SystemSpec make_duffing(DuffingParams params = {}) {
    return SystemSpec("duffing", Duffing{params}, params);
}

[[nodiscard]] inline SystemSpec make_vdp(VanDerPolParams params = {}) {
    return SystemSpec("vdp", VanDerPol{params}, params);
}

/// Look up a built-in system by name ("dho", "duffing", "vdp").
[[nodiscard]] inline SystemSpec make_system(const std::string& name, const SystemOptions& opt = {}) {
    if (name == "dho") return make_dho({opt.b, opt.k});
    if (name == "duffing") return make_duffing({opt.alpha, opt.beta, opt.b});
    if (name == "vdp") return make_vdp({opt.mu});
    throw CatalogError(name);
}

[[nodiscard]] inline std::vector<SystemSpec> builtin_systems(const SystemOptions& opt = {}) {
    return {make_system("dho", opt), make_system("duffing", opt), make_system("vdp", opt)};
}

// ---------------------------------------------------------------------------
// Energies and vector fields
// ---------------------------------------------------------------------------

/// Conservative energy H = p^2/2 + V(q); the reservoir is ignored.
template <DissipativeSystem S>
[[nodiscard]] double hamiltonian(const State& s, const S& sys) {
    require_finite(s);
    return 0.5 * s.p * s.p + sys.potential(s.q);
}

/// K = H + w, conserved along exact trajectories of the augmented system.
template <DissipativeSystem S>
[[nodiscard]] double k_energy(const State& s, const S& sys) {
    return hamiltonian(s, sys) + s.w;
}

/// (p, F(q) - D(q,p), D(q,p) p).
template <DissipativeSystem S>
[[nodiscard]] Rates continuous_rhs(const State& s, const S& sys) {
    require_finite(s);
    const double d = sys.dissipation(s.q, s.p);
    return {s.p, sys.force(s.q) - d, d * s.p};
}

/// dK/dq = V'(q) + D(q,p) (w differentiated along q), dK/dp = p.
template <DissipativeSystem S>
[[nodiscard]] Gradient k_gradient(const State& s, const S& sys) {
    require_finite(s);
    return {-sys.force(s.q) + sys.dissipation(s.q, s.p), s.p};
}

}  // namespace resgrad
