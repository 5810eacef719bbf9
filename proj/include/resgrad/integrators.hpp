#pragma once

// One-step flows for augmented dissipative systems:
//   * modified discrete gradient (ModDG), exactly preserving K, with optional
//     effective-step corrections h -> h (d1 + d2 h + d3 h^2 + d4 h^3);
//   * pqpLF, the momentum-position-momentum leapfrog driven by the gradient of K;
//   * classical explicit RK4 on (q, p, w).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "resgrad/core.hpp"
#include "resgrad/error.hpp"

namespace resgrad {

struct StepperConfig {
    double h = 0.01;
    /// Absolute tolerance on the max-norm of successive fixed-point iterates.
    double fp_tol = 1e-14;
    int fp_max_iter = 500;

    void validate() const {
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be positive");
        if (!(fp_tol > 0.0)) throw DomainError("fp_tol must be positive");
        if (fp_max_iter < 1) throw DomainError("fp_max_iter must be at least 1");
    }
};

enum class DeltaTag { None, Q3, Q4, P3, P4 };

/// Which Taylor expansion the effective-step coefficients are matched against.
///   Q*: q(t+h) - q(t) = (delta/2) (p(t) + p(t+h))
///   P*: p(t+h) - p(t) = (delta/2) (pdot(t) + pdot(t+h))
/// The corrections are dropped for a step whose denominator (p for Q*, q + b p for P*) is
/// smaller than denominator_guard * max(1, |q|, |p|).
struct DeltaVariant {
    DeltaTag tag = DeltaTag::None;
    double denominator_guard = 1e-2;

    friend bool operator==(const DeltaVariant&, const DeltaVariant&) = default;
};

[[nodiscard]] inline std::string_view to_string(DeltaTag tag) noexcept {
    switch (tag) {
        case DeltaTag::None: return "none";
        case DeltaTag::Q3: return "q3";
        case DeltaTag::Q4: return "q4";
        case DeltaTag::P3: return "p3";
        case DeltaTag::P4: return "p4";
    }
    return "none";
}

struct DeltaCoefficients {
    double d1 = 1.0;
    double d2 = 0.0;
    double d3 = 0.0;
    double d4 = 0.0;
    bool fallback = false;  ///< denominator guard tripped, series reduced to (1, 0, 0, 0)
};

struct EffectiveStep {
    double h_eff = 0.0;
    bool fallback = false;  ///< series produced h_eff <= 0 and the plain step was used
};

struct StepResult {
    State state;
    int fp_iterations = 0;
    double delta_factor = 1.0;  ///< h_eff / h
    bool delta_fallback = false;
};

/// p and its first four time derivatives along the linear flow q' = p, p' = -k q - b p.
struct MomentumDerivatives {
    double p = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
    double d4 = 0.0;
};

[[nodiscard]] inline MomentumDerivatives momentum_derivatives(double q, double p,
                                                              const DampedOscillatorParams& par) {
    // x^(n+1) = A x^(n), A = [[0, 1], [-k, -b]]; q^(n+1) = p^(n).
    MomentumDerivatives out;
    out.p = p;
    double qn = q;
    double pn = p;
    double* slots[] = {&out.d1, &out.d2, &out.d3, &out.d4};
    for (double* slot : slots) {
        const double next_p = -par.k * qn - par.b * pn;
        qn = pn;
        pn = next_p;
        *slot = pn;
    }
    return out;
}

/// Effective-step series coefficients for the damped harmonic oscillator at (q, p).
[[nodiscard]] inline DeltaCoefficients delta_coefficients(double q, double p,
                                                          const DampedOscillatorParams& par,
                                                          const DeltaVariant& variant) {
    if (variant.tag == DeltaTag::None) return {};
    const auto dp = momentum_derivatives(q, p, par);
    const bool q_matched = variant.tag == DeltaTag::Q3 || variant.tag == DeltaTag::Q4;
    const bool fourth = variant.tag == DeltaTag::Q4 || variant.tag == DeltaTag::P4;
    const double scale = std::max({1.0, std::abs(q), std::abs(p)});

    DeltaCoefficients c;
    if (q_matched) {
        // d3 p = -p''/12,  d4 p = -p'''/24 - p' d3 / 2
        if (!(std::abs(p) >= variant.denominator_guard * scale)) return {.fallback = true};
        c.d3 = -dp.d2 / (12.0 * p);
        if (fourth) c.d4 = (dp.d1 * dp.d2 - dp.d3 * p) / (24.0 * p * p);
    } else {
        // pdot = -(q + b p);  d3 (q + b p) = p'''/12,  d4 (q + b p) = p''''/24 + p'' d3 / 2
        const double den = par.k * q + par.b * p;
        if (!(std::abs(den) >= variant.denominator_guard * scale)) return {.fallback = true};
        c.d3 = dp.d3 / (12.0 * den);
        if (fourth) c.d4 = (dp.d4 * den + dp.d2 * dp.d3) / (24.0 * den * den);
    }
    return c;
}

[[nodiscard]] inline EffectiveStep effective_step(double h, const DeltaCoefficients& c) {
    const double h_eff = h * (c.d1 + h * (c.d2 + h * (c.d3 + h * c.d4)));
    if (!(h_eff > 0.0) || !std::isfinite(h_eff)) return {h, true};
    return {h_eff, false};
}

/// Solves the modified discrete gradient equations with step eta (any sign):
///   (q+ - q)/eta = (p + p+)/2
///   (p+ - p)/eta = -[V(q+) - V(q)]/(q+ - q) - Dbar
///   (w+ - w)/eta = Dbar (p + p+)/2
/// The second line is the K difference quotient with (w+ - w)/(q+ - q) eliminated through
/// the first and third lines. Time advances by dt.
template <DissipativeSystem S>
[[nodiscard]] StepResult solve_discrete_gradient(const State& s, const S& sys, double eta,
                                                 double dt, const StepperConfig& cfg) {
    require_finite(s);
    const auto map = [&](double qn, double pn) {
        const double dbar = sys.discrete_dissipation(s.q, qn, s.p, pn);
        const double pavg = 0.5 * (s.p + pn);
        return State{s.t + dt, s.q + eta * pavg,
                     s.p - eta * (sys.potential_quotient(s.q, qn) + dbar), s.w + eta * dbar * pavg};
    };

    // explicit Euler predictor
    const double d0 = sys.dissipation(s.q, s.p);
    State x{s.t + dt, s.q + eta * s.p, s.p + eta * (sys.force(s.q) - d0), s.w + eta * d0 * s.p};

    double diff = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.fp_max_iter; ++it) {
        const State next = map(x.q, x.p);
        if (!is_finite(next)) {
            throw DivergenceError("fixed-point iterate became non-finite after " +
                                  std::to_string(it) + " iterations");
        }
        diff = std::max({std::abs(next.q - x.q), std::abs(next.p - x.p), std::abs(next.w - x.w)});
        x = next;
        // iterates stagnate at the rounding floor when fp_tol is below it
        const double floor = 4.0 * std::numeric_limits<double>::epsilon() *
                             std::max({1.0, std::abs(x.q), std::abs(x.p), std::abs(x.w)});
        if (diff <= cfg.fp_tol || diff <= floor) return {x, it, 1.0, false};
    }
    throw ConvergenceError(diff, cfg.fp_max_iter);
}

template <DissipativeSystem S>
[[nodiscard]] StepResult moddg_step(const State& s, const S& sys, const StepperConfig& cfg,
                                    const DeltaVariant& variant = {}) {
    cfg.validate();
    require_finite(s);
    DeltaCoefficients coeffs;
    if (variant.tag != DeltaTag::None) {
        const auto par = oscillator_params(sys);
        if (!par) throw DomainError("effective-step corrections are defined for the damped oscillator only");
        coeffs = delta_coefficients(s.q, s.p, *par, variant);
    }
    const auto eff = effective_step(cfg.h, coeffs);
    auto res = solve_discrete_gradient(s, sys, eff.h_eff, cfg.h, cfg);
    res.delta_factor = eff.h_eff / cfg.h;
    res.delta_fallback = coeffs.fallback || eff.fallback;
    return res;
}

/// Leapfrog on K for the damped oscillator; the implicit half-kick is solved in closed form.
/// The reservoir takes the midpoint-rectangle increment h b p_half^2.
template <DissipativeSystem S>
[[nodiscard]] StepResult pqplf_step(const State& s, const S& sys, const StepperConfig& cfg) {
    cfg.validate();
    require_finite(s);
    const auto par = oscillator_params(sys);
    if (!par) throw DomainError("pqplf is defined for the damped oscillator only");
    const double h = cfg.h;
    const double b = par->b;
    const double k = par->k;
    const double p_half = (s.p - 0.5 * h * k * s.q) / (1.0 + 0.5 * h * b);
    const double q1 = s.q + h * p_half;
    const double p1 = p_half - 0.5 * h * (k * q1 + b * p_half);
    const double w1 = s.w + h * b * p_half * p_half;
    return {State{s.t + h, q1, p1, w1}, 0, 1.0, false};
}

template <DissipativeSystem S>
[[nodiscard]] StepResult erk4_step(const State& s, const S& sys, const StepperConfig& cfg) {
    cfg.validate();
    require_finite(s);
    const double h = cfg.h;
    const auto shifted = [&](const Rates& r, double c) {
        return State{s.t + c, s.q + c * r.dq, s.p + c * r.dp, s.w + c * r.dw};
    };
    const Rates k1 = continuous_rhs(s, sys);
    const Rates k2 = continuous_rhs(shifted(k1, 0.5 * h), sys);
    const Rates k3 = continuous_rhs(shifted(k2, 0.5 * h), sys);
    const Rates k4 = continuous_rhs(shifted(k3, h), sys);
    const double c = h / 6.0;
    State out{s.t + h, s.q + c * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq),
              s.p + c * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp),
              s.w + c * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw)};
    require_finite(out);
    return {out, 0, 1.0, false};
}

// ---------------------------------------------------------------------------
// Scheme selection
// ---------------------------------------------------------------------------

enum class Scheme { ModDG, PqpLF, ERK4 };

struct IntegratorChoice {
    Scheme scheme = Scheme::ModDG;
    DeltaVariant variant{};

    /// "moddg", "moddg:q3", "pqplf", "erk4".
    [[nodiscard]] std::string name() const {
        switch (scheme) {
            case Scheme::ModDG: return "moddg:" + std::string(to_string(variant.tag));
            case Scheme::PqpLF: return "pqplf";
            case Scheme::ERK4: return "erk4";
        }
        return {};
    }

    /// Identifier safe for CSV column names ("moddg_q3").
    [[nodiscard]] std::string tag() const {
        auto n = name();
        std::replace(n.begin(), n.end(), ':', '_');
        return n;
    }

    friend bool operator==(const IntegratorChoice&, const IntegratorChoice&) = default;
};

[[nodiscard]] inline IntegratorChoice parse_integrator(std::string_view text) {
    IntegratorChoice c;
    if (text == "pqplf") return {Scheme::PqpLF, {}};
    if (text == "erk4") return {Scheme::ERK4, {}};
    if (text == "moddg") return c;
    if (text.starts_with("moddg:")) {
        const auto v = text.substr(6);
        if (v == "none") c.variant.tag = DeltaTag::None;
        else if (v == "q3") c.variant.tag = DeltaTag::Q3;
        else if (v == "q4") c.variant.tag = DeltaTag::Q4;
        else if (v == "p3") c.variant.tag = DeltaTag::P3;
        else if (v == "p4") c.variant.tag = DeltaTag::P4;
        else throw ConfigError("unknown moddg variant '" + std::string(v) + "'");
        return c;
    }
    throw ConfigError("unknown integrator '" + std::string(text) + "'");
}

template <DissipativeSystem S>
[[nodiscard]] StepResult step(const IntegratorChoice& choice, const State& s, const S& sys,
                              const StepperConfig& cfg) {
    switch (choice.scheme) {
        case Scheme::ModDG: return moddg_step(s, sys, cfg, choice.variant);
        case Scheme::PqpLF: return pqplf_step(s, sys, cfg);
        case Scheme::ERK4: return erk4_step(s, sys, cfg);
    }
    throw DomainError("unknown scheme");
}

/// Trajectory of n_steps constant steps; element 0 is s0. Times are t0 + i h.
template <DissipativeSystem S>
[[nodiscard]] std::vector<State> integrate(const IntegratorChoice& choice, const State& s0,
                                           const S& sys, const StepperConfig& cfg,
                                           std::size_t n_steps) {
    require_finite(s0);
    std::vector<State> traj;
    traj.reserve(n_steps + 1);
    traj.push_back(s0);
    for (std::size_t i = 0; i < n_steps; ++i) {
        State next;
        try {
            next = step(choice, traj.back(), sys, cfg).state;
        } catch (const ConvergenceError& e) {
            throw e.at_step(i);
        }
        next.t = s0.t + static_cast<double>(i + 1) * cfg.h;
        traj.push_back(next);
    }
    return traj;
}

}  // namespace resgrad
