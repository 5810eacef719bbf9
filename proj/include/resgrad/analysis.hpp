#pragma once

// Error measurement against the closed-form oscillator, empirical orders from log-log
// least squares, K drift and energy loss ratios.
//
// Local errors follow the base-grid protocol: every point t_i = i h0 of a fixed grid is
// used as an exact seed, one step of the measured size h is taken, and
//   T_i = [x(t_i + h) - x_numeric] / h
// is recorded. Since the grid does not depend on h, the maxima for different h are
// comparable and their log-log slope estimates the order on that h-range.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "resgrad/core.hpp"
#include "resgrad/error.hpp"
#include "resgrad/exact.hpp"
#include "resgrad/integrators.hpp"

namespace resgrad {

enum class Variable { Q, P, W };

[[nodiscard]] inline std::string_view to_string(Variable v) noexcept {
    switch (v) {
        case Variable::Q: return "q";
        case Variable::P: return "p";
        case Variable::W: return "w";
    }
    return "q";
}

[[nodiscard]] inline double component(const State& s, Variable v) noexcept {
    switch (v) {
        case Variable::Q: return s.q;
        case Variable::P: return s.p;
        case Variable::W: return s.w;
    }
    return s.q;
}

inline constexpr double kDefaultBaseStep = 0.001;
inline const std::vector<double> kDefaultStepSet{0.036, 0.03, 0.028, 0.02, 0.017, 0.01};
inline constexpr State kReferenceState{0.0, 2.3, -3.1, 0.0};

struct OrderExperiment {
    double h0 = kDefaultBaseStep;
    std::vector<double> h_set = kDefaultStepSet;
    double t_end = 20.0;
    State ics = kReferenceState;
    IntegratorChoice integrator{};
    StepperConfig stepper{};  ///< h is replaced by each measured step

    void validate() const {
        if (!(h0 > 0.0)) throw DomainError("h0 must be positive");
        if (h_set.empty()) throw DomainError("h_set must not be empty");
        double h_max = 0.0;
        for (double h : h_set) {
            if (!(h > 0.0)) throw DomainError("every step in h_set must be positive");
            h_max = std::max(h_max, h);
        }
        auto sorted = h_set;
        std::sort(sorted.begin(), sorted.end());
        if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 2) {
            throw DomainError("h_set needs at least two distinct steps");
        }
        if (!(t_end > h_max)) throw DomainError("t_end must exceed every step in h_set");
    }

    /// Number of base-grid points in [0, t_end].
    [[nodiscard]] std::size_t base_points() const {
        const double n = t_end / h0;
        const double rounded = std::round(n);
        const double last = std::abs(n - rounded) < 1e-9 * std::max(1.0, n) ? rounded : std::floor(n);
        return static_cast<std::size_t>(last) + 1;
    }

    [[nodiscard]] double base_time(std::size_t i) const {
        return ics.t + static_cast<double>(i) * h0;
    }
};

struct ErrorSeries {
    Variable variable = Variable::Q;
    std::vector<double> times;
    std::vector<double> values;
    double max_abs = 0.0;

    void push(double t, double value) {
        times.push_back(t);
        values.push_back(value);
        max_abs = std::max(max_abs, std::abs(value));
    }
};

/// Local errors of all three components for one measured step.
struct LocalErrors {
    double h = 0.0;
    ErrorSeries q{Variable::Q, {}, {}, 0.0};
    ErrorSeries p{Variable::P, {}, {}, 0.0};
    ErrorSeries w{Variable::W, {}, {}, 0.0};

    [[nodiscard]] const ErrorSeries& of(Variable v) const noexcept {
        switch (v) {
            case Variable::Q: return q;
            case Variable::P: return p;
            case Variable::W: return w;
        }
        return q;
    }
};

template <DissipativeSystem S>
[[nodiscard]] LocalErrors local_errors(const IntegratorChoice& integrator, const S& sys,
                                       const DhoExactSolution& sol, const OrderExperiment& exp,
                                       double h) {
    StepperConfig cfg = exp.stepper;
    cfg.h = h;
    cfg.validate();
    LocalErrors out;
    out.h = h;
    const std::size_t n = exp.base_points();
    for (auto* s : {&out.q, &out.p, &out.w}) {
        s->times.reserve(n);
        s->values.reserve(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = exp.base_time(i);
        const State seed = sol.at(t);
        State numeric;
        try {
            numeric = step(integrator, seed, sys, cfg).state;
        } catch (const ConvergenceError& e) {
            throw e.at_step(i);
        }
        const State target = sol.at(t + h);
        out.q.push(t, (target.q - numeric.q) / h);
        out.p.push(t, (target.p - numeric.p) / h);
        out.w.push(t, (target.w - numeric.w) / h);
    }
    return out;
}

template <DissipativeSystem S>
[[nodiscard]] ErrorSeries local_error_series(const IntegratorChoice& integrator, const S& sys,
                                             const DhoExactSolution& sol,
                                             const OrderExperiment& exp, double h, Variable variable) {
    return local_errors(integrator, sys, sol, exp, h).of(variable);
}

/// e_i = x_i - x(t0 + i h) along one numerical trajectory.
template <DissipativeSystem S>
[[nodiscard]] ErrorSeries global_error_series(const IntegratorChoice& integrator, const S& sys,
                                              const DhoExactSolution& sol, const State& ics,
                                              const StepperConfig& cfg, double t_end,
                                              Variable variable) {
    const auto n = static_cast<std::size_t>(std::llround((t_end - ics.t) / cfg.h));
    const auto traj = integrate(integrator, ics, sys, cfg, n);
    ErrorSeries out{variable, {}, {}, 0.0};
    for (const State& s : traj) out.push(s.t, component(s, variable) - component(sol.at(s.t), variable));
    return out;
}

struct RegressionResult {
    double slope = 0.0;      ///< empirical order
    double intercept = 0.0;  ///< log c
    std::vector<std::pair<double, double>> points;  ///< (log h, log max|T|)
    double residual_rms = 0.0;
    double h_min = 0.0;  ///< measured range; the slope is only meaningful inside it
    double h_max = 0.0;
};

/// Ordinary least squares of log(max_abs) against log(h).
[[nodiscard]] inline RegressionResult fit_power_law(std::span<const std::pair<double, double>> h_and_max) {
    if (h_and_max.size() < 2) throw DegenerateDataError("need at least two step sizes");
    RegressionResult r;
    r.h_min = h_and_max.front().first;
    r.h_max = h_and_max.front().first;
    for (const auto& [h, m] : h_and_max) {
        if (!(h > 0.0)) throw DegenerateDataError("step sizes must be positive");
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw DegenerateDataError("error maximum must be positive and finite to take its log");
        }
        r.points.emplace_back(std::log(h), std::log(m));
        r.h_min = std::min(r.h_min, h);
        r.h_max = std::max(r.h_max, h);
    }
    if (r.h_min == r.h_max) throw DegenerateDataError("need at least two distinct step sizes");

    const double n = static_cast<double>(r.points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : r.points) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : r.points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : r.points) {
        const double e = y - (r.intercept + r.slope * x);
        ss += e * e;
    }
    r.residual_rms = std::sqrt(ss / n);
    return r;
}

[[nodiscard]] inline RegressionResult empirical_order(std::span<const std::pair<double, ErrorSeries>> series_per_h) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(series_per_h.size());
    for (const auto& [h, s] : series_per_h) pts.emplace_back(h, s.max_abs);
    return fit_power_law(pts);
}

struct OrderReport {
    std::vector<LocalErrors> per_h;  ///< in h_set order
    RegressionResult q;
    RegressionResult p;
    RegressionResult w;

    [[nodiscard]] const RegressionResult& of(Variable v) const noexcept {
        switch (v) {
            case Variable::Q: return q;
            case Variable::P: return p;
            case Variable::W: return w;
        }
        return q;
    }
};

/// Runs the whole protocol. Steps are measured concurrently; the report does not depend
/// on scheduling.
template <DissipativeSystem S>
[[nodiscard]] OrderReport run_order_experiment(const OrderExperiment& exp, const S& sys,
                                               const DhoExactSolution& sol) {
    exp.validate();
    std::vector<std::future<LocalErrors>> jobs;
    jobs.reserve(exp.h_set.size());
    for (double h : exp.h_set) {
        jobs.push_back(std::async(std::launch::async, [&, h] {
            return local_errors(exp.integrator, sys, sol, exp, h);
        }));
    }
    OrderReport report;
    for (auto& j : jobs) report.per_h.push_back(j.get());

    for (Variable v : {Variable::Q, Variable::P, Variable::W}) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& le : report.per_h) pts.emplace_back(le.h, le.of(v).max_abs);
        const auto fit = fit_power_law(pts);
        switch (v) {
            case Variable::Q: report.q = fit; break;
            case Variable::P: report.p = fit; break;
            case Variable::W: report.w = fit; break;
        }
    }
    return report;
}

/// d_i = K(state_i) - K(state_0).
template <DissipativeSystem S>
[[nodiscard]] std::vector<double> k_drift_series(std::span<const State> trajectory, const S& sys) {
    if (trajectory.empty()) throw DegenerateDataError("empty trajectory");
    const double k0 = k_energy(trajectory.front(), sys);
    std::vector<double> out;
    out.reserve(trajectory.size());
    for (const State& s : trajectory) out.push_back(k_energy(s, sys) - k0);
    return out;
}

/// R_i = E_{i+1} / E_i with E = p^2/2 + V(q), for i = 0 .. n-2.
template <DissipativeSystem S>
[[nodiscard]] std::vector<double> energy_loss_ratio(std::span<const State> trajectory, const S& sys) {
    if (trajectory.size() < 2) throw DegenerateDataError("energy loss ratio needs at least two states");
    std::vector<double> out;
    out.reserve(trajectory.size() - 1);
    double e_prev = hamiltonian(trajectory[0], sys);
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
        if (e_prev == 0.0) throw ZeroEnergyError(i);
        const double e_next = hamiltonian(trajectory[i + 1], sys);
        out.push_back(e_next / e_prev);
        e_prev = e_next;
    }
    return out;
}

/// d_R,i = |R_i - R_i^exact|, the exact ratio taken between the same two times.
template <DissipativeSystem S>
[[nodiscard]] std::vector<double> energy_ratio_deviation(std::span<const State> trajectory, const S& sys,
                                                         const DhoExactSolution& sol) {
    const auto numeric = energy_loss_ratio(trajectory, sys);
    std::vector<State> exact;
    exact.reserve(trajectory.size());
    for (const State& s : trajectory) exact.push_back(sol.at(s.t));
    const auto reference = energy_loss_ratio(std::span<const State>(exact), sys);
    std::vector<double> out(numeric.size());
    for (std::size_t i = 0; i < numeric.size(); ++i) out[i] = std::abs(numeric[i] - reference[i]);
    return out;
}

}  // namespace resgrad
