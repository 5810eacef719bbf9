#pragma once

// Experiment drivers behind the resgrad subcommands. Each command produces in-memory
// CSV documents plus a short human-readable summary; writing them is left to the caller.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "resgrad/analysis.hpp"
#include "resgrad/cli/config.hpp"
#include "resgrad/core.hpp"
#include "resgrad/exact.hpp"
#include "resgrad/integrators.hpp"

namespace resgrad::cli {

struct OutputDocument {
    std::string path;  ///< empty: standard output
    std::string body;
};

struct RunOutput {
    std::vector<OutputDocument> documents;
    std::string summary;
};

namespace detail {

inline std::string csv_number(double v) { return format_double(v); }

/// "<stem><suffix>.csv" for a user path "<stem>.csv" (or "<stem>").
[[nodiscard]] inline std::string derived_path(const std::string& out, const std::string& suffix) {
    std::string stem = out;
    if (stem.size() > 4 && stem.ends_with(".csv")) stem.resize(stem.size() - 4);
    return stem + suffix + ".csv";
}

[[nodiscard]] inline std::size_t step_count(double t_end, double h) {
    return static_cast<std::size_t>(std::llround(t_end / h));
}

[[nodiscard]] inline DhoExactSolution require_exact(const RunConfig& cfg) {
    if (cfg.system != "dho") {
        throw ConfigError(std::string(to_string(cfg.command)) +
                          " needs the closed-form solution, available for --system dho only");
    }
    return DhoExactSolution(cfg.ics, {cfg.params.b, cfg.params.k});
}

/// Re-throws library errors with the command and step size attached.
/// A zero h means the failing step size is not known at this level.
template <class F>
auto with_context(const RunConfig& cfg, const std::string& what, double h, double t_step, F&& f) {
    const auto prefix = [&] {
        std::string s = std::string(to_string(cfg.command)) + " " + what;
        if (h > 0.0) s += " h=" + format_double(h);
        return s + ": ";
    };
    try {
        return f();
    } catch (const ConvergenceError& e) {
        std::string msg = prefix() + e.what();
        if (e.step()) msg += " (t=" + format_double(static_cast<double>(*e.step()) * t_step) + ")";
        throw Error(msg);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw Error(prefix() + e.what());
    }
}

[[nodiscard]] inline std::string trajectory_csv(const std::vector<State>& traj, const SystemSpec& sys) {
    std::ostringstream os;
    os << "step,t,q,p,w,K,E,R\n";
    double e_prev = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const State& s = traj[i];
        const double e = hamiltonian(s, sys);
        os << i << ',' << csv_number(s.t) << ',' << csv_number(s.q) << ',' << csv_number(s.p) << ','
           << csv_number(s.w) << ',' << csv_number(e + s.w) << ',' << csv_number(e) << ',';
        if (i > 0 && e_prev != 0.0) os << csv_number(e / e_prev);
        os << '\n';
        e_prev = e;
    }
    return os.str();
}

}  // namespace detail

[[nodiscard]] inline RunOutput run_simulate(const RunConfig& cfg) {
    const auto sys = cfg.make();
    const auto stepper = cfg.stepper();
    const auto n = detail::step_count(cfg.t_end, cfg.h);
    RunOutput out;
    std::ostringstream summary;
    for (const auto& integ : cfg.integrators) {
        const auto traj = detail::with_context(cfg, integ.name(), cfg.h, cfg.h, [&] {
            return integrate(integ, cfg.ics, sys, stepper, n);
        });
        const std::string path = cfg.out.empty() || cfg.integrators.size() == 1
                                     ? cfg.out
                                     : detail::derived_path(cfg.out, "_" + integ.tag());
        out.documents.push_back({path, detail::trajectory_csv(traj, sys)});
        const auto drift = k_drift_series(std::span<const State>(traj), sys);
        double max_drift = 0.0;
        for (double d : drift) max_drift = std::max(max_drift, std::abs(d));
        summary << integ.name() << ": " << n << " steps of h=" << detail::format_double(cfg.h)
                << " on " << cfg.system << ", max |K - K0| = " << std::setprecision(3) << max_drift << '\n';
    }
    out.summary = summary.str();
    return out;
}

[[nodiscard]] inline RunOutput run_exact(const RunConfig& cfg) {
    const auto sol = detail::require_exact(cfg);
    const auto sys = cfg.make();
    const auto n = detail::step_count(cfg.t_end, cfg.h);
    std::vector<State> traj;
    traj.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        State s = sol.at(static_cast<double>(i) * cfg.h);
        s.w += cfg.ics.w;
        traj.push_back(s);
    }
    RunOutput out;
    out.documents.push_back({cfg.out, detail::trajectory_csv(traj, sys)});
    out.summary = "exact oscillator solution: " + std::to_string(n + 1) + " samples, omega = " +
                  detail::format_double(sol.omega()) + '\n';
    return out;
}

[[nodiscard]] inline RunOutput run_order(const RunConfig& cfg) {
    const auto sol = detail::require_exact(cfg);
    const auto sys = cfg.make();
    RunOutput out;
    std::ostringstream summary;
    for (const auto& integ : cfg.integrators) {
        OrderExperiment exp;
        exp.h0 = cfg.h0;
        exp.h_set = cfg.h_set;
        exp.t_end = cfg.t_end;
        exp.ics = cfg.ics;
        exp.integrator = integ;
        exp.stepper = cfg.stepper();
        const auto report = detail::with_context(cfg, integ.name(), 0.0, cfg.h0, [&] {
            return run_order_experiment(exp, sys, sol);
        });

        const std::string suffix = cfg.integrators.size() == 1 ? "" : "_" + integ.tag();
        std::ostringstream table;
        table << "variable,slope,intercept,residual_rms\n";
        for (Variable v : {Variable::Q, Variable::P, Variable::W}) {
            const auto& r = report.of(v);
            table << to_string(v) << ',' << detail::csv_number(r.slope) << ',' << detail::csv_number(r.intercept)
                  << ',' << detail::csv_number(r.residual_rms) << '\n';
        }
        out.documents.push_back({cfg.out.empty() ? "" : detail::derived_path(cfg.out, suffix), table.str()});

        if (!cfg.out.empty()) {
            for (const auto& le : report.per_h) {
                std::ostringstream os;
                os << "i,t,T_q,T_p,T_w\n";
                for (std::size_t i = 0; i < le.q.values.size(); ++i) {
                    os << i << ',' << detail::csv_number(le.q.times[i]) << ',' << detail::csv_number(le.q.values[i])
                       << ',' << detail::csv_number(le.p.values[i]) << ',' << detail::csv_number(le.w.values[i])
                       << '\n';
                }
                out.documents.push_back(
                    {detail::derived_path(cfg.out, suffix + "_h" + detail::format_double(le.h)), os.str()});
            }
        }

        summary << std::setprecision(6) << integ.name() << " on h in [" << report.q.h_min << ", "
                << report.q.h_max << "], h0=" << cfg.h0 << ", t_end=" << cfg.t_end << ": " << std::fixed
                << std::setprecision(5)
                << "slope_q=" << report.q.slope << " slope_p=" << report.p.slope << " slope_w=" << report.w.slope
                << std::defaultfloat << '\n';
    }
    out.summary = summary.str();
    return out;
}

[[nodiscard]] inline RunOutput run_compare(const RunConfig& cfg) {
    const auto sys = cfg.make();
    const auto stepper = cfg.stepper();
    const auto n = detail::step_count(cfg.t_end, cfg.h);
    std::optional<DhoExactSolution> sol;
    if (cfg.system == "dho" && DampedOscillatorParams{cfg.params.b, cfg.params.k}.underdamped()) {
        sol.emplace(cfg.ics, DampedOscillatorParams{cfg.params.b, cfg.params.k});
    }

    struct Column {
        std::string tag;
        std::vector<State> traj;
        std::vector<double> drift;
        std::vector<double> dr;
    };
    std::vector<Column> cols;
    for (const auto& integ : cfg.integrators) {
        Column c;
        c.tag = integ.tag();
        c.traj = detail::with_context(cfg, integ.name(), cfg.h, cfg.h, [&] {
            return integrate(integ, cfg.ics, sys, stepper, n);
        });
        c.drift = k_drift_series(std::span<const State>(c.traj), sys);
        if (sol && c.traj.size() >= 2) {
            c.dr = detail::with_context(cfg, integ.name(), cfg.h, cfg.h, [&] {
                return energy_ratio_deviation(std::span<const State>(c.traj), sys, *sol);
            });
        }
        cols.push_back(std::move(c));
    }

    std::ostringstream os;
    os << "step,t";
    for (const auto& c : cols) os << ",q_" << c.tag << ",p_" << c.tag << ",Kdrift_" << c.tag << ",dR_" << c.tag;
    os << '\n';
    for (std::size_t i = 0; i <= n; ++i) {
        os << i << ',' << detail::csv_number(cols.front().traj[i].t);
        for (const auto& c : cols) {
            os << ',' << detail::csv_number(c.traj[i].q) << ',' << detail::csv_number(c.traj[i].p) << ','
               << detail::csv_number(c.drift[i]) << ',';
            if (i > 0 && !c.dr.empty()) os << detail::csv_number(c.dr[i - 1]);
        }
        os << '\n';
    }

    RunOutput out;
    out.documents.push_back({cfg.out, os.str()});
    std::ostringstream summary;
    for (const auto& c : cols) {
        double max_drift = 0.0;
        for (double d : c.drift) max_drift = std::max(max_drift, std::abs(d));
        summary << c.tag << ": max |K - K0| = " << std::setprecision(3) << max_drift;
        if (!c.dr.empty()) summary << ", max d_R = " << *std::max_element(c.dr.begin(), c.dr.end());
        summary << '\n';
    }
    out.summary = summary.str();
    return out;
}

[[nodiscard]] inline RunOutput run(const RunConfig& cfg) {
    cfg.validate();
    switch (cfg.command) {
        case Command::Simulate: return run_simulate(cfg);
        case Command::Order: return run_order(cfg);
        case Command::Compare: return run_compare(cfg);
        case Command::Exact: return run_exact(cfg);
    }
    throw ConfigError("unknown command");
}

}  // namespace resgrad::cli
