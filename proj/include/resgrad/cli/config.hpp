#pragma once

// Experiment configuration: defaults, `key = value` config files, and the command-line
// grammar of the resgrad tool. File settings are applied first, flags override them.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "resgrad/analysis.hpp"
#include "resgrad/core.hpp"
#include "resgrad/error.hpp"
#include "resgrad/integrators.hpp"

namespace resgrad::cli {

enum class Command { Simulate, Order, Compare, Exact };

[[nodiscard]] inline std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Order: return "order";
        case Command::Compare: return "compare";
        case Command::Exact: return "exact";
    }
    return "simulate";
}

[[nodiscard]] inline Command parse_command(std::string_view s) {
    if (s == "simulate") return Command::Simulate;
    if (s == "order") return Command::Order;
    if (s == "compare") return Command::Compare;
    if (s == "exact") return Command::Exact;
    throw ConfigError("unknown command '" + std::string(s) + "' (expected simulate, order, compare or exact)");
}

[[nodiscard]] inline std::vector<IntegratorChoice> default_integrators(Command c) {
    if (c == Command::Compare) {
        return {IntegratorChoice{}, IntegratorChoice{Scheme::PqpLF, {}}, IntegratorChoice{Scheme::ERK4, {}}};
    }
    return {IntegratorChoice{}};
}

struct RunConfig {
    Command command = Command::Simulate;
    std::string system = "dho";
    SystemOptions params{};
    std::vector<IntegratorChoice> integrators = default_integrators(Command::Simulate);
    State ics = kReferenceState;
    double h = 0.01;
    double h0 = kDefaultBaseStep;
    std::vector<double> h_set = kDefaultStepSet;
    double t_end = 20.0;
    double fp_tol = 1e-14;
    int fp_max_iter = 500;
    std::string out;

    [[nodiscard]] StepperConfig stepper() const { return {h, fp_tol, fp_max_iter}; }

    [[nodiscard]] SystemSpec make() const { return make_system(system, params); }

    void validate() const {
        if (system != "dho" && system != "duffing" && system != "vdp") throw CatalogError(system);
        if (!(params.b >= 0.0)) throw ConfigError("b must be non-negative");
        if (!(params.k > 0.0)) throw ConfigError("k must be positive");
        if (!(h > 0.0)) throw ConfigError("h must be positive");
        if (!(h0 > 0.0)) throw ConfigError("h0 must be positive");
        if (!(t_end > 0.0)) throw ConfigError("t-end must be positive");
        if (!(fp_tol > 0.0)) throw ConfigError("fp-tol must be positive");
        if (fp_max_iter < 1) throw ConfigError("fp-max-iter must be at least 1");
        if (integrators.empty()) throw ConfigError("at least one integrator is required");
        for (double v : {ics.q, ics.p, ics.w}) {
            if (!std::isfinite(v)) throw ConfigError("initial conditions must be finite");
        }
        if (command == Command::Order) {
            OrderExperiment exp;
            exp.h0 = h0;
            exp.h_set = h_set;
            exp.t_end = t_end;
            try {
                exp.validate();
            } catch (const DomainError& e) {
                throw ConfigError(e.what());
            }
        }
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

[[nodiscard]] inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[nodiscard]] inline double parse_double(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    if (!t.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc{} || ptr != last) {
        throw ConfigError("non-numeric value for " + std::string(key) + ": '" + t + "'");
    }
    return v;
}

[[nodiscard]] inline int parse_int(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError("non-integer value for " + std::string(key) + ": '" + t + "'");
    }
    return v;
}

[[nodiscard]] inline std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

[[nodiscard]] inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

/// Keys accepted in config files and, prefixed with "--", on the command line.
inline const std::vector<std::string> kConfigKeys{
    "system", "b",  "k",  "mu", "alpha", "beta",  "integrator", "q0",          "p0",
    "w0",     "h",  "h0", "h-set", "t-end", "fp-tol", "fp-max-iter", "out"};

namespace detail {

[[nodiscard]] inline std::pair<std::string, std::string> option_help(std::string_view key) {
    if (key == "system") return {"NAME", "dho | duffing | vdp"};
    if (key == "b") return {"F", "damping (dho, duffing)"};
    if (key == "k") return {"F", "spring constant (dho)"};
    if (key == "mu") return {"F", "van der Pol parameter"};
    if (key == "alpha") return {"F", "Duffing linear stiffness"};
    if (key == "beta") return {"F", "Duffing cubic stiffness"};
    if (key == "q0" || key == "p0" || key == "w0") return {"F", "initial " + std::string(key.substr(0, 1))};
    if (key == "h") return {"F", "time step"};
    if (key == "h0") return {"F", "base grid step (order)"};
    if (key == "h-set") return {"F,F,...", "measured steps (order)"};
    if (key == "t-end") return {"F", "end time"};
    if (key == "fp-tol") return {"F", "fixed-point tolerance"};
    if (key == "fp-max-iter") return {"N", "fixed-point iteration cap"};
    if (key == "out") return {"PATH", "output CSV (default stdout)"};
    return {"TEXT", ""};
}

}  // namespace detail

/// Applies one setting. Unknown keys and malformed values are errors. Each "integrator"
/// value may be a comma-separated list and is appended.
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    const std::string v = detail::trim(value);
    if (key == "system") cfg.system = v;
    else if (key == "b") cfg.params.b = detail::parse_double(key, v);
    else if (key == "k") cfg.params.k = detail::parse_double(key, v);
    else if (key == "mu") cfg.params.mu = detail::parse_double(key, v);
    else if (key == "alpha") cfg.params.alpha = detail::parse_double(key, v);
    else if (key == "beta") cfg.params.beta = detail::parse_double(key, v);
    else if (key == "integrator") {
        for (const auto& part : detail::split(v, ',')) cfg.integrators.push_back(parse_integrator(part));
    }
    else if (key == "q0") cfg.ics.q = detail::parse_double(key, v);
    else if (key == "p0") cfg.ics.p = detail::parse_double(key, v);
    else if (key == "w0") cfg.ics.w = detail::parse_double(key, v);
    else if (key == "h") cfg.h = detail::parse_double(key, v);
    else if (key == "h0") cfg.h0 = detail::parse_double(key, v);
    else if (key == "h-set") {
        cfg.h_set.clear();
        for (const auto& part : detail::split(v, ',')) cfg.h_set.push_back(detail::parse_double(key, part));
    }
    else if (key == "t-end") cfg.t_end = detail::parse_double(key, v);
    else if (key == "fp-tol") cfg.fp_tol = detail::parse_double(key, v);
    else if (key == "fp-max-iter") cfg.fp_max_iter = detail::parse_int(key, v);
    else if (key == "out") cfg.out = v;
    else throw ConfigError("unknown key '" + std::string(key) + "'");
}

/// `key = value` lines; blank lines and `#` comments are skipped.
[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    for (const auto& raw : detail::split(text, '\n')) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
        }
        out.emplace_back(detail::trim(std::string_view(line).substr(0, eq)),
                         detail::trim(std::string_view(line).substr(eq + 1)));
    }
    return out;
}

/// Renders every setting except the command in config-file form.
[[nodiscard]] inline std::string render(const RunConfig& cfg) {
    using detail::format_double;
    std::ostringstream os;
    os << "system = " << cfg.system << '\n'
       << "b = " << format_double(cfg.params.b) << '\n'
       << "k = " << format_double(cfg.params.k) << '\n'
       << "mu = " << format_double(cfg.params.mu) << '\n'
       << "alpha = " << format_double(cfg.params.alpha) << '\n'
       << "beta = " << format_double(cfg.params.beta) << '\n';
    for (const auto& i : cfg.integrators) os << "integrator = " << i.name() << '\n';
    os << "q0 = " << format_double(cfg.ics.q) << '\n'
       << "p0 = " << format_double(cfg.ics.p) << '\n'
       << "w0 = " << format_double(cfg.ics.w) << '\n'
       << "h = " << format_double(cfg.h) << '\n'
       << "h0 = " << format_double(cfg.h0) << '\n'
       << "h-set = ";
    for (std::size_t i = 0; i < cfg.h_set.size(); ++i) os << (i ? "," : "") << format_double(cfg.h_set[i]);
    os << '\n'
       << "t-end = " << format_double(cfg.t_end) << '\n'
       << "fp-tol = " << format_double(cfg.fp_tol) << '\n'
       << "fp-max-iter = " << cfg.fp_max_iter << '\n';
    if (!cfg.out.empty()) os << "out = " << cfg.out << '\n';
    return os.str();
}

/// Thrown when --help was requested; what() carries the usage text.
class HelpRequested : public Error {
public:
    using Error::Error;
};

/// Resolves a RunConfig from command-line arguments (without the program name) and an
/// optional config text. A `--config PATH` flag is read from disk when no text is given.
[[nodiscard]] inline RunConfig parse_config(std::vector<std::string> args,
                                            std::optional<std::string> file_text = std::nullopt) {
    CLI::App app{"Reservoir-variable integrators for dissipative oscillators", "resgrad"};
    app.set_help_flag("--help", "print this message and exit");
    std::string command;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> flag_values;
    std::vector<std::string> integrator_flags;

    app.add_option("command", command, "simulate | order | compare | exact")->required();
    app.add_option("--config", config_path, "config file with 'key = value' lines")->type_name("PATH");
    std::vector<std::pair<std::string, std::string>> scalar_storage(kConfigKeys.size());
    for (std::size_t i = 0; i < kConfigKeys.size(); ++i) {
        const auto& key = kConfigKeys[i];
        scalar_storage[i].first = key;
        if (key == "integrator") {
            app.add_option("--integrator", integrator_flags,
                           "moddg[:none|q3|q4|p3|p4] | pqplf | erk4 (repeatable)")
                ->delimiter(',')
                ->type_name("SCHEME");
        } else {
            const auto [type, text] = detail::option_help(key);
            app.add_option("--" + key, scalar_storage[i].second, text)->type_name(type);
        }
    }

    // CLI11 expects arguments in reverse order
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    RunConfig cfg;
    cfg.command = parse_command(command);
    cfg.integrators.clear();

    if (!file_text && !config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        file_text = ss.str();
    }
    if (file_text) {
        for (const auto& [key, value] : parse_config_text(*file_text)) apply_setting(cfg, key, value);
    }
    for (std::size_t i = 0; i < kConfigKeys.size(); ++i) {
        const auto& key = kConfigKeys[i];
        if (key == "integrator") continue;
        if (app.get_option("--" + key)->count() > 0) apply_setting(cfg, key, scalar_storage[i].second);
    }
    if (!integrator_flags.empty()) {
        cfg.integrators.clear();
        for (const auto& name : integrator_flags) cfg.integrators.push_back(parse_integrator(name));
    }
    if (cfg.integrators.empty()) cfg.integrators = default_integrators(cfg.command);
    cfg.validate();
    return cfg;
}

}  // namespace resgrad::cli
