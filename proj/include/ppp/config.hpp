#ifndef PPP_CONFIG_HPP
#define PPP_CONFIG_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ppp/errors.hpp"
#include "ppp/howard.hpp"
#include "ppp/model.hpp"
#include "ppp/montecarlo.hpp"

namespace ppp {

enum class Command { none, solve, sweep, simulate, check };

inline std::optional<Command> parse_command(const std::string& name) {
    if (name == "solve") return Command::solve;
    if (name == "sweep") return Command::sweep;
    if (name == "simulate") return Command::simulate;
    if (name == "check") return Command::check;
    return std::nullopt;
}

/// Everything one CLI invocation needs.
struct RunConfig {
    Command command = Command::none;
    ModelParams model;

    double x_max = 10.0;
    double dx = 0.01;
    double tolerance = 1e-9;
    int max_iterations = 200;
    double effort_max = 100.0;
    int effort_points = 512;
    int refinement_passes = 3;

    std::size_t paths = 100000;
    double dt = 1e-3;
    double horizon = 400.0;
    std::uint64_t seed = 20240601;
    unsigned workers = 0;
    std::vector<double> x0 = {0.5, 1.0, 2.0, 3.0};

    std::vector<double> sweep = {1.2, 1.65, 2.2};
    std::filesystem::path out_dir = ".";

    SolverConfig solver_config() const { return solver_config(model.sigma); }

    SolverConfig solver_config(double sigma) const {
        ModelParams p = model;
        p.sigma = sigma;
        SolverConfig c;
        c.x_max = x_max;
        c.dx = dx;
        c.tolerance = tolerance;
        c.max_iterations = max_iterations;
        c.effort_max = effort_max;
        c.effort_points = effort_points;
        c.refinement_passes = refinement_passes;
        c.model = ContractModel::exponential(p);
        return c;
    }

    SimConfig sim_config(double start) const {
        SimConfig s;
        s.x0 = start;
        s.paths = paths;
        s.dt = dt;
        s.horizon = horizon;
        s.seed = seed;
        s.workers = workers;
        return s;
    }

    /// Throws ConfigError on the first violated constraint.
    void validate() const {
        try {
            model.validate();
            solver_config().validate();
            for (double s : sweep) {
                ModelParams p = model;
                p.sigma = s;
                p.validate();
            }
            for (double start : x0) {
                sim_config(start).validate(x_max);
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (command == Command::sweep && sweep.empty()) {
            throw ConfigError("sweep list must not be empty");
        }
        if (command == Command::simulate && x0.empty()) {
            throw ConfigError("x0 list must not be empty");
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
    T value{};
    const std::string t = trim(text);
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is incomplete in some standard libraries
        std::istringstream in(t);
        in >> value;
        if (in.fail() || !in.eof()) {
            throw ConfigError("invalid number for '" + key + "': '" + t + "'");
        }
    } else {
        const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
            throw ConfigError("invalid integer for '" + key + "': '" + t + "'");
        }
    }
    return value;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        out.push_back(parse_number<double>(item, key));
    }
    return out;
}

/// Returns false for an unknown key.
inline bool assign(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "command") {
        const auto cmd = parse_command(trim(value));
        if (!cmd) {
            throw ConfigError("unknown command '" + trim(value) + "'");
        }
        c.command = *cmd;
    } else if (key == "alpha") {
        c.model.alpha = parse_number<double>(value, key);
    } else if (key == "beta") {
        c.model.beta = parse_number<double>(value, key);
    } else if (key == "lambda") {
        c.model.lambda_agent = parse_number<double>(value, key);
    } else if (key == "delta") {
        c.model.delta_principal = parse_number<double>(value, key);
    } else if (key == "sigma") {
        c.model.sigma = parse_number<double>(value, key);
    } else if (key == "reservation") {
        c.model.reservation = parse_number<double>(value, key);
    } else if (key == "rho") {
        c.model.rho = parse_number<double>(value, key);
    } else if (key == "xmax") {
        c.x_max = parse_number<double>(value, key);
    } else if (key == "dx") {
        c.dx = parse_number<double>(value, key);
    } else if (key == "eps") {
        c.tolerance = parse_number<double>(value, key);
    } else if (key == "max_iter") {
        c.max_iterations = parse_number<int>(value, key);
    } else if (key == "amax") {
        c.effort_max = parse_number<double>(value, key);
    } else if (key == "na") {
        c.effort_points = parse_number<int>(value, key);
    } else if (key == "refine") {
        c.refinement_passes = parse_number<int>(value, key);
    } else if (key == "paths") {
        c.paths = parse_number<std::size_t>(value, key);
    } else if (key == "dt") {
        c.dt = parse_number<double>(value, key);
    } else if (key == "tmax") {
        c.horizon = parse_number<double>(value, key);
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "workers") {
        c.workers = parse_number<unsigned>(value, key);
    } else if (key == "x0") {
        c.x0 = parse_list(value, key);
    } else if (key == "sweep") {
        c.sweep = parse_list(value, key);
    } else if (key == "out") {
        c.out_dir = trim(value);
    } else {
        return false;
    }
    return true;
}

}  // namespace detail

using Overrides = std::vector<std::pair<std::string, std::string>>;

/**
 * Read `key = value` lines (`#` starts a comment), then apply overrides in order.
 * Errors name the offending line. The result is not validated.
 */
inline RunConfig parse_config(std::istream& text, const Overrides& overrides = {}) {
    RunConfig c;
    std::string line;
    int number = 0;
    while (std::getline(text, line)) {
        ++number;
        const std::string content = detail::trim(line.substr(0, line.find('#')));
        if (content.empty()) {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(content.substr(0, eq));
        try {
            if (!detail::assign(c, key, content.substr(eq + 1))) {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    for (const auto& [key, value] : overrides) {
        if (!detail::assign(c, key, value)) {
            throw ConfigError("unknown option '" + key + "'");
        }
    }
    return c;
}

inline RunConfig load_config(const std::optional<std::filesystem::path>& path, const Overrides& overrides = {}) {
    if (!path) {
        std::istringstream empty;
        return parse_config(empty, overrides);
    }
    std::ifstream file(*path);
    if (!file) {
        throw ConfigError("cannot open config file " + path->string());
    }
    return parse_config(file, overrides);
}

}  // namespace ppp

#endif  // PPP_CONFIG_HPP
