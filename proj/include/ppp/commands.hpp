#ifndef PPP_COMMANDS_HPP
#define PPP_COMMANDS_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ppp/checks.hpp"
#include "ppp/config.hpp"
#include "ppp/errors.hpp"
#include "ppp/howard.hpp"
#include "ppp/montecarlo.hpp"

namespace ppp {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_no_convergence = 3,
    exit_verification = 4,
};

/// %.12g, the precision of every CSV field.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string solution_filename(double sigma) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "solution_%g.csv", sigma);
    return buf;
}

/// x,value,effort,rent,stopping for every node, boundaries included; stopping nodes carry zero controls.
inline std::string solution_csv(const SolveResult& result) {
    std::ostringstream out;
    out << "x,value,effort,rent,stopping\n";
    const std::size_t n = result.grid.n;
    for (std::size_t k = 0; k < n + 2; ++k) {
        const bool interior = k >= 1 && k <= n;
        const bool stop = result.stopping[k];
        const double a = interior && !stop ? result.policy.effort[k - 1] : 0.0;
        const double r = interior && !stop ? result.policy.rent[k - 1] : 0.0;
        out << format_number(result.x[k]) << ',' << format_number(static_cast<double>(result.value[k])) << ','
            << format_number(a) << ',' << format_number(r) << ',' << (stop ? 1 : 0) << '\n';
    }
    return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream file(path, std::ios::binary);
    file << content;
    if (!file) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

inline std::string describe_boundary(const FreeBoundary& fb) {
    std::string s = format_number(fb.location);
    if (fb.truncated) {
        s += " (no stopping node; truncated at x_max)";
    } else if (fb.degenerate) {
        s += " (every node stops)";
    }
    return s;
}

inline std::string solve_summary(double sigma, const SolveResult& result) {
    std::ostringstream out;
    out << "sigma = " << format_number(sigma) << '\n'
        << "  v(0) = " << format_number(static_cast<double>(result.value.front())) << '\n'
        << "  free boundary = " << describe_boundary(result.boundary) << '\n'
        << "  iterations = " << result.iterations << '\n'
        << "  residual = " << format_number(static_cast<double>(result.complementarity)) << '\n';
    return out.str();
}

inline int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
    SolveResult result;
    try {
        result = solve_hjbvi(config.solver_config());
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_no_convergence;
    }
    write_file(config.out_dir / solution_filename(config.model.sigma), solution_csv(result));
    out << solve_summary(config.model.sigma, result);
    return exit_ok;
}

inline int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<double> sigmas = config.sweep;
    std::sort(sigmas.begin(), sigmas.end());
    sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());

    std::vector<std::future<SolveResult>> jobs;
    for (double s : sigmas) {
        jobs.push_back(std::async(std::launch::async, [&config, s] { return solve_hjbvi(config.solver_config(s)); }));
    }
    std::ostringstream regions;
    regions << "sigma,boundary\n";
    int status = exit_ok;
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        try {
            const SolveResult result = jobs[k].get();
            write_file(config.out_dir / solution_filename(sigmas[k]), solution_csv(result));
            regions << format_number(sigmas[k]) << ',' << format_number(result.boundary.location) << '\n';
            out << solve_summary(sigmas[k], result);
        } catch (const ConvergenceError& e) {
            err << "error: sigma = " << format_number(sigmas[k]) << ": " << e.what() << '\n';
            status = exit_no_convergence;
        }
    }
    write_file(config.out_dir / "regions.csv", regions.str());
    return status;
}

inline int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const SolverConfig solver = config.solver_config();
    SolveResult result;
    try {
        result = solve_hjbvi(solver);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_no_convergence;
    }
    std::ostringstream report;
    report << "x0,pde_value,mc_mean,mc_se,tau_mean,censored_frac\n";
    int status = exit_ok;
    for (double x0 : config.x0) {
        const double pde = interpolate_value(result, x0);
        const SimResult mc = simulate_principal_value(result, config.sim_config(x0), solver.model);
        const bool agree = std::abs(mc.mean - pde) <= 3.0 * mc.standard_error + 0.05;
        if (!agree) {
            status = exit_verification;
        }
        if (mc.censoring_warning()) {
            err << "warning: x0 = " << format_number(x0) << ": " << format_number(100.0 * mc.censored_fraction)
                << "% of paths censored at the horizon\n";
        }
        report << format_number(x0) << ',' << format_number(pde) << ',' << format_number(mc.mean) << ','
               << format_number(mc.standard_error) << ',' << format_number(mc.mean_stopping_time) << ','
               << format_number(mc.censored_fraction) << '\n';
        out << "x0 = " << format_number(x0) << "  pde = " << format_number(pde) << "  mc = " << format_number(mc.mean)
            << " +- " << format_number(mc.standard_error) << (agree ? "  ok" : "  MISMATCH") << '\n';
    }
    write_file(config.out_dir / "mc_report.csv", report.str());
    return status;
}

struct CheckLine {
    std::string name;
    bool pass;
    std::string detail;
};

inline int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<CheckLine> lines;
    SolverConfig solver = config.solver_config();
    const ContractModel& model = solver.model;

    const double rent = optimal_rent(-1.0, model);
    lines.push_back({"optimal rent at slope -1", std::abs(rent - std::pow(0.375, 4.0)) <= 1e-12,
                     format_number(rent)});

    const double round_trip = effort_round_trip_error(model, log_effort_grid());
    lines.push_back({"effort round trip", round_trip <= 1e-10, "max error " + format_number(round_trip)});

    const double threshold = model.effort_threshold();
    const bool threshold_ok = best_effort_from_sensitivity(threshold, model) == 0.0 &&
                              best_effort_from_sensitivity(0.5 * threshold, model) == 0.0 &&
                              best_effort_from_sensitivity(threshold * (1.0 + 1e-6), model) > 0.0;
    lines.push_back({"effort threshold", threshold_ok, "z0 = " + format_number(threshold)});

    const OracleError coarse = zero_policy_oracle_error(model, solver.x_max, solver.dx);
    const OracleError fine = zero_policy_oracle_error(model, solver.x_max, 0.5 * solver.dx);
    const OracleError doubled = zero_policy_oracle_error(model, solver.x_max, 2.0 * solver.dx);
    const double ratio = coarse.max_error / fine.max_error;
    lines.push_back({"ODE oracle", coarse.max_error <= 5e-2 && ratio >= 1.5,
                     "error " + format_number(coarse.max_error) + ", dx/2 " + format_number(fine.max_error) +
                         ", 2dx " + format_number(doubled.max_error)});

    MatrixAudit audit(model.params().delta_principal);
    solver.on_assemble = [&audit](const TridiagonalSystem& sys) { audit(sys); };
    SolveResult result;
    try {
        result = solve_hjbvi(solver);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return exit_no_convergence;
    }
    lines.push_back({"M-matrix audit", audit.ok(),
                     std::to_string(audit.systems()) + " systems, row-sum error " +
                         format_number(audit.worst_row_sum_error())});
    const double residual = static_cast<double>(result.complementarity);
    lines.push_back({"complementarity", residual <= 1e-8, format_number(residual)});
    const double obstacle = obstacle_violation(result);
    lines.push_back({"obstacle", obstacle <= 1e-12, format_number(obstacle)});

    // a cheaper Monte Carlo than cmd_simulate: the check is about sign, not precision
    SimConfig sim = config.sim_config(config.x0.empty() ? 1.0 : config.x0.front());
    sim.paths = std::min<std::size_t>(sim.paths, 10000);
    if (interpolate_policy(result, sim.x0).continuation) {
        const double scales[] = {0.0, 0.5, 1.0, 1.5, 2.0};
        const IncentiveReport ic = incentive_check(result, sim, model, scales);
        const auto one = std::find_if(ic.rows.begin(), ic.rows.end(), [](const auto& r) { return r.scale == 1.0; });
        const bool consistent = std::abs(one->estimate.mean - sim.x0) <= 3.0 * one->estimate.standard_error + 0.05;
        lines.push_back({"agent self-consistency", consistent,
                         "x0 " + format_number(sim.x0) + ", estimate " + format_number(one->estimate.mean)});
        lines.push_back({"incentive compatibility", ic.scale_one_optimal,
                         "best scale " + format_number(ic.best_scale)});
    } else {
        lines.push_back({"incentive compatibility", true, "x0 in stopping region, skipped"});
    }

    bool all = true;
    for (const auto& line : lines) {
        all = all && line.pass;
        out << (line.pass ? "PASS  " : "FAIL  ") << line.name << "  (" << line.detail << ")\n";
    }

    // advisory only: a best response should leave the agent U(r) - h(a) >= 0
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.grid.n; ++i) {
        if (!result.stopping[i + 1]) {
            slack = std::min(slack, model.utility()(result.policy.rent[i]) - model.cost()(result.policy.effort[i]));
        }
    }
    if (slack < -1e-8) {
        out << "WARN  agent flow U(r) - h(a)  (min " << format_number(slack) << " on continuation nodes)\n";
    }
    return all ? exit_ok : exit_verification;
}

inline int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
    switch (config.command) {
    case Command::solve:
        return cmd_solve(config, out, err);
    case Command::sweep:
        return cmd_sweep(config, out, err);
    case Command::simulate:
        return cmd_simulate(config, out, err);
    case Command::check:
        return cmd_check(config, out, err);
    case Command::none:
        break;
    }
    err << "error: no command given\n";
    return exit_config;
}

}  // namespace ppp

#endif  // PPP_COMMANDS_HPP
