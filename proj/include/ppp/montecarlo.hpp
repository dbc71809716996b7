#ifndef PPP_MONTECARLO_HPP
#define PPP_MONTECARLO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ppp/howard.hpp"
#include "ppp/model.hpp"

namespace ppp {

/**
 * Monte Carlo verification of a solved contract.
 *
 * Paths are simulated directly under the agent's optimal measure. Under P the
 * continuation value follows
 *   dJ = (lambda J - U(r) + h(a) - Z phi(a)/sigma) dt + Z dW,
 * and W = W^A + int phi(A)/sigma dt for the effort A actually exerted, so with
 * Z = s(a) the phi terms cancel when A = a and only the deviation
 * s(a) (phi(A) - phi(a)) / sigma survives otherwise. No likelihood-ratio
 * weights are needed.
 */

/// What a path collects once the state reaches 0.
enum class AbsorptionRule {
    boundary_value,    ///< principal receives e^{-delta t} v(0), the Dirichlet datum of the solve
    hold_zero_policy,  ///< a = r = 0 held until the horizon, which pays nothing
};

struct SimConfig {
    double x0 = 1.0;
    std::size_t paths = 100000;
    double dt = 1e-3;
    double horizon = 400.0;  ///< T_max; paths still running are censored
    std::uint64_t seed = 20240601;
    unsigned workers = 0;  ///< 0 = hardware concurrency
    AbsorptionRule absorption = AbsorptionRule::boundary_value;

    void validate(double x_max) const {
        if (!(dt > 0.0) || paths < 1 || !(horizon > 0.0)) {
            throw std::invalid_argument("simulation needs dt > 0, paths >= 1 and a positive horizon");
        }
        if (!(x0 >= 0.0) || x0 > x_max) {
            throw std::invalid_argument("initial state must lie in [0, x_max]");
        }
    }
};

struct SimResult {
    double mean = 0.0;
    double standard_error = 0.0;
    double mean_stopping_time = 0.0;
    double censored_fraction = 0.0;
    double absorbed_fraction = 0.0;
    std::size_t paths = 0;

    /// More than 5% of paths reached the horizon; the estimate is not reliable.
    bool censoring_warning() const { return censored_fraction > 0.05; }
};

struct PolicySample {
    double effort;
    double rent;
    bool continuation;
};

/// Piecewise-linear policy between nodes, flat beyond the outermost interior nodes.
inline PolicySample interpolate_policy(const SolveResult& result, double x) {
    const Grid& g = result.grid;
    const std::size_t n = g.n;
    auto at = [&](std::size_t k, const std::vector<double>& field) {
        // full-grid index k: boundaries reuse the adjacent interior node
        const std::size_t i = k == 0 ? 0 : std::min(k - 1, n - 1);
        return field[i];
    };
    const double clamped = std::clamp(x, 0.0, g.x_max);
    auto k = static_cast<std::size_t>(clamped / g.delta);
    k = std::min(k, n);
    const double w = std::clamp((clamped - g.position(k)) / g.delta, 0.0, 1.0);
    const double a = (1.0 - w) * at(k, result.policy.effort) + w * at(k + 1, result.policy.effort);
    const double r = (1.0 - w) * at(k, result.policy.rent) + w * at(k + 1, result.policy.rent);
    return {a, r, x < result.boundary.location};
}

/// Linear interpolation of the solved value function.
inline double interpolate_value(const SolveResult& result, double x) {
    const Grid& g = result.grid;
    const double clamped = std::clamp(x, 0.0, g.x_max);
    auto k = static_cast<std::size_t>(clamped / g.delta);
    k = std::min(k, g.n);
    const double w = std::clamp((clamped - g.position(k)) / g.delta, 0.0, 1.0);
    return static_cast<double>((1.0L - w) * result.value[k] + w * result.value[k + 1]);
}

/// Sum in a fixed binary-tree order, independent of how the terms were produced.
inline double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent stream for one path; depends only on (seed, path index).
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632BE59BD9B4E019ULL)));
}

struct PathOutcome {
    double payoff = 0.0;
    double stopping_time = 0.0;
    bool censored = false;
    bool absorbed = false;
};

/// Where a path ends after one Euler step.
enum class StepExit { none, absorbed, stopped };

/**
 * First-exit test for one Euler step from `from` to `to` with local variance
 * `variance`: endpoint outside (0, upper) or, for endpoints inside, a crossing of
 * the Brownian bridge between them, with probability exp(-2 d_from d_to / variance).
 * Monitoring only at step ends misses most exits when s(a) sqrt(dt) is a sizeable
 * fraction of the domain.
 */
inline StepExit classify_step(double from, double to, double upper, double variance, double uniform) {
    if (to <= 0.0) {
        return StepExit::absorbed;
    }
    if (to >= upper) {
        return StepExit::stopped;
    }
    if (variance <= 0.0) {
        return StepExit::none;
    }
    const double p_low = std::exp(-2.0 * from * to / variance);
    const double p_high = std::exp(-2.0 * (upper - from) * (upper - to) / variance);
    if (uniform < p_low) {
        return StepExit::absorbed;
    }
    if (uniform < p_low + p_high) {
        return StepExit::stopped;
    }
    return StepExit::none;
}

template <typename PathFn>
SimResult run_paths(const SimConfig& sim, PathFn&& simulate_path) {
    const std::size_t n = sim.paths;
    std::vector<double> payoff(n);
    std::vector<double> tau(n);
    std::vector<unsigned char> censored(n);
    std::vector<unsigned char> absorbed(n);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            std::mt19937_64 engine = path_engine(sim.seed, p);
            const PathOutcome out = simulate_path(engine);
            payoff[p] = out.payoff;
            tau[p] = out.stopping_time;
            censored[p] = out.censored;
            absorbed[p] = out.absorbed;
        }
    };
    unsigned workers = sim.workers != 0 ? sim.workers : std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin < end) {
                pool.emplace_back(work, begin, end);
            }
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    SimResult res;
    res.paths = n;
    const double count = static_cast<double>(n);
    res.mean = pairwise_sum(payoff) / count;
    std::vector<double> sq(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double d = payoff[p] - res.mean;
        sq[p] = d * d;
    }
    res.standard_error = n > 1 ? std::sqrt(pairwise_sum(sq) / (count - 1.0) / count) : 0.0;
    res.mean_stopping_time = pairwise_sum(tau) / count;
    std::size_t n_censored = 0;
    std::size_t n_absorbed = 0;
    for (std::size_t p = 0; p < n; ++p) {
        n_censored += censored[p];
        n_absorbed += absorbed[p];
    }
    res.censored_fraction = static_cast<double>(n_censored) / count;
    res.absorbed_fraction = static_cast<double>(n_absorbed) / count;
    return res;
}

}  // namespace detail

namespace detail {

struct PathEnd {
    double flow = 0.0;      ///< discounted running payoff
    double discount = 1.0;  ///< discount factor at the end time
    double time = 0.0;
    double state = 0.0;     ///< J at the end: 0 if absorbed, the boundary if stopped
    StepExit exit = StepExit::none;  ///< none means censored at the horizon
};

/**
 * One Euler-Maruyama path under effort effort_scale * a(J), accumulating
 * e^{-rate t} flow(utility, recommended, exerted, rent) dt until absorption at 0,
 * exit through the free boundary or the horizon.
 */
template <typename Flow>
PathEnd walk_path(const SolveResult& result, const SimConfig& sim, const ContractModel& model, double effort_scale,
                  double rate, std::mt19937_64& engine, Flow&& flow) {
    const ModelParams& p = model.params();
    const double upper = std::min(result.boundary.location, result.grid.x_max);
    const double step_discount = std::exp(-rate * sim.dt);
    const double sqrt_dt = std::sqrt(sim.dt);
    const auto steps = static_cast<std::size_t>(std::ceil(sim.horizon / sim.dt - 1e-9));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    PathEnd end;
    double j = sim.x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const PolicySample pol = interpolate_policy(result, j);
        const EffortTerms recommended = model.effort_terms(pol.effort);
        const EffortTerms exerted =
            effort_scale == 1.0 ? recommended : model.effort_terms(effort_scale * pol.effort);
        const double utility = model.utility()(pol.rent);
        const double mu = p.lambda_agent * j - utility + recommended.cost -
                          recommended.volatility * (recommended.impact - exerted.impact) / p.sigma;
        end.flow += end.discount * flow(utility, recommended, exerted, pol.rent) * sim.dt;
        const double next = j + mu * sim.dt + recommended.volatility * sqrt_dt * normal(engine);
        const double variance = recommended.volatility * recommended.volatility * sim.dt;
        const StepExit exit = classify_step(j, next, upper, variance, uniform(engine));
        end.time += sim.dt;
        end.discount *= step_discount;
        if (exit != StepExit::none) {
            end.exit = exit;
            end.state = exit == StepExit::absorbed ? 0.0 : upper;
            return end;
        }
        j = next;
    }
    end.state = j;
    return end;
}

}  // namespace detail

/**
 * Principal's realized payoff under the solved feedback policy:
 * int e^{-delta t} (phi(a) - r) dt - e^{-delta tau} J_tau.
 */
inline SimResult simulate_principal_value(const SolveResult& result, const SimConfig& sim,
                                          const ContractModel& model) {
    sim.validate(result.grid.x_max);
    const double v0 = static_cast<double>(result.value.front());
    return detail::run_paths(sim, [&](std::mt19937_64& engine) {
        detail::PathOutcome out;
        if (!interpolate_policy(result, sim.x0).continuation) {
            out.payoff = -sim.x0;
            return out;
        }
        if (sim.x0 <= 0.0) {
            out.absorbed = true;
            out.payoff = sim.absorption == AbsorptionRule::boundary_value ? v0 : 0.0;
            return out;
        }
        const detail::PathEnd end = detail::walk_path(
            result, sim, model, 1.0, model.params().delta_principal, engine,
            [](double, const EffortTerms& terms, const EffortTerms&, double rent) { return terms.impact - rent; });
        out.payoff = end.flow;
        out.stopping_time = end.time;
        switch (end.exit) {
        case detail::StepExit::absorbed:
            out.absorbed = true;
            if (sim.absorption == AbsorptionRule::boundary_value) {
                out.payoff += end.discount * v0;
            }
            break;
        case detail::StepExit::stopped:
            out.payoff -= end.discount * end.state;
            break;
        case detail::StepExit::none:
            out.censored = true;
            out.payoff -= end.discount * end.state;
            break;
        }
        return out;
    });
}

/**
 * Agent's realized payoff when exerting effort_scale * a(J) instead of a(J):
 * int e^{-lambda t} (U(r) - h(A)) dt + e^{-lambda tau} J_tau.
 * At effort_scale = 1 this is a martingale estimate of x0.
 */
inline SimResult simulate_agent_value(const SolveResult& result, const SimConfig& sim, const ContractModel& model,
                                      double effort_scale) {
    if (!(effort_scale >= 0.0)) {
        throw std::invalid_argument("effort scale must be nonnegative");
    }
    sim.validate(result.grid.x_max);
    return detail::run_paths(sim, [&](std::mt19937_64& engine) {
        detail::PathOutcome out;
        if (!interpolate_policy(result, sim.x0).continuation) {
            out.payoff = sim.x0;
            return out;
        }
        if (sim.x0 <= 0.0) {
            out.absorbed = true;
            return out;
        }
        const detail::PathEnd end = detail::walk_path(
            result, sim, model, effort_scale, model.params().lambda_agent, engine,
            [](double utility, const EffortTerms&, const EffortTerms& exerted, double) {
                return utility - exerted.cost;
            });
        // absorption at 0 leaves the agent nothing further
        out.payoff = end.flow + end.discount * end.state;
        out.stopping_time = end.time;
        out.absorbed = end.exit == detail::StepExit::absorbed;
        out.censored = end.exit == detail::StepExit::none;
        return out;
    });
}

struct ScaleEstimate {
    double scale;
    SimResult estimate;
};

struct IncentiveReport {
    std::vector<ScaleEstimate> rows;
    double best_scale = 1.0;    ///< scale with the largest estimated agent value
    bool scale_one_optimal = true;  ///< no scale beats 1 by more than 3 combined standard errors
};

/// Agent value across effort multipliers, all sharing the same random streams.
inline IncentiveReport incentive_check(const SolveResult& result, const SimConfig& sim, const ContractModel& model,
                                       std::span<const double> scales) {
    if (std::find(scales.begin(), scales.end(), 1.0) == scales.end()) {
        throw std::invalid_argument("incentive check needs scale 1 among the multipliers");
    }
    IncentiveReport report;
    for (double s : scales) {
        report.rows.push_back({s, simulate_agent_value(result, sim, model, s)});
    }
    const auto one = std::find_if(report.rows.begin(), report.rows.end(), [](const auto& r) { return r.scale == 1.0; });
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& row : report.rows) {
        if (row.estimate.mean > best) {
            best = row.estimate.mean;
            report.best_scale = row.scale;
        }
        const double combined = std::hypot(row.estimate.standard_error, one->estimate.standard_error);
        if (row.estimate.mean > one->estimate.mean + 3.0 * combined) {
            report.scale_one_optimal = false;
        }
    }
    return report;
}

}  // namespace ppp

#endif  // PPP_MONTECARLO_HPP
