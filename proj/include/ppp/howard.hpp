#ifndef PPP_HOWARD_HPP
#define PPP_HOWARD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ppp/discretization.hpp"
#include "ppp/errors.hpp"
#include "ppp/model.hpp"

namespace ppp {

/// Settings for the obstacle-problem policy iteration.
struct SolverConfig {
    double x_max = 10.0;
    double dx = 0.01;
    double tolerance = 1e-9;  ///< sup-norm change between value iterates
    int max_iterations = 200;
    double effort_max = 100.0;
    int effort_points = 512;
    int refinement_passes = 3;
    ContractModel model = ContractModel::exponential({});
    /// Called with every system produced by assemble_system during the solve.
    std::function<void(const TridiagonalSystem&)> on_assemble;

    void validate() const {
        model.params().validate();
        if (!(tolerance > 0.0)) {
            throw ModelError("tolerance must be positive");
        }
        if (!(effort_max > 0.0) || effort_points < 2 || refinement_passes < 0) {
            throw ModelError("effort search needs a_max > 0, n_a >= 2 and nonnegative refinement passes");
        }
        if (max_iterations < 1) {
            throw ModelError("max_iterations must be at least 1");
        }
        if (!(x_max > 0.0) || !(dx > 0.0)) {
            throw ModelError("grid needs positive x_max and dx");
        }
    }
};

struct FreeBoundary {
    double location = 0.0;
    bool truncated = false;   ///< no interior node stops; location is x_max
    bool degenerate = false;  ///< every interior node stops
};

struct SolveResult {
    Grid grid;
    std::vector<double> x;      ///< n + 2 nodes, boundaries included
    std::vector<Real> value;    ///< n + 2 values, value[0] = v(0), value[n+1] = -x_max
    PolicyField policy;         ///< interior minimizers from the last improvement step
    std::vector<bool> stopping; ///< n + 2 flags; true where v = -x
    FreeBoundary boundary;
    int iterations = 0;
    double last_change = 0.0;
    Real complementarity = 0.0L;  ///< max_i |min(H_i, v_i + x_i)| at the returned policy

    std::span<const Real> interior() const { return std::span<const Real>(value).subspan(1, grid.n); }
    DirichletData dirichlet() const { return {value.front(), value.back()}; }
};

namespace detail {

inline DirichletData dirichlet_of(std::span<const Real> v_full) { return {v_full.front(), v_full.back()}; }

struct ControlChoice {
    double effort;
    double rent;
    Real residual;
};

/**
 * Pointwise minimization of the discrete Hamiltonian over (a, r).
 *
 * For a fixed effort the residual is convex in r on each upwind branch
 * (U concave, slope estimate negative), and the branch switches where
 * U(r) = lambda x + h(a). The exact minimizer is therefore the unconstrained
 * closed-form rent of each branch clamped into that branch's rent interval.
 */
class PolicySearch {
public:
    PolicySearch(const Grid& grid, const SolverConfig& config) : grid_(grid), config_(config) {
        const int na = config.effort_points;
        step_ = config.effort_max / static_cast<double>(na - 1);
        table_.reserve(static_cast<std::size_t>(na));
        for (int k = 0; k < na; ++k) {
            const double a = k + 1 == na ? config.effort_max : step_ * k;
            table_.push_back({a, config.model.effort_terms(a)});
        }
    }

    ControlChoice minimize(std::size_t i, std::span<const Real> v_full) const {
        const Real left = v_full[i];
        const Real mid = v_full[i + 1];
        const Real right = v_full[i + 2];
        const double x = grid_.node(i);
        const ContractModel& model = config_.model;
        const double rent_forward = optimal_rent(static_cast<double>((right - mid) / grid_.delta), model);
        const double rent_backward = optimal_rent(static_cast<double>((mid - left) / grid_.delta), model);

        ControlChoice best{0.0, 0.0, std::numeric_limits<Real>::infinity()};
        auto consider = [&](double a, const EffortTerms& terms) {
            const double kink = model.utility().invert(model.params().lambda_agent * x + terms.cost);
            const double candidates[2] = {std::min(rent_forward, kink), std::max(rent_backward, kink)};
            for (double r : candidates) {
                const Real h = hamiltonian_row(left, mid, right, x, terms, r, model.utility()(r),
                                                 model.params().lambda_agent, model.params().delta_principal,
                                                 grid_.delta);
                // strict comparison keeps the smaller effort, then the smaller rent, on ties
                if (h < best.residual) {
                    best = {a, r, h};
                }
            }
        };
        for (const auto& entry : table_) {
            consider(entry.effort, entry.terms);
        }
        double width = step_;
        for (int pass = 0; pass < config_.refinement_passes; ++pass) {
            width *= 0.5;
            const double centre = best.effort;
            for (double a : {centre - width, centre + width}) {
                if (a >= 0.0 && a <= config_.effort_max) {
                    consider(a, model.effort_terms(a));
                }
            }
        }
        return best;
    }

private:
    struct Entry {
        double effort;
        EffortTerms terms;
    };

    const Grid& grid_;
    const SolverConfig& config_;
    double step_;
    std::vector<Entry> table_;
};

inline Real node_residual(std::size_t i, std::span<const Real> v_full, double a, double r, const Grid& grid,
                            const ContractModel& model) {
    return discrete_hamiltonian(i, v_full.subspan(1, grid.n), a, r, grid, model, dirichlet_of(v_full));
}

}  // namespace detail

/**
 * Policy improvement: per node, the (a, r) minimizing the discrete Hamiltonian.
 * `v` carries the boundary values at both ends (size n + 2).
 */
inline PolicyField improve_policy(std::span<const Real> v, const Grid& grid, const SolverConfig& config) {
    if (v.size() != grid.n + 2) {
        throw std::invalid_argument("value vector must include both boundary values");
    }
    const detail::PolicySearch search(grid, config);
    PolicyField policy = PolicyField::zeros(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const detail::ControlChoice choice = search.minimize(i, v);
        // (0, 0) is always a finite candidate, so an infinite residual means a broken model
        if (!std::isfinite(choice.residual)) {
            throw ModelError("no admissible control at node " + std::to_string(i));
        }
        policy.effort[i] = choice.effort;
        policy.rent[i] = choice.rent;
    }
    return policy;
}

/// Stopping set: node i stops when H_i(v, a_i, r_i) > v_i + x_i. Returns interior flags.
inline std::vector<bool> partition_regions(std::span<const Real> v, const PolicyField& policy, const Grid& grid,
                                           const ContractModel& model) {
    std::vector<bool> stopping(grid.n, false);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const Real h = detail::node_residual(i, v, policy.effort[i], policy.rent[i], grid, model);
        stopping[i] = h > v[i + 1] + grid.node(i);
    }
    return stopping;
}

/**
 * Policy evaluation with the obstacle spliced in: continuation rows come from
 * assemble_system, stopping rows are replaced by v_i = -x_i. Returns n + 2 values.
 */
inline std::vector<Real> evaluate_policy(const PolicyField& policy, const std::vector<bool>& stopping,
                                           const Grid& grid, const ContractModel& model, DirichletData boundary,
                                           const std::function<void(const TridiagonalSystem&)>& on_assemble = {}) {
    if (stopping.size() != grid.n) {
        throw std::invalid_argument("partition size does not match grid");
    }
    TridiagonalSystem sys = assemble_system(grid, policy, model, boundary);
    if (on_assemble) {
        on_assemble(sys);
    }
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (!stopping[i]) {
            continue;
        }
        sys.lower[i] = 0.0;
        sys.upper[i] = 0.0;
        sys.diag[i] = 1.0;
        sys.rhs[i] = -grid.node(i);
    }
    const std::vector<Real> interior = solve_tridiagonal(sys);
    std::vector<Real> v;
    v.reserve(grid.n + 2);
    v.push_back(boundary.left);
    v.insert(v.end(), interior.begin(), interior.end());
    v.push_back(boundary.right);
    return v;
}

/// Free boundary at the midpoint after the last continuation node.
inline FreeBoundary extract_free_boundary(const SolveResult& result) {
    const Grid& g = result.grid;
    std::size_t last = g.n + 2;  // sentinel: none
    for (std::size_t k = 0; k <= g.n; ++k) {
        if (result.value[k] > -static_cast<Real>(result.x[k]) + 1e-12L) {
            last = k;
        }
    }
    FreeBoundary fb;
    if (last == g.n + 2 || last == 0) {
        fb.location = 0.5 * g.delta;
        fb.degenerate = true;
    } else if (last == g.n) {
        fb.location = g.x_max;
        fb.truncated = true;
    } else {
        fb.location = result.x[last] + 0.5 * g.delta;
    }
    return fb;
}

/// max_i |min(H_i(v, a_i, r_i), v_i + x_i)| over interior nodes.
inline Real complementarity_residual(std::span<const Real> v, const PolicyField& policy, const Grid& grid,
                                       const ContractModel& model) {
    Real worst = 0.0L;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const Real h = detail::node_residual(i, v, policy.effort[i], policy.rent[i], grid, model);
        worst = std::max(worst, std::abs(std::min(h, v[i + 1] + grid.node(i))));
    }
    return worst;
}

/**
 * Solve min{ inf_{a,r} H(v; a, r), v + x } = 0 on [0, x_max] by Howard iteration.
 *
 * Starts from the no-effort, no-stopping policy, then alternates improvement,
 * partition and evaluation until the sup-norm change is at most the tolerance.
 * Throws ConvergenceError at the iteration cap.
 */
inline SolveResult solve_hjbvi(const SolverConfig& config) {
    config.validate();
    const ContractModel& model = config.model;
    const Grid grid = Grid::uniform(config.x_max, config.dx);
    const DirichletData boundary{boundary_value(model), -grid.x_max};

    PolicyField policy = PolicyField::zeros(grid.n);
    std::vector<Real> v =
        evaluate_policy(policy, std::vector<bool>(grid.n, false), grid, model, boundary, config.on_assemble);

    int iterations = 0;
    double change = std::numeric_limits<double>::infinity();
    while (iterations < config.max_iterations) {
        ++iterations;
        policy = improve_policy(v, grid, config);
        const std::vector<bool> stopping = partition_regions(v, policy, grid, model);
        std::vector<Real> next = evaluate_policy(policy, stopping, grid, model, boundary, config.on_assemble);
        change = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            change = std::max(change, static_cast<double>(std::abs(next[k] - v[k])));
        }
        v = std::move(next);
        if (change <= config.tolerance) {
            break;
        }
    }
    if (change > config.tolerance) {
        throw ConvergenceError("policy iteration did not converge in " + std::to_string(iterations) +
                                   " iterations (last change " + std::to_string(change) + ")",
                               iterations, change);
    }

    SolveResult result;
    result.grid = grid;
    result.x.resize(grid.n + 2);
    for (std::size_t k = 0; k < grid.n + 2; ++k) {
        result.x[k] = grid.position(k);
    }
    result.value = std::move(v);
    result.policy = std::move(policy);
    result.stopping.assign(grid.n + 2, false);
    for (std::size_t k = 0; k < grid.n + 2; ++k) {
        result.stopping[k] = std::abs(result.value[k] + result.x[k]) <= 1e-12L;
    }
    result.iterations = iterations;
    result.last_change = change;
    result.complementarity = complementarity_residual(result.value, result.policy, grid, model);
    result.boundary = extract_free_boundary(result);
    return result;
}

}  // namespace ppp

#endif  // PPP_HOWARD_HPP
