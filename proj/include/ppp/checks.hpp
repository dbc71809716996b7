#ifndef PPP_CHECKS_HPP
#define PPP_CHECKS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ppp/discretization.hpp"
#include "ppp/howard.hpp"
#include "ppp/model.hpp"

namespace ppp {

/**
 * Accumulates M-matrix diagnostics over every system it is shown: positive
 * diagonal, nonpositive off-diagonals, full-stencil row sums equal to delta.
 * Plug into SolverConfig::on_assemble.
 */
class MatrixAudit {
public:
    explicit MatrixAudit(double discount) : discount_(discount) {}

    void operator()(const TridiagonalSystem& sys) {
        ++systems_;
        const std::size_t n = sys.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Real lower = i == 0 ? sys.left_coupling : sys.lower[i];
            const Real upper = i + 1 == n ? sys.right_coupling : sys.upper[i];
            if (!(sys.diag[i] > 0.0L) || lower > 0.0L || upper > 0.0L) {
                ++violations_;
            }
            const Real sum = lower + sys.diag[i] + upper;
            const Real scale = std::max<Real>(1.0L, sys.diag[i]);
            const double err = static_cast<double>(std::abs(sum - discount_) / scale);
            worst_row_sum_ = std::max(worst_row_sum_, err);
            if (err > 1e-12) {
                ++violations_;
            }
        }
    }

    std::size_t systems() const noexcept { return systems_; }
    std::size_t violations() const noexcept { return violations_; }
    /// Largest |row sum - delta| relative to max(1, diagonal).
    double worst_row_sum_error() const noexcept { return worst_row_sum_; }
    bool ok() const noexcept { return systems_ > 0 && violations_ == 0; }

private:
    double discount_;
    std::size_t systems_ = 0;
    std::size_t violations_ = 0;
    double worst_row_sum_ = 0.0;
};

/// Closed-form value of the zero-policy, never-stop problem with v(0) = 0: -x_max^{1-d/l} x^{d/l}.
inline double zero_policy_value(double x, double x_max, const ModelParams& p) {
    const double k = p.delta_principal / p.lambda_agent;
    return -std::pow(x_max, 1.0 - k) * std::pow(x, k);
}

struct OracleError {
    double max_error = 0.0;
    double at = 0.0;
};

/// Max |v_h - v| over nodes x >= from for the zero-policy evaluation.
inline OracleError zero_policy_oracle_error(const ContractModel& model, double x_max, double dx, double from = 0.5) {
    const Grid grid = Grid::uniform(x_max, dx);
    const std::vector<Real> v = evaluate_policy(PolicyField::zeros(grid.n), std::vector<bool>(grid.n, false), grid,
                                                model, {0.0L, -static_cast<Real>(x_max)});
    OracleError out;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.node(i);
        if (x < from) {
            continue;
        }
        const double err = std::abs(static_cast<double>(v[i + 1]) - zero_policy_value(x, x_max, model.params()));
        if (err > out.max_error) {
            out = {err, x};
        }
    }
    return out;
}

/// Largest relative error of a -> best_effort(sensitivity(a)) over the given efforts.
inline double effort_round_trip_error(const ContractModel& model, std::span<const double> efforts) {
    double worst = 0.0;
    for (double a : efforts) {
        const double back = best_effort_from_sensitivity(sensitivity_from_effort(a, model), model);
        worst = std::max(worst, std::abs(back - a) / std::max(1.0, a));
    }
    return worst;
}

/// 10^-3 .. 10^2 in `count` log-spaced points.
inline std::vector<double> log_effort_grid(std::size_t count = 200) {
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = std::pow(10.0, -3.0 + 5.0 * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    return out;
}

/// Smallest interior second difference v_{i-1} - 2 v_i + v_{i+1} over nodes with x <= upto.
inline double min_second_difference(const SolveResult& result, double upto) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < result.value.size(); ++k) {
        if (result.x[k] > upto) {
            break;
        }
        const Real d2 = result.value[k - 1] - 2.0L * result.value[k] + result.value[k + 1];
        worst = std::min(worst, static_cast<double>(d2));
    }
    return worst;
}

/// Largest drop of rent along increasing effort on continuation nodes (0 if r is nondecreasing in a).
inline double rent_effort_violation(const SolveResult& result) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < result.grid.n; ++i) {
        if (!result.stopping[i + 1]) {
            pairs.emplace_back(result.policy.effort[i], result.policy.rent[i]);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    double worst = 0.0;
    double running_max = -std::numeric_limits<double>::infinity();
    for (const auto& [a, r] : pairs) {
        running_max = std::max(running_max, r);
        worst = std::max(worst, running_max - r);
    }
    return worst;
}

/// Largest violation of v_i >= -x_i, as a positive number (0 if the obstacle holds).
inline double obstacle_violation(const SolveResult& result) {
    double worst = 0.0;
    for (std::size_t k = 0; k < result.value.size(); ++k) {
        worst = std::max(worst, static_cast<double>(-static_cast<Real>(result.x[k]) - result.value[k]));
    }
    return worst;
}

}  // namespace ppp

#endif  // PPP_CHECKS_HPP
