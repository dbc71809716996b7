#ifndef PPP_MODEL_HPP
#define PPP_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "ppp/errors.hpp"
#include "ppp/golden_section.hpp"

namespace ppp {

/// Economic parameters of the contract. Rates are per unit time.
struct ModelParams {
    double alpha = 0.035;            ///< effort-impact curvature
    double beta = 0.017;             ///< effort-cost curvature
    double lambda_agent = 0.08;      ///< agent discount rate
    double delta_principal = 0.065;  ///< principal discount rate
    double sigma = 1.2;              ///< social-value volatility
    double reservation = 0.0;        ///< agent reservation value, reported only
    double rho = 0.0;                ///< admissibility exponent, reported only

    void validate() const {
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!positive(alpha) || !positive(beta)) {
            throw ModelError("alpha and beta must be positive");
        }
        if (!positive(sigma)) {
            throw ModelError("sigma must be positive");
        }
        if (!positive(delta_principal)) {
            throw ModelError("delta must be positive");
        }
        if (!std::isfinite(lambda_agent) || lambda_agent < delta_principal) {
            throw ModelError("the agent must be at least as impatient as the principal (lambda >= delta)");
        }
        if (!std::isfinite(reservation) || reservation < 0.0) {
            throw ModelError("reservation value must be nonnegative");
        }
    }
};

/**
 * A scalar function on [0, inf) with optional analytic derivatives and inverse.
 *
 * Missing derivatives fall back to finite differences; a missing inverse falls
 * back to bisection, which assumes the function is increasing.
 */
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    std::function<double(double)> curvature;
    std::function<double(double)> inverse;

    double operator()(double x) const { return value(x); }

    double derivative(double x) const {
        if (slope) {
            return slope(x);
        }
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        if (x - h < 0.0) {
            return (value(x + h) - value(x)) / h;
        }
        return (value(x + h) - value(x - h)) / (2.0 * h);
    }

    double second_derivative(double x) const {
        if (curvature) {
            return curvature(x);
        }
        // a 1e-6 step loses everything to cancellation in a second difference
        const double h = 1e-4 * std::max(1.0, std::abs(x));
        const double c = std::max(x, h);
        return (value(c + h) - 2.0 * value(c) + value(c - h)) / (h * h);
    }

    double invert(double y) const {
        if (inverse) {
            return inverse(y);
        }
        if (y <= value(0.0)) {
            return 0.0;
        }
        double lo = 0.0;
        double hi = 1.0;
        while (value(hi) < y) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e12) {
                throw ModelError("inverse lookup left the supported range");
            }
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (value(mid) < y ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

/// Effort-dependent coefficients evaluated together (one pass of exponentials for the default family).
struct EffortTerms {
    double impact;      ///< phi(a)
    double cost;        ///< h(a)
    double volatility;  ///< sigma h'(a) / phi'(a), zero at a = 0
};

/**
 * Contract primitives: effort impact phi, effort cost h and rent utility U.
 *
 * The default family is phi(a) = 1 - exp(-alpha a), h(a) = exp(beta a) - 1,
 * U(r) = r^{3/4} / 2, for which every map below has a closed form.
 */
class ContractModel {
public:
    ContractModel(ModelParams params, ScalarFunction impact, ScalarFunction cost, ScalarFunction utility)
        : params_(params), impact_(std::move(impact)), cost_(std::move(cost)), utility_(std::move(utility)) {
        params_.validate();
    }

    static ContractModel exponential(ModelParams params) {
        const double alpha = params.alpha;
        const double beta = params.beta;
        ScalarFunction impact{
            [alpha](double a) { return -std::expm1(-alpha * a); },
            [alpha](double a) { return alpha * std::exp(-alpha * a); },
            [alpha](double a) { return -alpha * alpha * std::exp(-alpha * a); },
            [alpha](double y) { return -std::log1p(-y) / alpha; },
        };
        ScalarFunction cost{
            [beta](double a) { return std::expm1(beta * a); },
            [beta](double a) { return beta * std::exp(beta * a); },
            [beta](double a) { return beta * beta * std::exp(beta * a); },
            [beta](double u) { return std::log1p(u) / beta; },
        };
        ScalarFunction utility{
            [](double r) { return 0.5 * std::pow(r, 0.75); },
            [](double r) { return 0.375 * std::pow(r, -0.25); },
            [](double r) { return -0.09375 * std::pow(r, -1.25); },
            [](double u) { return u <= 0.0 ? 0.0 : std::pow(2.0 * u, 4.0 / 3.0); },
        };
        ContractModel model(params, std::move(impact), std::move(cost), std::move(utility));
        model.closed_form_ = true;
        return model;
    }

    const ModelParams& params() const noexcept { return params_; }
    const ScalarFunction& impact() const noexcept { return impact_; }
    const ScalarFunction& cost() const noexcept { return cost_; }
    const ScalarFunction& utility() const noexcept { return utility_; }
    bool closed_form() const noexcept { return closed_form_; }

    /// Same primitives with a different volatility (for sigma sweeps).
    ContractModel with_sigma(double sigma) const {
        ContractModel copy = *this;
        copy.params_.sigma = sigma;
        copy.params_.validate();
        return copy;
    }

    /// sigma h'(a) / phi'(a) for a > 0, else 0.
    double volatility(double a) const {
        if (!(a > 0.0)) {
            return 0.0;
        }
        if (closed_form_) {
            return params_.sigma * (params_.beta / params_.alpha) *
                   std::exp((params_.alpha + params_.beta) * a);
        }
        return params_.sigma * cost_.derivative(a) / impact_.derivative(a);
    }

    EffortTerms effort_terms(double a) const {
        if (closed_form_) {
            const double ea = std::exp(params_.alpha * a);
            const double eb = std::exp(params_.beta * a);
            const double s = a > 0.0 ? params_.sigma * (params_.beta / params_.alpha) * ea * eb : 0.0;
            return {1.0 - 1.0 / ea, eb - 1.0, s};
        }
        return {impact_(a), cost_(a), volatility(a)};
    }

    /// Smallest sensitivity that induces positive effort: sigma h'(0) / phi'(0).
    double effort_threshold() const {
        return params_.sigma * cost_.derivative(0.0) / impact_.derivative(0.0);
    }

    /// (U')^{-1}(m) for m > 0.
    double utility_slope_inverse(double m) const {
        if (closed_form_) {
            return std::pow(0.375 / m, 4.0);
        }
        // U' is decreasing; bisect on a geometric bracket
        double lo = 1e-300;
        double hi = 1.0;
        while (utility_.derivative(hi) > m) {
            hi *= 2.0;
            if (hi > 1e15) {
                throw ModelError("utility slope inverse left the supported range");
            }
        }
        if (utility_.derivative(lo) <= m) {
            return 0.0;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (utility_.derivative(mid) > m ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    ModelParams params_;
    ScalarFunction impact_;
    ScalarFunction cost_;
    ScalarFunction utility_;
    bool closed_form_ = false;
};

/**
 * Agent's best response to a diffusion sensitivity z.
 *
 * Zero on (-inf, sigma h'(0)/phi'(0)], including the threshold itself;
 * otherwise the unique a > 0 with sigma h'(a)/phi'(a) = z.
 */
inline double best_effort_from_sensitivity(double z, const ContractModel& model) {
    const double threshold = model.effort_threshold();
    if (!(z > threshold)) {
        return 0.0;
    }
    const ModelParams& p = model.params();
    if (model.closed_form()) {
        return std::log(p.alpha * z / (p.sigma * p.beta)) / (p.alpha + p.beta);
    }
    double lo = 0.0;
    double hi = 1.0;
    while (model.volatility(hi) < z) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9) {
            throw ModelError("sensitivity outside the range of sigma h'/phi'");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (model.volatility(mid) < z ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Inverse of best_effort_from_sensitivity on its support; 0 for a = 0.
inline double sensitivity_from_effort(double a, const ContractModel& model) {
    return model.volatility(a);
}

/// Principal's optimal rent for a value-function slope: (U')^{-1}(-1/w') if w' < 0, else 0.
inline double optimal_rent(double w_prime, const ContractModel& model) {
    if (!(w_prime < 0.0)) {
        return 0.0;
    }
    if (model.closed_form()) {
        const double root = 0.375 * -w_prime;
        const double sq = root * root;
        return sq * sq;
    }
    return model.utility_slope_inverse(-1.0 / w_prime);
}

struct BoundarySearch {
    double y_cap = 1e6;
    double tolerance = 1e-9;
};

/// Maximizer and maximum of y -> phi(h^{-1}(U(y))) - y over y >= 0.
inline Extremum boundary_supremum(const ContractModel& model, BoundarySearch search = {}) {
    auto objective = [&model](double y) {
        return model.impact()(model.cost().invert(model.utility()(y))) - y;
    };
    const Bracket bracket = expand_maximum_bracket(objective, 0.0, 1.0, search.y_cap);
    Extremum best = golden_section_maximize(objective, bracket, search.tolerance);
    const double at_zero = objective(0.0);
    if (at_zero >= best.value) {
        best = {0.0, at_zero};
    }
    return best;
}

/// Value of the principal at x = 0: max(sup_y [phi(h^{-1}(U(y))) - y] / delta, 0).
inline double boundary_value(const ContractModel& model, BoundarySearch search = {}) {
    const Extremum sup = boundary_supremum(model, search);
    return std::max(sup.value / model.params().delta_principal, 0.0);
}

}  // namespace ppp

#endif  // PPP_MODEL_HPP
