#ifndef PPP_DISCRETIZATION_HPP
#define PPP_DISCRETIZATION_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppp/errors.hpp"
#include "ppp/model.hpp"

namespace ppp {

/**
 * Scalar type of value vectors and assembled systems.
 *
 * With the effort cap at 100 the diffusion weight s^2 / (2 dx^2) reaches ~6e7,
 * so one double ulp of v moves a row residual by ~1e-7. Extended precision
 * keeps residuals near 1e-10.
 */
using Real = long double;

/// Uniform grid on [0, x_max] with n interior nodes x_i = (i+1) delta, i = 0..n-1 (0-based).
struct Grid {
    double x_max = 10.0;
    std::size_t n = 0;
    double delta = 0.0;

    static Grid uniform(double x_max, double dx) {
        if (!(x_max > 0.0) || !(dx > 0.0) || !std::isfinite(x_max) || !std::isfinite(dx)) {
            throw ModelError("grid needs positive x_max and dx");
        }
        const auto cells = static_cast<long long>(std::llround(x_max / dx));
        if (cells < 3) {
            throw ModelError("grid needs at least two interior nodes");
        }
        Grid g;
        g.x_max = x_max;
        g.n = static_cast<std::size_t>(cells - 1);
        g.delta = x_max / static_cast<double>(cells);
        return g;
    }

    /// Interior node, 0-based.
    double node(std::size_t i) const { return static_cast<double>(i + 1) * delta; }

    /// Node including boundaries: k = 0 is x = 0, k = n + 1 is x_max.
    double position(std::size_t k) const {
        return k == n + 1 ? x_max : static_cast<double>(k) * delta;
    }
};

/// Per-interior-node feedback controls.
struct PolicyField {
    std::vector<double> effort;
    std::vector<double> rent;

    static PolicyField zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
    std::size_t size() const noexcept { return effort.size(); }
};

/**
 * Tridiagonal rows of (delta - L) v = phi - r after Dirichlet fold-in.
 *
 * lower[0] and upper[n-1] are zero; the couplings they would carry to the
 * boundary values are kept in left_coupling / right_coupling so audits can
 * check the full stencil.
 */
struct TridiagonalSystem {
    std::vector<Real> lower;
    std::vector<Real> diag;
    std::vector<Real> upper;
    std::vector<Real> rhs;
    Real left_coupling = 0.0L;
    Real right_coupling = 0.0L;

    std::size_t size() const noexcept { return diag.size(); }
};

struct DirichletData {
    Real left = 0.0L;   ///< v(0)
    Real right = 0.0L;  ///< v(x_max)
};

/// Coefficient of w' in L^{a,r}: lambda x - U(r) + h(a).
inline double drift(double x, double a, double r, const ContractModel& model) {
    return model.params().lambda_agent * x - model.utility()(r) + model.cost()(a);
}

/// State volatility s(a); the second-order coefficient of L^{a,r} is s(a)^2 / 2.
inline double diffusion(double a, const ContractModel& model) { return model.volatility(a); }

namespace detail {

struct Stencil {
    Real lower;
    Real diag;
    Real upper;
};

inline Real drift_of(double x, double lambda, double rent_utility, double cost) {
    return static_cast<Real>(lambda) * x - rent_utility + cost;
}

// Monotone upwind row: forward difference for mu >= 0, backward otherwise.
inline Stencil upwind_stencil(Real mu, double volatility, double discount, double dx) {
    const Real s = volatility;
    const Real h = dx;
    const Real d = s * s / (2.0L * h * h);
    const Real forward = mu >= 0.0L ? mu / h : 0.0L;
    const Real backward = mu >= 0.0L ? 0.0L : -mu / h;
    return {-(d + backward), discount + 2.0L * d + forward + backward, -(d + forward)};
}

// Row residual from precomputed effort terms, written in difference form.
inline Real hamiltonian_row(Real v_left, Real v_mid, Real v_right, double x, const EffortTerms& terms, double rent,
                            double rent_utility, double lambda, double discount, double dx) {
    const Real mu = drift_of(x, lambda, rent_utility, terms.cost);
    const Real h = dx;
    const Real up = v_right - v_mid;
    const Real down = v_mid - v_left;
    const Real first = mu >= 0.0L ? up / h : down / h;
    Real second_order = 0.0L;
    if (terms.volatility > 0.0) {
        const Real s = terms.volatility;
        second_order = s * s * (up - down) / (2.0L * h * h);
    }
    return discount * v_mid - second_order - mu * first - terms.impact + rent;
}

}  // namespace detail

/**
 * Assemble the monotone upwind system for a fixed policy.
 *
 * Row i encodes delta v_i - [s^2/2 D2 v + mu D v]_i = phi(a_i) - r_i with the
 * boundary values moved to the right-hand side. Off-diagonals are nonpositive
 * and every full-stencil row sums to delta.
 */
inline TridiagonalSystem assemble_system(const Grid& grid, const PolicyField& policy, const ContractModel& model,
                                         DirichletData boundary) {
    const std::size_t n = grid.n;
    if (policy.effort.size() != n || policy.rent.size() != n) {
        throw std::invalid_argument("policy size does not match grid");
    }
    const double discount = model.params().delta_principal;
    const double lambda = model.params().lambda_agent;
    TridiagonalSystem sys;
    sys.lower.resize(n);
    sys.diag.resize(n);
    sys.upper.resize(n);
    sys.rhs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = policy.effort[i];
        const double r = policy.rent[i];
        const EffortTerms terms = model.effort_terms(a);
        const Real mu = detail::drift_of(grid.node(i), lambda, model.utility()(r), terms.cost);
        const detail::Stencil row = detail::upwind_stencil(mu, terms.volatility, discount, grid.delta);
        const Real source = static_cast<Real>(terms.impact) - r;
        if (!std::isfinite(row.lower) || !std::isfinite(row.diag) || !std::isfinite(row.upper) ||
            !std::isfinite(source)) {
            throw std::domain_error("non-finite coefficient at node " + std::to_string(i));
        }
        sys.lower[i] = row.lower;
        sys.diag[i] = row.diag;
        sys.upper[i] = row.upper;
        sys.rhs[i] = source;
    }
    sys.left_coupling = sys.lower[0];
    sys.right_coupling = sys.upper[n - 1];
    sys.rhs[0] -= sys.lower[0] * boundary.left;
    sys.rhs[n - 1] -= sys.upper[n - 1] * boundary.right;
    sys.lower[0] = 0.0;
    sys.upper[n - 1] = 0.0;
    return sys;
}

/// Thomas algorithm. Throws SingularSystemError if a pivot magnitude drops below 1e-14.
inline std::vector<Real> solve_tridiagonal(const TridiagonalSystem& sys) {
    const std::size_t n = sys.size();
    if (n == 0) {
        return {};
    }
    std::vector<Real> c(n);
    std::vector<Real> d(n);
    Real pivot = sys.diag[0];
    if (std::abs(pivot) < 1e-14L) {
        throw SingularSystemError("tridiagonal pivot below 1e-14 at row 0");
    }
    c[0] = sys.upper[0] / pivot;
    d[0] = sys.rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = sys.diag[i] - sys.lower[i] * c[i - 1];
        if (std::abs(pivot) < 1e-14L || !std::isfinite(pivot)) {
            throw SingularSystemError("tridiagonal pivot below 1e-14 at row " + std::to_string(i));
        }
        c[i] = sys.upper[i] / pivot;
        d[i] = (sys.rhs[i] - sys.lower[i] * d[i - 1]) / pivot;
    }
    std::vector<Real> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    return x;
}

/**
 * Residual of interior row i (0-based) for the control pair (a, r):
 * delta v_i - [s(a)^2/2 D2 v_i + mu D_upwind v_i] - phi(a) + r.
 * Neighbours outside the interior are taken from the boundary data.
 */
inline Real discrete_hamiltonian(std::size_t i, std::span<const Real> v, double a, double r, const Grid& grid,
                                 const ContractModel& model, DirichletData boundary) {
    const Real left = i == 0 ? boundary.left : v[i - 1];
    const Real right = i + 1 == v.size() ? boundary.right : v[i + 1];
    const ModelParams& p = model.params();
    return detail::hamiltonian_row(left, v[i], right, grid.node(i), model.effort_terms(a), r, model.utility()(r),
                                   p.lambda_agent, p.delta_principal, grid.delta);
}

}  // namespace ppp

#endif  // PPP_DISCRETIZATION_HPP
