#ifndef PPP_TEST_SUPPORT_HPP
#define PPP_TEST_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "ppp/howard.hpp"
#include "ppp/model.hpp"

namespace ppp::test {

inline ContractModel default_model() { return ContractModel::exponential({}); }

/// Same primitives as the default family but with values only, so every map takes the generic path.
inline ContractModel generic_model(ModelParams p = {}) {
    const double alpha = p.alpha;
    const double beta = p.beta;
    ScalarFunction impact{[alpha](double a) { return 1.0 - std::exp(-alpha * a); }, {}, {}, {}};
    ScalarFunction cost{[beta](double a) { return std::exp(beta * a) - 1.0; }, {}, {}, {}};
    ScalarFunction utility{[](double r) { return 0.5 * std::pow(r, 0.75); }, {}, {}, {}};
    return ContractModel(p, impact, cost, utility);
}

inline std::mt19937_64 rng(std::uint64_t seed = 7) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

/**
 * Hand-built result on [0, x_max] with n interior nodes, constant policy (a, r)
 * and free boundary at `boundary`; values are -x.
 */
inline SolveResult synthetic_result(double x_max, double dx, double a, double r, double boundary, Real v0 = 0.0L) {
    SolveResult res;
    res.grid = Grid::uniform(x_max, dx);
    const std::size_t n = res.grid.n;
    res.x.resize(n + 2);
    res.value.resize(n + 2);
    res.stopping.assign(n + 2, false);
    for (std::size_t k = 0; k < n + 2; ++k) {
        res.x[k] = res.grid.position(k);
        res.value[k] = -static_cast<Real>(res.x[k]);
        res.stopping[k] = res.x[k] >= boundary;
    }
    res.value[0] = v0;
    res.policy = {std::vector<double>(n, a), std::vector<double>(n, r)};
    res.boundary.location = boundary;
    res.boundary.truncated = boundary >= x_max;
    return res;
}

}  // namespace ppp::test

#endif  // PPP_TEST_SUPPORT_HPP
