#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "ppp/howard.hpp"
#include "ppp/montecarlo.hpp"
#include "support.hpp"

using namespace ppp;
using ppp::test::default_model;
using ppp::test::synthetic_result;

namespace {

const SolveResult& default_solution() {
    static const SolveResult r = solve_hjbvi(SolverConfig{});
    return r;
}

SimConfig quick(double x0, std::size_t paths) {
    SimConfig s;
    s.x0 = x0;
    s.paths = paths;
    return s;
}

}  // namespace

TEST(InterpolatePolicy, NodesMidpointsAndFlag) {
    SolveResult r = synthetic_result(1.0, 0.1, 0.0, 0.0, 0.55);
    for (std::size_t i = 0; i < r.grid.n; ++i) {
        r.policy.effort[i] = 2.0 * static_cast<double>(i);
        r.policy.rent[i] = 0.1 * static_cast<double>(i * i);
    }
    for (std::size_t i = 0; i < r.grid.n; ++i) {
        const PolicySample s = interpolate_policy(r, r.grid.node(i));
        EXPECT_NEAR(s.effort, r.policy.effort[i], 1e-12);
        EXPECT_NEAR(s.rent, r.policy.rent[i], 1e-12);
    }
    const PolicySample mid = interpolate_policy(r, 0.35);
    EXPECT_NEAR(mid.effort, 0.5 * (r.policy.effort[2] + r.policy.effort[3]), 1e-12);
    EXPECT_NEAR(mid.rent, 0.5 * (r.policy.rent[2] + r.policy.rent[3]), 1e-12);
    EXPECT_TRUE(interpolate_policy(r, 0.5).continuation);
    EXPECT_FALSE(interpolate_policy(r, 0.55 + 0.1).continuation);
    // flat beyond the outer interior nodes
    EXPECT_NEAR(interpolate_policy(r, 0.0).effort, r.policy.effort.front(), 1e-12);
    EXPECT_NEAR(interpolate_policy(r, 1.0).effort, r.policy.effort.back(), 1e-12);
    EXPECT_NEAR(interpolate_policy(r, 5.0).effort, r.policy.effort.back(), 1e-12);
}

TEST(PairwiseSum, ExactOnIntegersAndIndependentOfLayout) {
    std::vector<double> v(1001);
    std::iota(v.begin(), v.end(), 0.0);
    EXPECT_EQ(pairwise_sum(v), 500500.0);
    std::vector<double> noisy(12345);
    auto g = test::rng(2);
    for (auto& x : noisy) x = test::uniform(g, -1.0, 1.0);
    const double once = pairwise_sum(noisy);
    EXPECT_EQ(once, pairwise_sum(noisy));
    EXPECT_NEAR(once, std::accumulate(noisy.begin(), noisy.end(), 0.0), 1e-10);
}

TEST(SimConfig, Validation) {
    SimConfig s;
    EXPECT_NO_THROW(s.validate(10.0));
    s.dt = 0.0;
    EXPECT_THROW(s.validate(10.0), std::invalid_argument);
    s = SimConfig{};
    s.paths = 0;
    EXPECT_THROW(s.validate(10.0), std::invalid_argument);
    s = SimConfig{};
    s.x0 = 11.0;
    EXPECT_THROW(s.validate(10.0), std::invalid_argument);
    s = SimConfig{};
    s.horizon = -1.0;
    EXPECT_THROW(s.validate(10.0), std::invalid_argument);
}

TEST(Principal, ImmediateStopPaysMinusState) {
    const SolveResult r = synthetic_result(10.0, 0.1, 5.0, 0.1, 3.0);
    const SimResult res = simulate_principal_value(r, quick(4.0, 50), default_model());
    EXPECT_EQ(res.mean, -4.0);
    EXPECT_EQ(res.standard_error, 0.0);
    EXPECT_EQ(res.mean_stopping_time, 0.0);
    const SimResult agent = simulate_agent_value(r, quick(4.0, 50), default_model(), 1.0);
    EXPECT_EQ(agent.mean, 4.0);
}

TEST(Principal, AbsorbedZeroStateWithZeroPolicyPaysNothing) {
    const SolveResult r = synthetic_result(10.0, 0.1, 0.0, 0.0, 10.0, 0.0L);
    for (AbsorptionRule rule : {AbsorptionRule::boundary_value, AbsorptionRule::hold_zero_policy}) {
        SimConfig s = quick(0.0, 1);
        s.absorption = rule;
        const SimResult res = simulate_principal_value(r, s, default_model());
        EXPECT_EQ(res.mean, 0.0);
        EXPECT_EQ(res.absorbed_fraction, 1.0);
    }
}

TEST(Principal, ZeroPolicyPathIsDeterministicGrowth) {
    // s = 0, mu = lambda J: J reaches x_max at tau = ln(x_max / x0) / lambda and pays -e^{-delta tau} x_max
    const SolveResult r = synthetic_result(10.0, 0.1, 0.0, 0.0, 10.0, 0.0L);
    const SimResult res = simulate_principal_value(r, quick(2.0, 3), default_model());
    const double tau = std::log(10.0 / 2.0) / 0.08;
    EXPECT_NEAR(res.mean_stopping_time, tau, 0.01);
    EXPECT_NEAR(res.mean, -std::exp(-0.065 * tau) * 10.0, 1e-3);
    EXPECT_EQ(res.standard_error, 0.0);
}

TEST(Principal, ShortHorizonCensors) {
    const SolveResult r = synthetic_result(10.0, 0.1, 0.0, 0.0, 10.0, 0.0L);
    SimConfig s = quick(2.0, 10);
    s.horizon = 1.0;
    const SimResult res = simulate_principal_value(r, s, default_model());
    EXPECT_EQ(res.censored_fraction, 1.0);
    EXPECT_TRUE(res.censoring_warning());
    const double j_end = 2.0 * std::pow(1.0 + 0.08 * 1e-3, 1000.0);
    EXPECT_NEAR(res.mean, -std::exp(-0.065) * j_end, 1e-6);
}

TEST(Principal, BitIdenticalAcrossRunsAndWorkerCounts) {
    const SolveResult& r = default_solution();
    SimConfig s = quick(1.0, 800);
    s.workers = 1;
    const SimResult a = simulate_principal_value(r, s, default_model());
    const SimResult b = simulate_principal_value(r, s, default_model());
    s.workers = 3;
    const SimResult c = simulate_principal_value(r, s, default_model());
    for (const SimResult* o : {&b, &c}) {
        EXPECT_EQ(a.mean, o->mean);
        EXPECT_EQ(a.standard_error, o->standard_error);
        EXPECT_EQ(a.mean_stopping_time, o->mean_stopping_time);
        EXPECT_EQ(a.censored_fraction, o->censored_fraction);
        EXPECT_EQ(a.absorbed_fraction, o->absorbed_fraction);
    }
    s.seed += 1;
    EXPECT_NE(simulate_principal_value(r, s, default_model()).mean, a.mean);
}

TEST(Principal, StandardErrorScalesWithInverseRootPaths) {
    const SolveResult& r = default_solution();
    const SimResult small = simulate_principal_value(r, quick(1.0, 1000), default_model());
    const SimResult large = simulate_principal_value(r, quick(1.0, 4000), default_model());
    const double ratio = small.standard_error / large.standard_error;
    EXPECT_GT(ratio, 1.0);
    EXPECT_LT(ratio, 4.0);
    EXPECT_GE(small.standard_error, 0.0);
    EXPECT_GE(small.absorbed_fraction, 0.0);
    EXPECT_LE(small.absorbed_fraction, 1.0);
}

TEST(Principal, HalvingTimeStepIsStable) {
    const SolveResult& r = default_solution();
    SimConfig s = quick(1.0, 10000);
    const SimResult coarse = simulate_principal_value(r, s, default_model());
    s.dt *= 0.5;
    const SimResult fine = simulate_principal_value(r, s, default_model());
    EXPECT_LT(std::abs(coarse.mean - fine.mean), 2.0 * std::max(coarse.standard_error, fine.standard_error));
}

TEST(Principal, AbsorptionRuleOnlyShiftsAbsorbedPaths) {
    const SolveResult& r = default_solution();
    SimConfig s = quick(0.5, 2000);
    const SimResult credited = simulate_principal_value(r, s, default_model());
    s.absorption = AbsorptionRule::hold_zero_policy;
    const SimResult held = simulate_principal_value(r, s, default_model());
    EXPECT_EQ(credited.absorbed_fraction, held.absorbed_fraction);
    const double v0 = static_cast<double>(r.value.front());
    EXPECT_GT(credited.mean, held.mean);
    EXPECT_LE(credited.mean - held.mean, v0 * credited.absorbed_fraction + 1e-12);
}

TEST(Agent, SelfConsistencyAtRecommendedEffort) {
    const SolveResult& r = default_solution();
    for (double x0 : {0.5, 1.0, 2.0}) {
        const SimResult res = simulate_agent_value(r, quick(x0, 5000), default_model(), 1.0);
        EXPECT_LE(std::abs(res.mean - x0), 3.0 * res.standard_error + 0.05) << "x0 = " << x0;
    }
}

TEST(Agent, RejectsNegativeScale) {
    const SolveResult& r = default_solution();
    EXPECT_THROW(simulate_agent_value(r, quick(1.0, 10), default_model(), -0.5), std::invalid_argument);
}

TEST(Incentive, RequiresScaleOne) {
    const SolveResult& r = default_solution();
    const double scales[] = {0.0, 2.0};
    EXPECT_THROW(incentive_check(r, quick(1.0, 10), default_model(), scales), std::invalid_argument);
}

TEST(Incentive, SingleScaleTriviallyPasses) {
    const SolveResult& r = default_solution();
    const double scales[] = {1.0};
    const IncentiveReport rep = incentive_check(r, quick(1.0, 200), default_model(), scales);
    EXPECT_TRUE(rep.scale_one_optimal);
    EXPECT_EQ(rep.best_scale, 1.0);
    ASSERT_EQ(rep.rows.size(), 1u);
}

TEST(Incentive, DeviationsDoNotPay) {
    const SolveResult& r = default_solution();
    const double scales[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    const IncentiveReport rep = incentive_check(r, quick(1.0, 4000), default_model(), scales);
    EXPECT_TRUE(rep.scale_one_optimal);
    for (const auto& row : rep.rows) {
        EXPECT_GE(row.estimate.standard_error, 0.0);
    }
}
