#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <gtest/gtest.h>
#include <gls/oracle.hpp>
#include <gls/sls.hpp>
#include <gls/ssls.hpp>
#include "test_helpers.hpp"

using namespace gls;

namespace {

Vector vec(std::initializer_list<double> values)
{
    return Eigen::Map<const Vector>(values.begin(), static_cast<Index>(values.size()));
}

SignVector sv(std::initializer_list<int> values) { return SignVector{std::vector<int>(values)}; }

GroupedProblem univariate()
{
    return GroupedProblem(vec({2.0}), Matrix::Ones(1, 1), GroupPartition({1}));
}

} // namespace

TEST(SoftThreshold, Examples)
{
    EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
    EXPECT_EQ(soft_threshold(-0.5, 1.0), 0.0);
    EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
    EXPECT_EQ(soft_threshold(1.25, 0.0), 1.25);
    EXPECT_TRUE(soft_threshold(vec({-2, 0.5, 4}), 1.0).isApprox(vec({-1, 0, 3})));
}

TEST(ZeroCheck, Examples)
{
    EXPECT_TRUE(zero_check_sgl(vec({0.3, -0.4}), 1e-6, 0.5));
    EXPECT_FALSE(zero_check_sgl(vec({2.0}), 0.5, 0.5));
    EXPECT_TRUE(zero_check_sgl(vec({2.0}), 1.5, 0.5));
}

TEST(SignedSubproblem, UnivariateFeasible)
{
    const auto problem = univariate();
    SpectralCache cache(problem);
    const auto res = signed_subproblem(problem, 0, {problem.y()}, sv({1}), 0.5, 0.5, cache);
    EXPECT_EQ(res.status, SignedStatus::Feasible);
    EXPECT_NEAR(*res.r, 1.0, 1e-12);
    EXPECT_NEAR((*res.alpha)(0), 1.0, 1e-12);
}

TEST(SignedSubproblem, UnivariateWrongSign)
{
    const auto problem = univariate();
    SpectralCache cache(problem);
    const auto res = signed_subproblem(problem, 0, {problem.y()}, sv({-1}), 0.5, 0.5, cache);
    EXPECT_EQ(res.status, SignedStatus::InfeasibleSign);
    EXPECT_NEAR(*res.r, 2.0, 1e-12);
    EXPECT_NEAR((*res.alpha)(0), 2.0, 1e-12);
}

TEST(SignedSubproblem, NoRootAndEmptySupport)
{
    // v_sigma = 2 - 4 * 0.5 = 0.
    const auto problem = univariate();
    SpectralCache cache(problem);
    EXPECT_EQ(signed_subproblem(problem, 0, {problem.y()}, sv({1}), 0.5, 4.0 * 0.5, cache).status,
              SignedStatus::NoRoot);
    EXPECT_THROW(signed_subproblem(problem, 0, {problem.y()}, sv({0}), 0.5, 0.5, cache), InvalidInput);
}

TEST(SignedSubproblem, OffSupportTestIsStationarityNotPrintedCondition)
{
    // A = I, b = (3, 1.4), lambda1 = lambda2 = 1. The optimum is (+, +); sigma = (+, 0)
    // gives alpha = (1, 0) whose off-support correlation 1.4 exceeds lambda2.
    // |{1.4}_1| = 0.4 <= lambda1 would wrongly accept it.
    const GroupedProblem problem(vec({3.0, 1.4}), Matrix::Identity(2, 2), GroupPartition({2}));
    SpectralCache cache(problem);
    const auto partial = sv({1, 0});
    const auto res = signed_subproblem(problem, 0, {problem.y()}, partial, 1.0, 1.0, cache);
    EXPECT_EQ(res.status, SignedStatus::InfeasibleBoundary);
    ASSERT_TRUE(res.alpha);
    EXPECT_NEAR((*res.alpha)(0), 1.0, 1e-12);
    const double corr = 1.4 - 0.0;
    EXPECT_LE(std::abs(soft_threshold(corr, 1.0)), 1.0);

    const auto full = signed_subproblem(problem, 0, {problem.y()}, sv({1, 1}), 1.0, 1.0, cache);
    EXPECT_EQ(full.status, SignedStatus::Feasible);
    const Vector expected = oracle::prox_sparse_group(problem.y(), 1.0, 1.0, 1.0);
    EXPECT_LE((*full.alpha - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SignOrder, PreviousFirstWithoutRepetition)
{
    const Vector g = vec({2.0, -0.1, -3.0});
    const auto center = SignVector::of(soft_threshold(g, 0.5));
    EXPECT_EQ(center, sv({1, 0, -1}));
    const auto with_prev = sign_order(g, 0.5, center);
    EXPECT_EQ(with_prev.front(), center);
    EXPECT_EQ(std::count(with_prev.begin(), with_prev.end(), center), 1);
    EXPECT_EQ(with_prev.size(), 27u);

    const auto other = sv({-1, -1, -1});
    const auto list = sign_order(g, 0.5, other);
    EXPECT_EQ(list[0], other);
    EXPECT_EQ(list[1], center);
    EXPECT_EQ(list.size(), 27u);
    std::set<std::vector<int>> distinct;
    for (const auto& s : list) distinct.insert(s.s);
    EXPECT_EQ(distinct.size(), 27u);
}

TEST(SignOrder, RingsAndTieBreak)
{
    const auto list = sign_order(vec({0.0, 0.0}), 1.0);
    ASSERT_EQ(list.size(), 9u);
    // Center (0,0), then distance 1 lexicographic with + < 0 < -, then distance 2.
    const std::vector<SignVector> expected{sv({0, 0}),  sv({1, 0}),  sv({0, 1}),   sv({0, -1}), sv({-1, 0}),
                                           sv({1, 1}),  sv({1, -1}), sv({-1, 1}), sv({-1, -1})};
    EXPECT_EQ(list, expected);
    const auto single = sign_order(vec({5.0}), 1.0);
    ASSERT_EQ(single.size(), 3u);
    EXPECT_EQ(single[0], sv({1}));
}

TEST(SignOrder, HammingDistanceIsNondecreasingAfterTheCenter)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vector g(4);
        for (Index j = 0; j < 4; ++j) g(j) = 2.0 * normal(rng);
        const auto order = SignOrder(g, 0.7);
        const auto list = order.all();
        ASSERT_EQ(list.size(), 81u);
        int last = 0;
        for (const auto& s : list) {
            int dist = 0;
            for (std::size_t j = 0; j < 4; ++j) dist += s.s[j] != order.center().s[j];
            EXPECT_GE(dist, last);
            last = dist;
        }
    }
}

TEST(SolveSgl, LargeL1PenaltyGivesZero)
{
    std::mt19937_64 rng(1);
    const auto problem = fixtures::random_problem(rng, 10, {2, 3});
    const double big = (problem.design().transpose() * problem.y()).cwiseAbs().maxCoeff();
    const auto result = solve_sgl(problem, PenaltySpec::sparse_group_lasso(0.1, big));
    EXPECT_TRUE(result.beta.values().isZero(0.0));
    EXPECT_EQ(result.trace.sweeps, 1u);
}

TEST(SolveSgl, ZeroTrapDataMatchesOracle)
{
    const auto problem = fixtures::zero_trap_problem();
    const auto penalty = PenaltySpec::sparse_group_lasso(0.1, 0.1);
    const auto result = solve_sgl(problem, penalty);
    const auto ref = oracle::fista_solve(problem, penalty);
    const double theirs = objective(problem, penalty, ref.beta);
    EXPECT_LE(std::abs(objective(problem, penalty, result.beta) - theirs), 1e-6 * theirs);
    // Closed form: soft threshold by 0.1 then shrink by 0.1.
    EXPECT_LE((result.beta.values() - oracle::prox_sparse_group(problem.y(), 1.0, 0.1, 0.1)).cwiseAbs().maxCoeff(),
              1e-12);
}

TEST(SolveSgl, AcceptedSignsMatchOracle)
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> frac(0.05, 0.5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto problem = fixtures::random_problem(rng, 15, {2, 2, 2});
        const double top = lambda_max(problem);
        const auto penalty = PenaltySpec::sparse_group_lasso(frac(rng) * top, frac(rng) * top * 0.3);
        SolveOptions options;
        options.tol = 1e-12;
        const auto result = solve_sgl(problem, penalty, options);
        ASSERT_TRUE(result.trace.converged);
        for (std::size_t t = 1; t < result.trace.objective_per_sweep.size(); ++t) {
            EXPECT_LE(result.trace.objective_per_sweep[t], result.trace.objective_per_sweep[t - 1] + 1e-12);
        }
        const auto ref = oracle::fista_solve(problem, penalty);
        ASSERT_TRUE(ref.converged);
        const double theirs = objective(problem, penalty, ref.beta);
        EXPECT_LE(std::abs(objective(problem, penalty, result.beta) - theirs), 1e-6 * (1.0 + theirs));
        // Compare sign patterns on coordinates the oracle resolves clearly.
        for (Index j = 0; j < problem.p(); ++j) {
            const double o = ref.beta.values()(j);
            const double s = result.beta.values()(j);
            if (std::abs(o) > 1e-6) {
                EXPECT_EQ(o > 0.0, s > 0.0);
                EXPECT_NE(s, 0.0);
            }
            if (s == 0.0) EXPECT_LE(std::abs(o), 1e-6);
        }
    }
}

TEST(SolveSgl, ExhaustiveEnumerationFindsExactlyOneFeasibleSign)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lam(0.05, 1.5);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto problem = fixtures::random_problem(rng, 6, {2});
        const double l1 = lam(rng);
        const double l2 = lam(rng);
        const Vector g = problem.block(0).transpose() * problem.y();
        if (zero_check_sgl(g, l1, l2)) continue;
        ++checked;
        SpectralCache cache(problem);
        int feasible = 0;
        for (const auto& sigma : sign_order(g, l2)) {
            if (sigma.support().empty()) continue;
            feasible += signed_subproblem(problem, 0, {problem.y()}, sigma, l1, l2, cache).status ==
                        SignedStatus::Feasible;
        }
        EXPECT_EQ(feasible, 1);
    }
    EXPECT_GT(checked, 50);
}

TEST(SolveSgl, SmallL1WeightApproachesGroupLasso)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto problem = fixtures::random_problem(rng, 12, {2, 3, 2});
        const double l1 = 0.3 * lambda_max(problem);
        SolveOptions options;
        options.tol = 1e-12;
        const auto sgl = solve_sgl(problem, PenaltySpec::sparse_group_lasso(l1, 1e-10), options);
        const auto gl = solve(problem, PenaltySpec::group_lasso(l1), options);
        EXPECT_LE((problem.design() * (sgl.beta.values() - gl.beta.values())).cwiseAbs().maxCoeff(), 1e-4);
    }
}

TEST(SolveSgl, GroupSizeGuard)
{
    const GroupedProblem problem(Vector::Ones(20), Matrix::Identity(20, 13), GroupPartition({13}));
    EXPECT_THROW(solve_sgl(problem, PenaltySpec::sparse_group_lasso(0.1, 0.1)), SolverRefusal);
    EXPECT_THROW(solve_sgl(fixtures::zero_trap_problem(), PenaltySpec::group_lasso(0.1)), InvalidInput);
}
