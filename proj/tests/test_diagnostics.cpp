#include <cmath>
#include <random>
#include <gtest/gtest.h>
#include <gls/diagnostics.hpp>
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

} // namespace

TEST(Certificate, ZeroTrapOptimum)
{
    const auto problem = fixtures::zero_trap_problem();
    const double v = 1.0 - std::sqrt(2.0) / 2.0;
    const Coefficients beta(vec({v, v}), problem.groups());
    const auto cert = certificate(problem, PenaltySpec::group_lasso(1.0), beta);
    EXPECT_LE(cert.w_norm, 1e-8);
    EXPECT_NEAR(cert.s.norm(), 1.0, 1e-12);
}

TEST(Certificate, ZeroAboveLambdaMax)
{
    std::mt19937_64 rng(2);
    const auto problem = fixtures::random_problem(rng, 10, {2, 3});
    const auto beta = Coefficients::zeros(problem);
    const auto cert = certificate(problem, PenaltySpec::group_lasso(lambda_max(problem)), beta);
    EXPECT_LE(cert.w_norm, 1e-12);
    EXPECT_GT(certificate(problem, PenaltySpec::group_lasso(0.5 * lambda_max(problem)), beta).w_norm, 0.0);
}

TEST(Certificate, ZeroGroupOutsideBall)
{
    // Gradient -(2, 0) at beta = 0, lambda = 1: the closest subgradient leaves w = (-1, 0).
    const GroupedProblem problem(vec({2.0, 0.0}), Matrix::Identity(2, 2), GroupPartition({2}));
    const auto cert = certificate(problem, PenaltySpec::group_lasso(1.0), Coefficients::zeros(problem));
    EXPECT_NEAR(cert.w_norm, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(cert.w(0)), 1.0, 1e-12);
    EXPECT_NEAR(cert.w(1), 0.0, 1e-12);
}

TEST(Certificate, SparseMembershipAndDimensions)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto problem = fixtures::random_problem(rng, 12, {2, 3, 1});
        const auto penalty = PenaltySpec::sparse_group_lasso(0.3 * lambda_max(problem), 0.5);
        const auto result = solve_sgl(problem, penalty);
        const auto cert = certificate(problem, penalty, result.beta);
        EXPECT_LE(cert.w_norm, 1e-6);
        for (Index j = 0; j < problem.p(); ++j) EXPECT_LE(std::abs(cert.t(j)), 1.0);
    }
    const auto problem = fixtures::zero_trap_problem();
    const Coefficients wrong(Vector::Zero(2), GroupPartition({1, 1}));
    EXPECT_THROW(certificate(problem, PenaltySpec::group_lasso(1.0), wrong), DimensionMismatch);
}

TEST(LsQuantities, Examples)
{
    const auto square = fixtures::zero_trap_problem();
    const auto ls = ls_quantities(square);
    EXPECT_LE(ls.residual.norm(), 1e-14);
    EXPECT_TRUE(ls.beta_lse.values().isApprox(Vector::Ones(2)));

    const GroupedProblem tall(vec({1.0, 0.0}), Matrix::Ones(2, 1), GroupPartition({1}));
    const auto tls = ls_quantities(tall);
    EXPECT_NEAR(tls.beta_lse.values()(0), 0.5, 1e-14);
    EXPECT_NEAR(tls.residual(0), 0.5, 1e-14);
    EXPECT_NEAR(tls.residual(1), -0.5, 1e-14);

    // Rank deficient: duplicate columns split the fit evenly (minimum norm).
    const GroupedProblem dup(vec({2.0}), Matrix::Ones(1, 2), GroupPartition({2}));
    const auto dls = ls_quantities(dup);
    EXPECT_NEAR(dls.beta_lse.values()(0), 1.0, 1e-12);
    EXPECT_NEAR(dls.beta_lse.values()(1), 1.0, 1e-12);
}

TEST(Bounds, BasicBoundOnZeroTrapAtZero)
{
    const auto problem = fixtures::zero_trap_problem();
    const auto penalty = PenaltySpec::group_lasso(1.0);
    const double v = 1.0 - std::sqrt(2.0) / 2.0;
    const Coefficients reference(vec({v, v}), problem.groups());
    const auto beta = Coefficients::zeros(problem);
    const auto cert = certificate(problem, penalty, beta);
    const auto bounds = accuracy_bounds(problem, penalty, beta, cert, ls_quantities(problem), reference);
    ASSERT_TRUE(bounds.bound_basic);
    const double truth = (problem.design() * reference.values()).squaredNorm();
    EXPECT_NEAR(truth, 2.0 * v * v, 1e-14);
    EXPECT_NEAR(*bounds.bound_basic, 2.0 * (std::sqrt(2.0) - 1.0) * (std::sqrt(2.0) - 1.0), 1e-12);
    EXPECT_GE(*bounds.bound_basic, truth);
    EXPECT_GE(bounds.bound_objective, truth);
    EXPECT_GE(bounds.bound_lse, truth);
}

TEST(Bounds, SoundAlongSolverTrajectories)
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 15; ++trial) {
        const auto problem = fixtures::random_problem(rng, 15, fixtures::random_sizes(rng, 4, 3));
        const bool sparse = trial % 2 == 1;
        const double lam = 0.25 * lambda_max(problem);
        const auto penalty =
            sparse ? PenaltySpec::sparse_group_lasso(lam, 0.2 * lam) : PenaltySpec::group_lasso(lam);
        oracle::OracleOptions oopts;
        oopts.tol = 1e-10;
        const auto ref = oracle::fista_solve(problem, penalty, oopts);
        ASSERT_TRUE(ref.converged);
        const Vector yhat = problem.design() * ref.beta.values();
        const Certifier certifier(problem, penalty);

        SolveOptions options;
        options.tol = 1e-10;
        options.on_sweep = [&](std::size_t, const Coefficients& beta) {
            const auto cert = certifier.certify(beta);
            const auto bounds = certifier.bounds(beta, cert, ref.beta);
            const double err = (problem.design() * beta.values() - yhat).squaredNorm();
            const double slack = 1e-8 * (1.0 + yhat.squaredNorm());
            EXPECT_LE(err, bounds.bound_objective + slack);
            EXPECT_LE(err, bounds.bound_lse + slack);
            EXPECT_LE(err, *bounds.bound_basic + slack);
            EXPECT_LE(bounds.best(), bounds.bound_objective);
        };
        if (sparse) {
            solve_sgl(problem, penalty, options);
        } else {
            solve(problem, penalty, options);
        }
    }
}

TEST(Bounds, RadiiDominateTheSolutionNorm)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto problem = fixtures::random_problem(rng, 8, {2, 2, 2, 2});
        const double lam = 0.2 * lambda_max(problem);
        const auto penalty =
            trial % 2 ? PenaltySpec::sparse_group_lasso(lam, 0.3 * lam) : PenaltySpec::group_lasso(lam);
        const auto ref = oracle::fista_solve(problem, penalty);
        const auto ls = ls_quantities(problem);
        const auto radii = norm_radii(problem, penalty, Coefficients::zeros(problem), ls);
        const double norm = ref.beta.values().norm();
        EXPECT_LE(norm, radii.objective + 1e-8);
        EXPECT_LE(norm, radii.lse + 1e-8);
    }
}
