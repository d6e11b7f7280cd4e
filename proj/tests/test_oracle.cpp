#include <cmath>
#include <random>
#include <gtest/gtest.h>
#include <gls/oracle.hpp>
#include <gls/sls.hpp>
#include "test_helpers.hpp"

using namespace gls;

namespace {

Vector vec(std::initializer_list<double> values)
{
    return Eigen::Map<const Vector>(values.begin(), static_cast<Index>(values.size()));
}

} // namespace

TEST(Prox, Examples)
{
    EXPECT_TRUE(oracle::prox_group(vec({3.0, 4.0}), 1.0, 2.5).isApprox(vec({1.5, 2.0})));
    EXPECT_TRUE(oracle::prox_group(vec({3.0, 4.0}), 1.0, 5.0).isZero(0.0));
    EXPECT_NEAR(oracle::prox_sparse_group(vec({2.0}), 1.0, 0.5, 0.5)(0), 1.0, 1e-15);
    EXPECT_TRUE(oracle::prox_sparse_group(vec({2.0, -0.3}), 1.0, 0.1, 0.5).isApprox(vec({1.4, 0.0})));
}

TEST(Fista, ZeroTrap)
{
    const auto problem = fixtures::zero_trap_problem();
    const auto res = oracle::fista_solve(problem, PenaltySpec::group_lasso(1.0));
    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.certificate_norm, 1e-10);
    const double v = 1.0 - std::sqrt(2.0) / 2.0;
    EXPECT_NEAR(res.beta.values()(0), v, 1e-9);
    EXPECT_NEAR(res.beta.values()(1), v, 1e-9);
}

TEST(Fista, MonotoneAndStartsAnywhere)
{
    std::mt19937_64 rng(6);
    const auto problem = fixtures::random_problem(rng, 10, {3, 2});
    const auto penalty = PenaltySpec::group_lasso(0.3 * lambda_max(problem));
    oracle::OracleOptions options;
    options.initial = Coefficients(Vector::Constant(5, 3.0), problem.groups());
    const auto res = oracle::fista_solve(problem, penalty, options);
    EXPECT_TRUE(res.converged);
    const auto cold = oracle::fista_solve(problem, penalty);
    EXPECT_LE((problem.design() * (res.beta.values() - cold.beta.values())).norm(), 1e-7);
    options.tol = 0.0;
    EXPECT_THROW(oracle::fista_solve(problem, penalty, options), InvalidInput);
}

TEST(GridRefine, ZeroTrap)
{
    const auto problem = fixtures::zero_trap_problem();
    const auto penalty = PenaltySpec::group_lasso(1.0);
    const auto beta = oracle::grid_refine(problem, penalty, {{-2.0, 2.0}, {-2.0, 2.0}}, 1e-2);
    const double v = 1.0 - std::sqrt(2.0) / 2.0;
    EXPECT_NEAR(beta.values()(0), v, 1e-4);
    EXPECT_NEAR(beta.values()(1), v, 1e-4);
}

TEST(GridRefine, UnivariateSparse)
{
    const GroupedProblem problem(vec({2.0}), Matrix::Ones(1, 1), GroupPartition({1}));
    const auto beta =
        oracle::grid_refine(problem, PenaltySpec::sparse_group_lasso(0.5, 0.5), {{-3.0, 3.0}}, 1e-2);
    EXPECT_NEAR(beta.values()(0), 1.0, 1e-6);
}

TEST(GridRefine, FindsExactZeros)
{
    const GroupedProblem problem(vec({0.3, 2.0}), Matrix::Identity(2, 2), GroupPartition({1, 1}));
    const auto beta = oracle::grid_refine(problem, PenaltySpec::group_lasso(0.5), {{-1.0, 1.0}, {-1.0, 3.0}}, 0.03);
    EXPECT_EQ(beta.values()(0), 0.0);
    EXPECT_NEAR(beta.values()(1), 1.5, 1e-6);
}

TEST(GridRefine, Guards)
{
    std::mt19937_64 rng(1);
    const auto big = fixtures::random_problem(rng, 5, {2, 2});
    EXPECT_THROW(oracle::grid_refine(big, PenaltySpec::group_lasso(1.0), {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, 0.1),
                 InvalidInput);
    const auto small = fixtures::zero_trap_problem();
    EXPECT_THROW(oracle::grid_refine(small, PenaltySpec::group_lasso(1.0), {{-1, 1}}, 0.1), DimensionMismatch);
    EXPECT_THROW(oracle::grid_refine(small, PenaltySpec::group_lasso(1.0), {{-1, 1}, {-1, 1}}, 0.0), InvalidInput);
}

TEST(GridRefine, AgreesWithFista)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto problem = fixtures::random_problem(rng, 6, trial % 2 ? std::vector<Index>{1, 2} : std::vector<Index>{3});
        const double lam = 0.3 * lambda_max(problem);
        const auto penalty =
            trial % 3 == 0 ? PenaltySpec::sparse_group_lasso(lam, 0.5 * lam) : PenaltySpec::group_lasso(lam);
        const auto ref = oracle::fista_solve(problem, penalty);
        std::vector<std::array<double, 2>> box;
        for (Index j = 0; j < problem.p(); ++j) {
            const double c = ref.beta.values()(j);
            box.push_back({c - 1.0, c + 1.0});
        }
        const auto grid = oracle::grid_refine(problem, penalty, box, 0.05);
        EXPECT_LE(objective(problem, penalty, grid) - objective(problem, penalty, ref.beta), 1e-9);
        EXPECT_LE((grid.values() - ref.beta.values()).cwiseAbs().maxCoeff(), 1e-4);
    }
}
