#pragma once
#include <vector>
#include "block_descent.hpp"
#include "linesearch.hpp"
#include "model.hpp"
#include "spectral.hpp"

namespace gls {

/**
 * Exact minimizer over beta_k of 1/2 ||R_k - X_k beta_k||^2 + lambda ||beta_k||_2.
 *
 * Zero when ||X_k^T R_k||_2 <= lambda. Otherwise the group spectrum is
 * fetched (computed on first use), v = U X_k^T R_k is formed and one
 * secular-equation solve gives beta_k = U^T (D + lambda/r I)^{-1} v.
 */
inline Vector group_update(const GroupedProblem& problem, Index k, const PartialResidual& residual,
                           double lambda, SpectralCache& spectra)
{
    if (!(lambda > 0.0)) throw InvalidInput("group update needs lambda > 0");
    auto block = problem.block(k);
    const Vector g = block.transpose() * residual.r;
    if (g.norm() <= lambda) return Vector::Zero(block.cols());

    const auto spectrum = spectra.full(k);
    LineSearchProblem lsp{spectrum->d, spectrum->u * g, lambda};
    lsp = clamp_null_directions(std::move(lsp));
    // Clamping can only remove mass that is round-off; if it removes enough to
    // land on the zero side, zero is the exact answer to working precision.
    if (!(f_eval(lsp, 0.0) > 1.0)) return Vector::Zero(block.cols());
    const LineSearchResult root = solve_secular(lsp);
    return spectrum->u.transpose() * root.alpha_rotated;
}

/// Block coordinate descent for the group lasso with exact group updates,
/// using a caller-owned spectral cache (shared e.g. along a path).
inline SolveResult solve(const GroupedProblem& problem, const PenaltySpec& penalty,
                         const SolveOptions& options, SpectralCache& spectra)
{
    if (penalty.is_sparse()) throw InvalidInput("SLS solves the group lasso; use solve_sgl");
    const double lambda = penalty.group_weight();
    return detail::run_block_descent(
        problem, penalty, options,
        [&](Index k, const PartialResidual& r, const Coefficients&, SolveTrace&) {
            return group_update(problem, k, r, lambda, spectra);
        });
}

inline SolveResult solve(const GroupedProblem& problem, const PenaltySpec& penalty,
                         const SolveOptions& options = {})
{
    SpectralCache spectra(problem);
    return solve(problem, penalty, options, spectra);
}

/// max_k ||X_k^T y||_2: the smallest penalty at which beta = 0 is optimal.
inline double lambda_max(const GroupedProblem& problem)
{
    double best = 0.0;
    for (Index k = 0; k < problem.num_groups(); ++k) {
        best = std::max(best, (problem.block(k).transpose() * problem.y()).norm());
    }
    return best;
}

/// Sum_k ||beta_k||_2, the constraint bound M with the same solution.
inline double bound_from_solution(const Coefficients& beta) { return group_norm_sum(beta); }

struct PathPoint
{
    double lambda;
    Coefficients beta;
    SolveTrace trace;
};

inline void require_decreasing_ladder(const std::vector<double>& lambdas)
{
    if (lambdas.empty()) throw InvalidInput("penalty sequence is empty");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw InvalidInput("penalty sequence must be positive");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
            throw InvalidInput("penalty sequence must be strictly decreasing");
        }
    }
}

/**
 * Warm-started path over a strictly decreasing penalty sequence. The first
 * solve starts from options.initial (zero by default); each later solve
 * starts from the previous solution. Spectra are shared across the path.
 */
inline std::vector<PathPoint> solve_path(const GroupedProblem& problem, const std::vector<double>& lambdas,
                                         const SolveOptions& options = {})
{
    require_decreasing_ladder(lambdas);
    SpectralCache spectra(problem);
    std::vector<PathPoint> path;
    path.reserve(lambdas.size());
    SolveOptions step = options;
    for (double lambda : lambdas) {
        SolveResult result = solve(problem, PenaltySpec::group_lasso(lambda), step, spectra);
        step.initial = result.beta;
        path.push_back({lambda, std::move(result.beta), std::move(result.trace)});
    }
    return path;
}

} // namespace gls
