#pragma once
#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>
#include "model.hpp"

namespace gls {

struct SolveOptions
{
    /// Stop once max_j |beta_j^(t) - beta_j^(t-1)| <= tol over a full sweep.
    double tol = 1e-8;
    std::size_t max_sweeps = 100000;
    /// Starting point; zero when unset.
    std::optional<Coefficients> initial;
    /// Called with (sweep, beta) at the start (sweep 0) and after every sweep.
    std::function<void(std::size_t, const Coefficients&)> on_sweep;
};

struct SolveTrace
{
    /// Entry t is the objective after t sweeps; entry 0 is the starting point.
    std::vector<double> objective_per_sweep;
    std::size_t sweeps = 0;
    bool converged = false;
    std::chrono::duration<double> wall_time{0.0};
    std::size_t group_updates = 0;
    /// SSLS only: sign vectors handed to the signed subproblem.
    std::size_t sign_candidates = 0;
    /// SSLS only: off-support checks that passed only thanks to the slack.
    std::size_t boundary_slack_accepts = 0;
};

struct SolveResult
{
    Coefficients beta;
    SolveTrace trace;
};

namespace detail {

/**
 * Cyclic block coordinate descent over groups 0..K-1.
 *
 * `update(k, partial_residual, beta, trace)` returns the new beta_k. The full
 * residual is maintained incrementally and recomputed after every sweep.
 */
template <class GroupUpdate>
SolveResult run_block_descent(const GroupedProblem& problem, const PenaltySpec& penalty,
                              const SolveOptions& options, GroupUpdate&& update)
{
    if (!(options.tol > 0.0)) throw InvalidInput("tolerance must be positive");
    if (options.max_sweeps < 1) throw InvalidInput("max_sweeps must be positive");
    const auto started = std::chrono::steady_clock::now();

    SolveResult out{options.initial.value_or(Coefficients::zeros(problem)), {}};
    Coefficients& beta = out.beta;
    SolveTrace& trace = out.trace;
    require_compatible(problem, beta);

    const double group_w = penalty.group_weight();
    const double l1_w = penalty.l1_weight();
    auto penalized = [&]() { return objective_precise(problem, group_w, l1_w, beta.values()); };

    ResidualTracker residual(problem, beta);
    trace.objective_per_sweep.push_back(penalized());
    if (options.on_sweep) options.on_sweep(0, beta);

    Vector previous;
    while (trace.sweeps < options.max_sweeps) {
        previous = beta.values();
        for (Index k = 0; k < problem.num_groups(); ++k) {
            const PartialResidual partial = residual.partial(beta, k);
            Vector next = update(k, partial, beta, trace);
            ++trace.group_updates;
            residual.commit(partial, k, next);
            beta.group(k) = next;
        }
        ++trace.sweeps;
        residual.refresh(beta);
        trace.objective_per_sweep.push_back(penalized());
        if (options.on_sweep) options.on_sweep(trace.sweeps, beta);
        const double change = (beta.values() - previous).cwiseAbs().maxCoeff();
        if (change <= options.tol) {
            trace.converged = true;
            break;
        }
    }
    trace.wall_time = std::chrono::steady_clock::now() - started;
    return out;
}

} // namespace detail
} // namespace gls
