#pragma once
#include <cmath>
#include <limits>
#include <vector>
#include "model.hpp"

namespace gls {

/**
 * Data of the secular equation
 *
 *     f(r) = sum_j v_j^2 / (d_j r + lambda)^2 = 1,
 *
 * whose positive root is the 2-norm of the exact group minimizer of
 * 1/2 ||b - A a||^2 + lambda ||a||_2, with A^T A = U^T diag(d) U and v = U A^T b.
 */
struct LineSearchProblem
{
    Vector d;
    Vector v;
    double lambda = 1.0;
};

struct LineSearchResult
{
    double r = 0.0;
    /// (D + lambda / r I)^{-1} v, still in the eigenbasis.
    Vector alpha_rotated;
    int newton_iters = 0;
    int bisection_iters = 0;
    double residual = 0.0;
};

struct SecularOptions
{
    double tol = 1e-12;
    int max_iters = 10000;
    /// When set, receives every Newton iterate starting with r = 0.
    std::vector<double>* iterate_log = nullptr;
};

inline constexpr double null_eigenvalue_ratio = 1e-12;

inline void validate(const LineSearchProblem& lsp)
{
    if (lsp.d.size() != lsp.v.size() || lsp.d.size() < 1) {
        throw DimensionMismatch("secular equation needs len(d) == len(v) >= 1");
    }
    if (!(lsp.lambda > 0.0)) throw InvalidInput("secular equation needs lambda > 0");
    if ((lsp.d.array() < 0.0).any()) throw InvalidInput("secular equation needs nonnegative eigenvalues");
}

inline double null_threshold(const Vector& d)
{
    return null_eigenvalue_ratio * (d.size() ? d.maxCoeff() : 0.0);
}

/**
 * Zero v_j on numerically null directions (d_j <= 1e-12 max d).
 * For v = U A^T b those components vanish in exact arithmetic.
 */
inline LineSearchProblem clamp_null_directions(LineSearchProblem lsp)
{
    const double thresh = null_threshold(lsp.d);
    for (Index j = 0; j < lsp.d.size(); ++j) {
        if (lsp.d(j) <= thresh) lsp.v(j) = 0.0;
    }
    return lsp;
}

/**
 * Snap numerically null eigenvalues to exactly zero but keep v.
 * Used when v is shifted off the range of A^T, so f has a positive floor.
 */
inline LineSearchProblem snap_null_eigenvalues(LineSearchProblem lsp)
{
    const double thresh = null_threshold(lsp.d);
    for (Index j = 0; j < lsp.d.size(); ++j) {
        if (lsp.d(j) <= thresh) lsp.d(j) = 0.0;
    }
    return lsp;
}

inline double f_eval(const LineSearchProblem& lsp, double r)
{
    double sum = 0.0;
    for (Index j = 0; j < lsp.d.size(); ++j) {
        const double denom = lsp.d(j) * r + lsp.lambda;
        sum += lsp.v(j) * lsp.v(j) / (denom * denom);
    }
    return sum;
}

inline double f_derivative(const LineSearchProblem& lsp, double r)
{
    double sum = 0.0;
    for (Index j = 0; j < lsp.d.size(); ++j) {
        const double denom = lsp.d(j) * r + lsp.lambda;
        sum += lsp.d(j) * lsp.v(j) * lsp.v(j) / (denom * denom * denom);
    }
    return -2.0 * sum;
}

/// lim_{r -> inf} f(r): contribution of directions with d_j == 0.
inline double f_limit(const LineSearchProblem& lsp)
{
    double sum = 0.0;
    for (Index j = 0; j < lsp.d.size(); ++j) {
        if (lsp.d(j) == 0.0) sum += lsp.v(j) * lsp.v(j);
    }
    return sum / (lsp.lambda * lsp.lambda);
}

/// v_j r / (d_j r + lambda), i.e. (D + lambda/r I)^{-1} v.
inline Vector rotated_solution(const LineSearchProblem& lsp, double r)
{
    Vector alpha(lsp.v.size());
    for (Index j = 0; j < lsp.v.size(); ++j) {
        alpha(j) = lsp.v(j) * r / (lsp.d(j) * r + lsp.lambda);
    }
    return alpha;
}

/**
 * Root of f(r) = 1 on r > 0.
 *
 * Requires f(0) > 1 and f(inf) < 1. Newton's method from r = 0: f is convex
 * and decreasing, so the iterates increase monotonically to the root.
 * Bisection takes over if Newton stalls in floating point.
 */
inline LineSearchResult solve_secular(const LineSearchProblem& lsp, const SecularOptions& opts = {})
{
    validate(lsp);
    if (!(f_eval(lsp, 0.0) > 1.0)) {
        throw InvalidInput("secular equation has no positive root: f(0) <= 1");
    }
    if (!(f_limit(lsp) < 1.0)) {
        throw InvalidInput("secular equation has no positive root: f(inf) >= 1");
    }

    LineSearchResult out;
    double r = 0.0;
    double fr = f_eval(lsp, r);
    double best_r = r;
    double best_gap = std::abs(fr - 1.0);
    if (opts.iterate_log) opts.iterate_log->push_back(r);

    auto finish = [&](double root, double froot) {
        out.r = root;
        out.residual = std::abs(froot - 1.0);
        out.alpha_rotated = rotated_solution(lsp, root);
        return out;
    };

    int iters = 0;
    bool stalled = false;
    while (iters < opts.max_iters) {
        if (std::abs(fr - 1.0) <= opts.tol) return finish(r, fr);
        const double slope = f_derivative(lsp, r);
        if (!(slope < 0.0)) {
            stalled = true;
            break;
        }
        const double next = std::max(0.0, r - (fr - 1.0) / slope);
        ++iters;
        ++out.newton_iters;
        if (!std::isfinite(next) || next == r) {
            stalled = true;
            break;
        }
        r = next;
        fr = f_eval(lsp, r);
        if (opts.iterate_log) opts.iterate_log->push_back(r);
        if (std::abs(fr - 1.0) < best_gap) {
            best_gap = std::abs(fr - 1.0);
            best_r = r;
        }
    }
    if (!stalled) {
        throw NumericalFailure("secular Newton iteration cap exceeded", best_r);
    }

    // Bracket [lo, hi] with f(lo) > 1 > f(hi).
    double lo = 0.0;
    double hi = std::max(best_r, 1.0);
    if (fr > 1.0) lo = r;
    while (f_eval(lsp, hi) >= 1.0) {
        lo = hi;
        hi *= 2.0;
        if (++iters >= opts.max_iters || !std::isfinite(hi)) {
            throw NumericalFailure("secular bracket search failed", best_r);
        }
    }
    while (iters < opts.max_iters) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f_eval(lsp, mid);
        ++iters;
        ++out.bisection_iters;
        if (std::abs(fm - 1.0) < best_gap) {
            best_gap = std::abs(fm - 1.0);
            best_r = mid;
        }
        if (std::abs(fm - 1.0) <= opts.tol || mid == lo || mid == hi) return finish(mid, fm);
        (fm > 1.0 ? lo : hi) = mid;
    }
    throw NumericalFailure("secular bisection iteration cap exceeded", best_r);
}

} // namespace gls
