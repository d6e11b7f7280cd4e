#pragma once
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>
#include "diagnostics.hpp"
#include "model.hpp"

// Reference solvers used to check the block coordinate descent solvers.
// Nothing here touches the line-search or spectral code.

namespace gls::oracle {

/// z max(0, 1 - t lambda / ||z||_2).
inline Vector prox_group(const Vector& z, double t, double lambda)
{
    const double norm = z.norm();
    const double thresh = t * lambda;
    if (norm <= thresh) return Vector::Zero(z.size());
    return z * (1.0 - thresh / norm);
}

/// Element-wise soft threshold by t lambda2, then group shrink by t lambda1.
inline Vector prox_sparse_group(const Vector& z, double t, double lambda1, double lambda2)
{
    const double thresh = t * lambda2;
    const Vector shrunk = z.unaryExpr([thresh](double v) {
        const double mag = std::abs(v) - thresh;
        return mag > 0.0 ? std::copysign(mag, v) : 0.0;
    });
    return prox_group(shrunk, t, lambda1);
}

struct OracleOptions
{
    /// Stop once the certificate norm is at most tol.
    double tol = 1e-10;
    std::size_t max_iters = 2'000'000;
    /// Step size; 1 / (largest eigenvalue of X^T X) when unset.
    std::optional<double> step;
    /// Iterations between certificate evaluations.
    std::size_t check_every = 10;
    std::optional<Coefficients> initial;
};

struct OracleResult
{
    Coefficients beta;
    std::size_t iterations = 0;
    bool converged = false;
    double certificate_norm = 0.0;
};

/// Largest eigenvalue of X^T X by power iteration (1e-6 relative).
inline double lipschitz_constant(const Matrix& x, std::uint64_t seed = 12345)
{
    if (x.cols() == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Vector v = Vector::NullaryExpr(x.cols(), [&]() { return unif(rng); });
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Vector next = x.transpose() * (x * v);
        const double norm = next.norm();
        if (norm == 0.0) return 0.0;
        const double prev = estimate;
        estimate = norm;
        v = next / norm;
        if (it > 0 && std::abs(estimate - prev) <= 1e-6 * estimate) break;
    }
    return estimate;
}

/**
 * FISTA with function-value restart.
 *
 * Each accepted iterate has objective no larger than the previous one: when
 * the momentum step would increase the objective, momentum is reset and a
 * plain proximal-gradient step is taken from the current iterate instead.
 */
inline OracleResult fista_solve(const GroupedProblem& problem, const PenaltySpec& penalty,
                                const OracleOptions& options = {})
{
    if (!(options.tol > 0.0)) throw InvalidInput("oracle tolerance must be positive");
    const Matrix& x = problem.design();
    const Vector& y = problem.y();
    const GroupPartition& groups = problem.groups();
    const double lambda1 = penalty.group_weight();
    const double lambda2 = penalty.l1_weight();
    const bool sparse = penalty.is_sparse();

    double step = 0.0;
    if (options.step) {
        step = *options.step;
    } else {
        // Power iteration approaches the top eigenvalue from below; pad it.
        const double lip = lipschitz_constant(x) * (1.0 + 1e-4);
        step = lip > 0.0 ? 1.0 / lip : 1.0;
    }

    auto prox = [&](const Vector& z) {
        Vector out(z.size());
        for (Index k = 0; k < groups.num_groups(); ++k) {
            const Vector zk = z.segment(groups.start(k), groups.size(k));
            out.segment(groups.start(k), groups.size(k)) =
                sparse ? prox_sparse_group(zk, step, lambda1, lambda2) : prox_group(zk, step, lambda1);
        }
        return out;
    };
    auto value = [&](const Vector& b) { return detail::objective_raw(problem, lambda1, lambda2, b); };
    auto gradient = [&](const Vector& b) -> Vector { return x.transpose() * (x * b - y); };

    OracleResult out{options.initial.value_or(Coefficients::zeros(problem))};
    require_compatible(problem, out.beta);
    Vector current = out.beta.values();
    Vector extrapolated = current;
    double current_value = value(current);
    double momentum = 1.0;

    for (std::size_t it = 0; it < options.max_iters; ++it) {
        if (it % options.check_every == 0) {
            out.beta.values() = current;
            out.certificate_norm = certificate(problem, penalty, out.beta).w_norm;
            if (out.certificate_norm <= options.tol) {
                out.iterations = it;
                out.converged = true;
                return out;
            }
        }
        Vector next = prox(extrapolated - step * gradient(extrapolated));
        double next_value = value(next);
        if (next_value > current_value) {
            momentum = 1.0;
            next = prox(current - step * gradient(current));
            next_value = value(next);
        }
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        extrapolated = next + ((momentum - 1.0) / next_momentum) * (next - current);
        momentum = next_momentum;
        current = std::move(next);
        current_value = next_value;
    }
    out.beta.values() = current;
    out.certificate_norm = certificate(problem, penalty, out.beta).w_norm;
    out.iterations = options.max_iters;
    out.converged = out.certificate_norm <= options.tol;
    return out;
}

/// Golden-section minimum of a univariate function on [lo, hi].
inline double golden_section(const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-12)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fn(d);
        }
    }
    const double mid = 0.5 * (a + b);
    // The bracket ends and zero are candidates too when the minimum sits on a kink;
    // zero wins ties.
    double best = mid;
    double best_value = fn(mid);
    for (double cand : {a, b, 0.0}) {
        if (cand < lo || cand > hi) continue;
        const double v = fn(cand);
        if (v < best_value || (cand == 0.0 && v <= best_value)) {
            best_value = v;
            best = cand;
        }
    }
    return best;
}

/**
 * Brute-force minimizer for p <= 3: objective on a regular grid over `box`
 * with spacing `resolution`, then cyclic golden-section refinement of each
 * coordinate around the grid minimizer with a shrinking window.
 */
inline Coefficients grid_refine(const GroupedProblem& problem, const PenaltySpec& penalty,
                                const std::vector<std::array<double, 2>>& box, double resolution)
{
    const Index p = problem.p();
    if (p > 3) throw InvalidInput("grid_refine supports at most 3 coefficients");
    if (static_cast<Index>(box.size()) != p) throw DimensionMismatch("box needs one interval per coefficient");
    if (!(resolution > 0.0)) throw InvalidInput("grid resolution must be positive");
    const double lambda1 = penalty.group_weight();
    const double lambda2 = penalty.l1_weight();
    auto value = [&](const Vector& b) { return detail::objective_raw(problem, lambda1, lambda2, b); };

    std::vector<std::vector<double>> axes(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
        const auto [lo, hi] = box[static_cast<std::size_t>(j)];
        if (!(hi >= lo)) throw InvalidInput("grid box interval is empty");
        auto& axis = axes[static_cast<std::size_t>(j)];
        const auto steps = static_cast<long>(std::floor((hi - lo) / resolution + 1e-9));
        for (long i = 0; i <= steps; ++i) axis.push_back(lo + static_cast<double>(i) * resolution);
        if (lo < 0.0 && hi > 0.0) axis.push_back(0.0);
    }

    Vector best = Vector::Zero(p);
    double best_value = std::numeric_limits<double>::infinity();
    Vector point(p);
    std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
    while (true) {
        for (Index j = 0; j < p; ++j) point(j) = axes[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
        const double v = value(point);
        if (v < best_value) {
            best_value = v;
            best = point;
        }
        std::size_t j = 0;
        while (j < idx.size() && ++idx[j] == axes[j].size()) idx[j++] = 0;
        if (j == idx.size()) break;
    }

    double window = resolution;
    for (int pass = 0; pass < 200; ++pass) {
        const Vector before = best;
        for (Index j = 0; j < p; ++j) {
            Vector probe = best;
            auto along = [&](double c) {
                probe(j) = c;
                return value(probe);
            };
            best(j) = golden_section(along, best(j) - window, best(j) + window);
        }
        const double moved = (best - before).cwiseAbs().maxCoeff();
        // Keep the window wide while coordinates are still travelling.
        window = std::max(0.5 * window, 2.0 * moved);
        if (moved < 1e-13 && window < 1e-10) break;
    }
    return Coefficients(best, problem.groups());
}

} // namespace gls::oracle
