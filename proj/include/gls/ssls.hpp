#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>
#include "block_descent.hpp"
#include "linesearch.hpp"
#include "model.hpp"
#include "spectral.hpp"

namespace gls {

/// Largest group SSLS accepts: up to 3^12 sign vectors per group update.
inline constexpr Index max_signed_group_size = 12;
/// A coordinate with |alpha_j| <= this * ||alpha||_2 has no sign.
inline constexpr double sign_zero_ratio = 1e-12;
/// Absolute slack on the off-support stationarity test.
inline constexpr double boundary_slack = 1e-10;

/// sign(x) max(|x| - threshold, 0).
inline double soft_threshold(double x, double threshold)
{
    const double mag = std::abs(x) - threshold;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

inline Vector soft_threshold(const Vector& x, double threshold)
{
    return x.unaryExpr([threshold](double v) { return soft_threshold(v, threshold); });
}

/// True iff beta_k = 0 is the group optimum: ||{g}_{lambda2}||_2 <= lambda1.
inline bool zero_check_sgl(const Vector& g, double lambda1, double lambda2)
{
    return soft_threshold(g, lambda2).norm() <= lambda1;
}

/// Sign pattern over {-1, 0, +1}; its support is {j : s_j != 0}.
struct SignVector
{
    std::vector<int> s;

    static SignVector of(const Vector& x)
    {
        SignVector out;
        out.s.resize(static_cast<std::size_t>(x.size()));
        for (Index j = 0; j < x.size(); ++j) out.s[j] = (x(j) > 0.0) - (x(j) < 0.0);
        return out;
    }

    Index size() const { return static_cast<Index>(s.size()); }

    std::vector<Index> support() const
    {
        std::vector<Index> out;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (s[j] != 0) out.push_back(static_cast<Index>(j));
        }
        return out;
    }

    bool operator==(const SignVector&) const = default;

    std::string str() const
    {
        std::string out;
        for (int v : s) out += v > 0 ? '+' : (v < 0 ? '-' : '0');
        return out;
    }
};

/**
 * Candidate sign vectors for one group, without repetition.
 *
 * Order: the previous sign pattern (if given), then sign({g}_{lambda2}), then
 * every other pattern by increasing Hamming distance from the latter, ties
 * broken lexicographically with +1 < 0 < -1 per coordinate.
 */
class SignOrder
{
public:
    SignOrder(const Vector& g, double lambda2, std::optional<SignVector> previous = std::nullopt)
        : center_(SignVector::of(soft_threshold(g, lambda2))), previous_(std::move(previous))
    {
        if (previous_ && previous_->size() != center_.size()) {
            throw DimensionMismatch("previous sign vector has the wrong length");
        }
    }

    const SignVector& center() const { return center_; }

    /// Calls visit(sigma) for each candidate until it returns true.
    /// Returns whether a visit returned true.
    template <class Visitor>
    bool visit(Visitor&& visit) const
    {
        if (previous_ && visit(*previous_)) return true;
        if (!(previous_ && *previous_ == center_) && visit(center_)) return true;
        SignVector buffer = center_;
        for (Index dist = 1; dist <= center_.size(); ++dist) {
            if (ring(buffer, 0, dist, visit)) return true;
        }
        return false;
    }

    std::vector<SignVector> all() const
    {
        std::vector<SignVector> out;
        visit([&](const SignVector& s) {
            out.push_back(s);
            return false;
        });
        return out;
    }

private:
    // Depth-first walk over coordinates pos.., choosing +1, 0, -1 in that order,
    // with exactly `remaining` coordinates differing from the center.
    template <class Visitor>
    bool ring(SignVector& buffer, Index pos, Index remaining, Visitor& visit) const
    {
        const Index left = center_.size() - pos;
        if (remaining > left) return false;
        if (pos == center_.size()) {
            if (previous_ && buffer == *previous_) return false;
            return visit(static_cast<const SignVector&>(buffer));
        }
        const auto p = static_cast<std::size_t>(pos);
        for (int value : {1, 0, -1}) {
            const bool differs = value != center_.s[p];
            if (differs && remaining == 0) continue;
            buffer.s[p] = value;
            if (ring(buffer, pos + 1, remaining - (differs ? 1 : 0), visit)) {
                buffer.s[p] = center_.s[p];
                return true;
            }
        }
        buffer.s[p] = center_.s[p];
        return false;
    }

    SignVector center_;
    std::optional<SignVector> previous_;
};

/// Convenience: the full candidate list.
inline std::vector<SignVector> sign_order(const Vector& g, double lambda2,
                                          std::optional<SignVector> previous = std::nullopt)
{
    return SignOrder(g, lambda2, std::move(previous)).all();
}

enum class SignedStatus
{
    Feasible,
    NoRoot,
    InfeasibleSign,
    InfeasibleBoundary,
};

inline const char* to_string(SignedStatus status)
{
    switch (status) {
    case SignedStatus::Feasible: return "feasible";
    case SignedStatus::NoRoot: return "no-root";
    case SignedStatus::InfeasibleSign: return "infeasible-sign";
    case SignedStatus::InfeasibleBoundary: return "infeasible-boundary";
    }
    return "unknown";
}

struct SignedSubproblemResult
{
    SignedStatus status = SignedStatus::NoRoot;
    std::optional<double> r;
    /// Full-length group vector, zero off the support.
    std::optional<Vector> alpha;
    /// Off-support stationarity held only within the slack.
    bool used_slack = false;
};

/**
 * Group subproblem with the sign pattern fixed to sigma.
 *
 * Solves the secular equation for v_sigma = (X_k)_J^T R_k - lambda2 sigma_J
 * in the eigenbasis of (X_k)_J^T (X_k)_J, then verifies that the candidate
 * has sign pattern sigma on J and that every j outside J is stationary at
 * zero: |(X_k)_j^T (R_k - (X_k)_J alpha_J)| <= lambda2.
 */
inline SignedSubproblemResult signed_subproblem(const GroupedProblem& problem, Index k,
                                                const PartialResidual& residual, const SignVector& sigma,
                                                double lambda1, double lambda2, SpectralCache& spectra)
{
    auto block = problem.block(k);
    if (sigma.size() != block.cols()) throw DimensionMismatch("sign vector length differs from group size");
    const std::vector<Index> support = sigma.support();
    if (support.empty()) throw InvalidInput("sign vector must have a nonempty support");
    const auto q = static_cast<Index>(support.size());

    const Matrix cols = subset_columns(problem, k, support);
    Vector shifted = cols.transpose() * residual.r;
    for (Index j = 0; j < q; ++j) shifted(j) -= lambda2 * sigma.s[static_cast<std::size_t>(support[j])];

    const auto spectrum = spectra.subset(k, support);
    LineSearchProblem lsp = snap_null_eigenvalues({spectrum->d, spectrum->u * shifted, lambda1});

    SignedSubproblemResult out;
    if (!(f_eval(lsp, 0.0) > 1.0) || !(f_limit(lsp) < 1.0)) {
        out.status = SignedStatus::NoRoot;
        return out;
    }
    const LineSearchResult root = solve_secular(lsp);
    const Vector alpha_j = spectrum->u.transpose() * root.alpha_rotated;
    Vector alpha = Vector::Zero(block.cols());
    for (Index j = 0; j < q; ++j) alpha(support[j]) = alpha_j(j);
    out.r = root.r;
    out.alpha = alpha;

    const double zero_level = sign_zero_ratio * alpha_j.norm();
    for (Index j = 0; j < q; ++j) {
        const int want = sigma.s[static_cast<std::size_t>(support[j])];
        if (std::abs(alpha_j(j)) <= zero_level || (alpha_j(j) > 0.0 ? 1 : -1) != want) {
            out.status = SignedStatus::InfeasibleSign;
            return out;
        }
    }

    if (q < block.cols()) {
        const Vector fit_residual = residual.r - cols * alpha_j;
        for (Index j = 0; j < block.cols(); ++j) {
            if (sigma.s[static_cast<std::size_t>(j)] != 0) continue;
            const double corr = std::abs(block.col(j).dot(fit_residual));
            if (corr > lambda2 + boundary_slack) {
                out.status = SignedStatus::InfeasibleBoundary;
                return out;
            }
            if (corr > lambda2) out.used_slack = true;
        }
    }
    out.status = SignedStatus::Feasible;
    return out;
}

struct SignedGroupUpdate
{
    Vector beta;
    std::size_t candidates = 0;
    bool used_slack = false;
    std::optional<SignVector> accepted;
};

/**
 * Exact group minimizer for the sparse group lasso: zero check, then sign
 * vectors in SignOrder until one is feasible.
 */
inline SignedGroupUpdate signed_group_update(const GroupedProblem& problem, Index k,
                                             const PartialResidual& residual, double lambda1, double lambda2,
                                             SpectralCache& spectra,
                                             const std::optional<SignVector>& previous = std::nullopt)
{
    auto block = problem.block(k);
    if (block.cols() > max_signed_group_size) {
        throw SolverRefusal("SSLS refuses group " + std::to_string(k + 1) + " of size " +
                            std::to_string(block.cols()) + " (limit " +
                            std::to_string(max_signed_group_size) + ")");
    }
    const Vector g = block.transpose() * residual.r;
    SignedGroupUpdate out{Vector::Zero(block.cols()), 0, false, std::nullopt};
    if (zero_check_sgl(g, lambda1, lambda2)) return out;

    std::optional<SignVector> prev = previous;
    if (prev && prev->support().empty()) prev.reset();
    const SignOrder order(g, lambda2, prev);
    const bool found = order.visit([&](const SignVector& sigma) {
        if (sigma.support().empty()) return false;
        ++out.candidates;
        SignedSubproblemResult res = signed_subproblem(problem, k, residual, sigma, lambda1, lambda2, spectra);
        if (res.status != SignedStatus::Feasible) return false;
        out.beta = std::move(*res.alpha);
        out.used_slack = res.used_slack;
        out.accepted = sigma;
        return true;
    });
    if (!found) {
        throw InternalConsistencyError("SSLS: no feasible sign vector for group " + std::to_string(k + 1));
    }
    return out;
}

/// Block coordinate descent for the sparse group lasso with exact signed group updates.
inline SolveResult solve_sgl(const GroupedProblem& problem, const PenaltySpec& penalty,
                             const SolveOptions& options, SpectralCache& spectra)
{
    if (!penalty.is_sparse()) throw InvalidInput("SSLS solves the sparse group lasso; use solve");
    if (problem.groups().max_size() > max_signed_group_size) {
        throw SolverRefusal("SSLS refuses groups larger than " + std::to_string(max_signed_group_size) +
                            " (largest is " + std::to_string(problem.groups().max_size()) + ")");
    }
    const double lambda1 = penalty.group_weight();
    const double lambda2 = penalty.l1_weight();
    return detail::run_block_descent(
        problem, penalty, options,
        [&](Index k, const PartialResidual& r, const Coefficients& beta, SolveTrace& trace) {
            std::optional<SignVector> previous;
            if (!beta.group_is_zero(k)) previous = SignVector::of(beta.group(k));
            SignedGroupUpdate update = signed_group_update(problem, k, r, lambda1, lambda2, spectra, previous);
            trace.sign_candidates += update.candidates;
            trace.boundary_slack_accepts += update.used_slack ? 1 : 0;
            return std::move(update.beta);
        });
}

inline SolveResult solve_sgl(const GroupedProblem& problem, const PenaltySpec& penalty,
                             const SolveOptions& options = {})
{
    SpectralCache spectra(problem);
    return solve_sgl(problem, penalty, options, spectra);
}

} // namespace gls
