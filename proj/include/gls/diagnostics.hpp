#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <Eigen/QR>
#include "model.hpp"

namespace gls {

/**
 * A subgradient w of the objective at beta, w = -X^T(y - X beta) + lambda1 s + lambda2 t,
 * with its group-norm component s and (sparse case) 1-norm component t kept
 * so membership in the subdifferential can be checked.
 *
 * Within a group, s_k = beta_k / ||beta_k|| when beta_k != 0 and otherwise the
 * element of the unit ball making w_k shortest; t_j = sign(beta_j) on nonzero
 * coordinates and the minimizing element of [-1, 1] elsewhere.
 */
struct OptimalityCertificate
{
    Vector w;
    double w_norm = 0.0;
    Vector per_group_norms;
    Vector s;
    Vector t;
};

inline constexpr double certificate_slack = 1e-12;

namespace detail {

inline void check_membership(const Coefficients& beta, const OptimalityCertificate& cert, bool sparse)
{
    for (Index k = 0; k < beta.num_groups(); ++k) {
        const auto start = beta.groups().start(k);
        const auto size = beta.groups().size(k);
        if (cert.s.segment(start, size).norm() > 1.0 + certificate_slack) {
            throw InternalConsistencyError("certificate group component outside the unit ball");
        }
    }
    if (!sparse) return;
    for (Index j = 0; j < beta.size(); ++j) {
        const double b = beta.values()(j);
        const double t = cert.t(j);
        if (std::abs(t) > 1.0 + certificate_slack || (b != 0.0 && t != (b > 0.0 ? 1.0 : -1.0))) {
            throw InternalConsistencyError("certificate 1-norm component violates its constraint");
        }
    }
}

} // namespace detail

inline OptimalityCertificate certificate(const GroupedProblem& problem, const PenaltySpec& penalty,
                                         const Coefficients& beta)
{
    require_compatible(problem, beta);
    const double lambda1 = penalty.group_weight();
    const double lambda2 = penalty.l1_weight();
    const bool sparse = penalty.is_sparse();

    const Vector grad = -(problem.design().transpose() * (problem.y() - problem.design() * beta.values()));
    OptimalityCertificate cert;
    cert.w.resize(problem.p());
    cert.s = Vector::Zero(problem.p());
    cert.t = Vector::Zero(problem.p());
    cert.per_group_norms.resize(problem.num_groups());

    for (Index k = 0; k < problem.num_groups(); ++k) {
        const Index start = problem.groups().start(k);
        const Index size = problem.groups().size(k);
        const auto b = beta.group(k);
        const Vector g = grad.segment(start, size);
        auto s = cert.s.segment(start, size);
        auto t = cert.t.segment(start, size);

        // u = g + lambda2 t, with t fixed on the support and free on [-1, 1] off it.
        Vector u = g;
        if (sparse) {
            for (Index j = 0; j < size; ++j) {
                t(j) = b(j) != 0.0 ? (b(j) > 0.0 ? 1.0 : -1.0) : std::clamp(-g(j) / lambda2, -1.0, 1.0);
                u(j) += lambda2 * t(j);
            }
        }
        const double bnorm = b.norm();
        if (bnorm > 0.0) {
            s = b / bnorm;
        } else {
            const double unorm = u.norm();
            if (unorm > 0.0) s = -u / unorm * std::min(1.0, unorm / lambda1);
        }
        cert.w.segment(start, size) = u + lambda1 * s;
        cert.per_group_norms(k) = cert.w.segment(start, size).norm();
    }
    cert.w_norm = cert.w.norm();
    detail::check_membership(beta, cert, sparse);
    return cert;
}

/// Projection residual P_X^perp y and a minimum-norm least-squares fit.
struct LsQuantities
{
    Vector residual;
    Coefficients beta_lse;
};

inline LsQuantities ls_quantities(const GroupedProblem& problem)
{
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(problem.design());
    Vector beta = cod.solve(problem.y());
    Vector residual = problem.y() - problem.design() * beta;
    return {std::move(residual), Coefficients(std::move(beta), problem.groups())};
}

/**
 * Upper bounds on ||X beta* - y_hat||^2, y_hat the optimal fitted values.
 *
 * Each is 2 w^T beta* + 2 ||w|| rho, with rho an upper bound on ||beta_hat||_2:
 * from a reference solution (basic), from the objective at beta* (objective),
 * or from the least-squares fit (lse). Negative values are clamped to zero.
 */
struct AccuracyBounds
{
    double bound_objective = 0.0;
    double bound_lse = 0.0;
    std::optional<double> bound_basic;

    double best() const
    {
        double out = std::min(bound_objective, bound_lse);
        if (bound_basic) out = std::min(out, *bound_basic);
        return out;
    }
};

/// Radii bounding ||beta_hat||_2 used by the objective and lse bounds.
struct NormRadii
{
    double objective;
    double lse;
};

/**
 * The penalty P satisfies P(b) >= (lambda1 + lambda2) ||b||_2 and
 * L(b) >= L(beta_hat) >= 1/2 ||P_X^perp y||^2 + P(beta_hat), which gives both radii.
 * For the group lasso they reduce to lambda^{-1}(L(beta*) - 1/2||P^perp y||^2)
 * and sum_k ||(beta_lse)_k||.
 */
inline NormRadii norm_radii(const GroupedProblem& problem, const PenaltySpec& penalty, const Coefficients& beta,
                            const LsQuantities& ls)
{
    const double weight = penalty.group_weight() + penalty.l1_weight();
    const double floor = 0.5 * ls.residual.squaredNorm();
    const double objective_radius = std::max(0.0, objective(problem, penalty, beta) - floor) / weight;
    const Vector& lse = ls.beta_lse.values();
    const double lse_penalty =
        penalty.group_weight() * group_norm_sum(ls.beta_lse) + penalty.l1_weight() * lse.lpNorm<1>();
    return {objective_radius, lse_penalty / weight};
}

inline AccuracyBounds accuracy_bounds(const GroupedProblem& problem, const PenaltySpec& penalty,
                                      const Coefficients& beta, const OptimalityCertificate& cert,
                                      const LsQuantities& ls,
                                      const std::optional<Coefficients>& reference = std::nullopt)
{
    require_compatible(problem, beta);
    const double inner = 2.0 * cert.w.dot(beta.values());
    const NormRadii radii = norm_radii(problem, penalty, beta, ls);
    AccuracyBounds out;
    out.bound_objective = std::max(0.0, inner + 2.0 * cert.w_norm * radii.objective);
    out.bound_lse = std::max(0.0, inner + 2.0 * cert.w_norm * radii.lse);
    if (reference) {
        require_compatible(problem, *reference);
        out.bound_basic = std::max(0.0, inner + 2.0 * cert.w_norm * reference->values().norm());
    }
    return out;
}

/// Certificates and bounds for one problem, with the least-squares quantities computed once.
class Certifier
{
public:
    Certifier(const GroupedProblem& problem, const PenaltySpec& penalty)
        : problem_(&problem), penalty_(penalty), ls_(ls_quantities(problem)) {}

    OptimalityCertificate certify(const Coefficients& beta) const { return certificate(*problem_, penalty_, beta); }

    AccuracyBounds bounds(const Coefficients& beta, const OptimalityCertificate& cert,
                          const std::optional<Coefficients>& reference = std::nullopt) const
    {
        return accuracy_bounds(*problem_, penalty_, beta, cert, ls_, reference);
    }

    const LsQuantities& ls() const { return ls_; }

private:
    const GroupedProblem* problem_;
    PenaltySpec penalty_;
    LsQuantities ls_;
};

} // namespace gls
