#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>
#include <Eigen/Dense>

namespace gls {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Malformed or out-of-range arguments.
class InvalidInput : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Sizes of y, X, the partition or a coefficient vector disagree.
class DimensionMismatch : public InvalidInput
{
public:
    using InvalidInput::InvalidInput;
};

/// A solver declines a problem it cannot handle (e.g. SSLS group-size guard).
class SolverRefusal : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A result that exact arithmetic rules out was observed.
class InternalConsistencyError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// A root finder exhausted its iteration budget.
class NumericalFailure : public std::runtime_error
{
public:
    NumericalFailure(const std::string& what, double best)
        : std::runtime_error(what), best_r(best) {}
    double best_r;
};

/**
 * Contiguous column partition of a design matrix into K groups.
 * Group k owns columns [start(k), start(k) + size(k)).
 */
class GroupPartition
{
public:
    GroupPartition() = default;

    explicit GroupPartition(std::vector<Index> sizes)
        : sizes_(std::move(sizes))
    {
        if (sizes_.empty()) {
            throw InvalidInput("group partition needs at least one group");
        }
        starts_.resize(sizes_.size());
        Index offset = 0;
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            if (sizes_[k] < 1) {
                throw InvalidInput("group sizes must be positive");
            }
            starts_[k] = offset;
            offset += sizes_[k];
        }
        total_ = offset;
    }

    static GroupPartition uniform(Index num_groups, Index group_size)
    {
        if (num_groups < 1) throw InvalidInput("need at least one group");
        return GroupPartition(std::vector<Index>(static_cast<std::size_t>(num_groups), group_size));
    }

    Index num_groups() const { return static_cast<Index>(sizes_.size()); }
    Index total() const { return total_; }
    Index size(Index k) const { return sizes_[check(k)]; }
    Index start(Index k) const { return starts_[check(k)]; }
    Index max_size() const { return *std::max_element(sizes_.begin(), sizes_.end()); }
    const std::vector<Index>& sizes() const { return sizes_; }

    bool operator==(const GroupPartition& other) const { return sizes_ == other.sizes_; }

private:
    std::size_t check(Index k) const
    {
        if (k < 0 || k >= num_groups()) {
            throw InvalidInput("group index " + std::to_string(k) + " out of range");
        }
        return static_cast<std::size_t>(k);
    }

    std::vector<Index> sizes_;
    std::vector<Index> starts_;
    Index total_ = 0;
};

/// Response y, column-major design X and the group partition of X's columns.
class GroupedProblem
{
public:
    GroupedProblem(Vector y, Matrix design, GroupPartition groups)
        : y_(std::move(y)), x_(std::move(design)), groups_(std::move(groups))
    {
        if (y_.size() < 1) throw InvalidInput("response must have at least one sample");
        if (x_.rows() != y_.size()) {
            throw DimensionMismatch("design has " + std::to_string(x_.rows()) +
                                    " rows but response has " + std::to_string(y_.size()));
        }
        if (x_.cols() != groups_.total()) {
            throw DimensionMismatch("design has " + std::to_string(x_.cols()) +
                                    " columns but groups cover " + std::to_string(groups_.total()));
        }
    }

    Index n() const { return y_.size(); }
    Index p() const { return x_.cols(); }
    Index num_groups() const { return groups_.num_groups(); }

    const Vector& y() const { return y_; }
    const Matrix& design() const { return x_; }
    const GroupPartition& groups() const { return groups_; }

    /// Columns of group k.
    auto block(Index k) const { return x_.middleCols(groups_.start(k), groups_.size(k)); }

private:
    Vector y_;
    Matrix x_;
    GroupPartition groups_;
};

struct GroupLasso
{
    double lambda;
};

struct SparseGroupLasso
{
    double lambda1;
    double lambda2;
};

/// Either the group lasso penalty or the sparse group lasso penalty pair.
class PenaltySpec
{
public:
    static PenaltySpec group_lasso(double lambda)
    {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw InvalidInput("group lasso penalty must be positive and finite");
        }
        return PenaltySpec(GroupLasso{lambda});
    }

    static PenaltySpec sparse_group_lasso(double lambda1, double lambda2)
    {
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
            throw InvalidInput("sparse group lasso penalties must both be positive and finite");
        }
        return PenaltySpec(SparseGroupLasso{lambda1, lambda2});
    }

    bool is_sparse() const { return std::holds_alternative<SparseGroupLasso>(kind_); }

    /// Weight on the group 2-norms (lambda, or lambda1 in the sparse case).
    double group_weight() const
    {
        return is_sparse() ? std::get<SparseGroupLasso>(kind_).lambda1 : std::get<GroupLasso>(kind_).lambda;
    }

    /// Weight on the 1-norm; zero for the plain group lasso.
    double l1_weight() const
    {
        return is_sparse() ? std::get<SparseGroupLasso>(kind_).lambda2 : 0.0;
    }

    const std::variant<GroupLasso, SparseGroupLasso>& kind() const { return kind_; }

private:
    explicit PenaltySpec(std::variant<GroupLasso, SparseGroupLasso> kind) : kind_(kind) {}

    std::variant<GroupLasso, SparseGroupLasso> kind_;
};

/// Coefficient vector beta with per-group views beta_k.
class Coefficients
{
public:
    Coefficients() = default;

    explicit Coefficients(const GroupPartition& groups)
        : values_(Vector::Zero(groups.total())), groups_(groups) {}

    Coefficients(Vector values, const GroupPartition& groups)
        : values_(std::move(values)), groups_(groups)
    {
        if (values_.size() != groups_.total()) {
            throw DimensionMismatch("coefficient vector length does not match the group partition");
        }
    }

    static Coefficients zeros(const GroupedProblem& problem) { return Coefficients(problem.groups()); }

    Index size() const { return values_.size(); }
    Index num_groups() const { return groups_.num_groups(); }
    const GroupPartition& groups() const { return groups_; }

    const Vector& values() const { return values_; }
    Vector& values() { return values_; }

    auto group(Index k) const { return values_.segment(groups_.start(k), groups_.size(k)); }
    auto group(Index k) { return values_.segment(groups_.start(k), groups_.size(k)); }

    bool group_is_zero(Index k) const { return (group(k).array() == 0.0).all(); }

    /// Number of groups with at least one nonzero coordinate.
    Index active_groups() const
    {
        Index count = 0;
        for (Index k = 0; k < num_groups(); ++k) count += group_is_zero(k) ? 0 : 1;
        return count;
    }

private:
    Vector values_;
    GroupPartition groups_;
};

inline void require_compatible(const GroupedProblem& problem, const Coefficients& beta)
{
    if (!(beta.groups() == problem.groups())) {
        throw DimensionMismatch("coefficients are partitioned differently from the problem");
    }
}

/// Sum over groups of ||beta_k||_2.
inline double group_norm_sum(const Coefficients& beta)
{
    double total = 0.0;
    for (Index k = 0; k < beta.num_groups(); ++k) total += beta.group(k).norm();
    return total;
}

namespace detail {

// Unvalidated objective; lambda2 = 0 gives the group lasso objective.
inline double objective_raw(const GroupedProblem& problem, double lambda1, double lambda2, const Vector& beta)
{
    const double fit = 0.5 * (problem.y() - problem.design() * beta).squaredNorm();
    double groups = 0.0;
    for (Index k = 0; k < problem.num_groups(); ++k) {
        groups += beta.segment(problem.groups().start(k), problem.groups().size(k)).norm();
    }
    return fit + lambda1 * groups + lambda2 * beta.lpNorm<1>();
}

// Same value accumulated in long double, so that exact descent between
// iterates is not hidden by rounding in the evaluation itself.
inline double objective_precise(const GroupedProblem& problem, double lambda1, double lambda2, const Vector& beta)
{
    const Matrix& x = problem.design();
    long double fit = 0.0L;
    for (Index i = 0; i < problem.n(); ++i) {
        long double r = problem.y()(i);
        for (Index j = 0; j < problem.p(); ++j) r -= static_cast<long double>(x(i, j)) * beta(j);
        fit += r * r;
    }
    long double groups = 0.0L;
    for (Index k = 0; k < problem.num_groups(); ++k) {
        long double sq = 0.0L;
        for (Index j = 0; j < problem.groups().size(k); ++j) {
            const long double b = beta(problem.groups().start(k) + j);
            sq += b * b;
        }
        groups += std::sqrt(sq);
    }
    long double l1 = 0.0L;
    for (Index j = 0; j < problem.p(); ++j) l1 += std::abs(static_cast<long double>(beta(j)));
    return static_cast<double>(0.5L * fit + lambda1 * groups + lambda2 * l1);
}

} // namespace detail

/// 1/2 ||y - X beta||^2 + lambda sum_k ||beta_k||_2 (+ lambda2 ||beta||_1 for the sparse penalty).
inline double objective(const GroupedProblem& problem, const PenaltySpec& penalty, const Coefficients& beta)
{
    require_compatible(problem, beta);
    return detail::objective_precise(problem, penalty.group_weight(), penalty.l1_weight(), beta.values());
}

struct PartialResidual
{
    Vector r;
};

/// R_k = y - sum_{l != k} X_l beta_l, by direct evaluation.
inline PartialResidual partial_residual(const GroupedProblem& problem, const Coefficients& beta, Index k)
{
    require_compatible(problem, beta);
    Vector r = problem.y();
    for (Index l = 0; l < problem.num_groups(); ++l) {
        if (l == k) continue;
        r.noalias() -= problem.block(l) * beta.group(l);
    }
    // Validates k even when K == 1.
    (void)problem.groups().size(k);
    return {std::move(r)};
}

/**
 * Maintains the full residual y - X beta under single-group updates.
 * partial(k) adds X_k beta_k back; commit(k, ...) subtracts the new fit.
 */
class ResidualTracker
{
public:
    ResidualTracker(const GroupedProblem& problem, const Coefficients& beta)
        : problem_(&problem)
    {
        refresh(beta);
    }

    void refresh(const Coefficients& beta)
    {
        require_compatible(*problem_, beta);
        full_ = problem_->y();
        full_.noalias() -= problem_->design() * beta.values();
    }

    const Vector& full() const { return full_; }

    PartialResidual partial(const Coefficients& beta, Index k) const
    {
        Vector r = full_;
        if (!beta.group_is_zero(k)) r.noalias() += problem_->block(k) * beta.group(k);
        return {std::move(r)};
    }

    /// Sets the full residual to R_k - X_k new_group.
    template <class Derived>
    void commit(const PartialResidual& partial, Index k, const Eigen::MatrixBase<Derived>& new_group)
    {
        full_ = partial.r;
        if (!(new_group.array() == 0.0).all()) full_.noalias() -= problem_->block(k) * new_group;
    }

private:
    const GroupedProblem* problem_;
    Vector full_;
};

} // namespace gls
