#pragma once
#include <cstddef>
#include <iostream>
#include <map>
#include <memory>
#include <utility>
#include <vector>
#include <Eigen/Eigenvalues>
#include "model.hpp"

namespace gls {

/**
 * Spectral decomposition G = U^T diag(d) U of a Gram matrix G = A^T A.
 * Rows of U are eigenvectors. Eigenvalues are clamped to be nonnegative.
 */
struct GroupSpectrum
{
    Matrix u;
    Vector d;
    Index group = 0;
    std::vector<Index> subset;  // empty: all columns of the group

    /// Reconstruction U^T diag(d) U.
    Matrix reconstruct() const { return u.transpose() * d.asDiagonal() * u; }
};

/// Eigendecomposition of a symmetric PSD matrix.
inline GroupSpectrum decompose_gram(const Matrix& gram)
{
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("symmetric eigensolver failed", 0.0);
    }
    GroupSpectrum out;
    out.u = solver.eigenvectors().transpose();
    out.d = solver.eigenvalues();
    const double top = out.d.size() ? out.d.cwiseAbs().maxCoeff() : 0.0;
    for (Index j = 0; j < out.d.size(); ++j) {
        if (out.d(j) < 0.0) {
            if (out.d(j) < -1e-8 * top) {
                std::cerr << "gls: warning: Gram eigenvalue " << out.d(j) << " clamped to zero\n";
            }
            out.d(j) = 0.0;
        }
    }
    return out;
}

/// Columns of group k restricted to local indices J.
inline Matrix subset_columns(const GroupedProblem& problem, Index k, const std::vector<Index>& subset)
{
    auto block = problem.block(k);
    Matrix out(problem.n(), static_cast<Index>(subset.size()));
    for (std::size_t j = 0; j < subset.size(); ++j) {
        if (subset[j] < 0 || subset[j] >= block.cols()) {
            throw InvalidInput("column subset index out of range for group");
        }
        out.col(static_cast<Index>(j)) = block.col(subset[j]);
    }
    return out;
}

struct CacheStats
{
    std::size_t entries = 0;
    std::size_t hits = 0;
    std::size_t misses = 0;
};

/**
 * Lazily computed per-(group, column subset) spectra.
 *
 * Keys are unsigned supports: the Gram (X_k)_J^T (X_k)_J does not depend on
 * the sign pattern over J. No eviction. Not synchronized; one cache per
 * thread of solving.
 */
class SpectralCache
{
public:
    explicit SpectralCache(const GroupedProblem& problem) : problem_(&problem) {}

    /// Spectrum of X_k^T X_k.
    std::shared_ptr<const GroupSpectrum> full(Index k) { return get(k, {}); }

    /// Spectrum of (X_k)_J^T (X_k)_J; J is sorted and deduplicated first.
    std::shared_ptr<const GroupSpectrum> subset(Index k, std::vector<Index> cols)
    {
        if (cols.empty()) throw InvalidInput("column subset must be nonempty");
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        if (static_cast<Index>(cols.size()) == problem_->groups().size(k)) cols.clear();
        return get(k, std::move(cols));
    }

    CacheStats stats() const { return {entries_.size(), hits_, misses_}; }

    /// Number of cached entries belonging to group k.
    std::size_t entries_for_group(Index k) const
    {
        std::size_t count = 0;
        for (const auto& [key, value] : entries_) count += key.first == k ? 1 : 0;
        return count;
    }

private:
    using Key = std::pair<Index, std::vector<Index>>;

    std::shared_ptr<const GroupSpectrum> get(Index k, std::vector<Index> cols)
    {
        (void)problem_->groups().size(k);
        Key key{k, std::move(cols)};
        if (auto it = entries_.find(key); it != entries_.end()) {
            ++hits_;
            return it->second;
        }
        ++misses_;
        Matrix gram;
        if (key.second.empty()) {
            auto block = problem_->block(k);
            gram.noalias() = block.transpose() * block;
        } else {
            const Matrix cols_mat = subset_columns(*problem_, k, key.second);
            gram.noalias() = cols_mat.transpose() * cols_mat;
        }
        auto spectrum = std::make_shared<GroupSpectrum>(decompose_gram(gram));
        spectrum->group = k;
        spectrum->subset = key.second;
        auto [it, inserted] = entries_.emplace(std::move(key), std::move(spectrum));
        return it->second;
    }

    const GroupedProblem* problem_;
    std::map<Key, std::shared_ptr<const GroupSpectrum>> entries_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

} // namespace gls
