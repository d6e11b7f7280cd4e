#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>
#include <Eigen/Cholesky>
#include "model.hpp"
#include "sls.hpp"

namespace gls::sim {

/// Name of the random stream used for sampling, reported in benchmark output.
inline constexpr const char* rng_algorithm = "mt19937_64+box-muller";

struct SimulationConfig
{
    Index n = 50;
    Index num_groups = 10;
    Index group_size = 10;
    /// Within-group correlation.
    double a = 0.5;
    /// Between-group similarity.
    double b = 0.5;
    double noise_scale_factor = 0.01;
    std::uint64_t seed = 1;
};

inline void validate(const SimulationConfig& config)
{
    if (config.n < 1 || config.num_groups < 1 || config.group_size < 1) {
        throw InvalidInput("n, K and group size must be at least 1");
    }
    if (!(config.a >= 0.0 && config.a < 1.0) || !(config.b >= 0.0 && config.b < 1.0)) {
        throw InvalidInput("a and b must lie in [0, 1)");
    }
    if (!(config.noise_scale_factor >= 0.0)) throw InvalidInput("noise scale factor must be nonnegative");
}

/// (1 - c) I_m + c 11^T.
inline Matrix compound_symmetry(Index m, double c)
{
    return (1.0 - c) * Matrix::Identity(m, m) + c * Matrix::Ones(m, m);
}

/// Symmetric square root of (1 - c) I_m + c 11^T, from its two eigenvalues.
inline Matrix compound_symmetry_sqrt(Index m, double c)
{
    const double base = std::sqrt(1.0 - c);
    const double top = std::sqrt(1.0 - c + static_cast<double>(m) * c);
    return base * Matrix::Identity(m, m) + ((top - base) / static_cast<double>(m)) * Matrix::Ones(m, m);
}

inline Matrix kronecker(const Matrix& lhs, const Matrix& rhs)
{
    Matrix out(lhs.rows() * rhs.rows(), lhs.cols() * rhs.cols());
    for (Index i = 0; i < lhs.rows(); ++i) {
        for (Index j = 0; j < lhs.cols(); ++j) {
            out.block(i * rhs.rows(), j * rhs.cols(), rhs.rows(), rhs.cols()) = lhs(i, j) * rhs;
        }
    }
    return out;
}

/**
 * Covariance with unit diagonal, correlation a within a group and block
 * (k1, k2 != k1) equal to b times the within-group block. Equals
 * B (x) C with B = (1-b)I_K + b 11^T and C = (1-a)I_g + a 11^T.
 */
inline Matrix covariance(const SimulationConfig& config)
{
    validate(config);
    const Index p = config.num_groups * config.group_size;
    Matrix sigma(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            const bool same_group = i / config.group_size == j / config.group_size;
            const double within = i % config.group_size == j % config.group_size ? 1.0 : config.a;
            sigma(i, j) = within * (same_group ? 1.0 : config.b);
        }
    }
    return sigma;
}

/// F with F F^T = Sigma: B^{1/2} (x) C^{1/2}.
inline Matrix covariance_factor(const SimulationConfig& config)
{
    validate(config);
    return kronecker(compound_symmetry_sqrt(config.num_groups, config.b),
                     compound_symmetry_sqrt(config.group_size, config.a));
}

/// Lower Cholesky factor of an explicit covariance; for patterns without the Kronecker form.
inline Matrix cholesky_factor(const Matrix& sigma)
{
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw InvalidInput("covariance is not positive definite");
    return llt.matrixL();
}

/// Standard normals from mt19937_64 via Box-Muller; identical across standard libraries.
class NormalStream
{
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()()
    {
        if (spare_) {
            const double out = *spare_;
            spare_.reset();
            return out;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        return radius * std::cos(angle);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// beta_0: ones on the first two groups, zero elsewhere.
inline Coefficients true_beta(const SimulationConfig& config)
{
    const GroupPartition groups = GroupPartition::uniform(config.num_groups, config.group_size);
    Coefficients beta(groups);
    for (Index k = 0; k < std::min<Index>(2, config.num_groups); ++k) beta.group(k).setOnes();
    return beta;
}

/// c^2 = noise_scale_factor * beta_0^T Sigma beta_0.
inline double noise_variance(const SimulationConfig& config)
{
    const Vector beta = true_beta(config).values();
    return config.noise_scale_factor * beta.dot(covariance(config) * beta);
}

struct SimulatedProblem
{
    GroupedProblem problem;
    Coefficients truth;
    double noise_variance;
};

/// Rows of X i.i.d. N(0, Sigma); y ~ N(X beta_0, c^2 I). Deterministic in the seed.
inline SimulatedProblem sample_problem(const SimulationConfig& config)
{
    validate(config);
    const Matrix factor = covariance_factor(config);
    const Index p = factor.rows();
    NormalStream normal(config.seed);

    Matrix x(config.n, p);
    Vector z(p);
    for (Index i = 0; i < config.n; ++i) {
        for (Index j = 0; j < p; ++j) z(j) = normal();
        x.row(i) = (factor * z).transpose();
    }
    Coefficients truth = true_beta(config);
    const double c2 = noise_variance(config);
    const double c = std::sqrt(c2);
    Vector y = x * truth.values();
    for (Index i = 0; i < config.n; ++i) y(i) += c * normal();

    GroupedProblem problem(std::move(y), std::move(x), GroupPartition::uniform(config.num_groups, config.group_size));
    return {std::move(problem), std::move(truth), c2};
}

struct PenaltyLadder
{
    std::vector<double> values;
    std::vector<double> bounds;
};

/// {lambda_max 2^-i}, i = 1..length.
inline PenaltyLadder penalty_ladder(const GroupedProblem& problem, std::size_t length)
{
    if (length < 1) throw InvalidInput("ladder length must be at least 1");
    const double top = lambda_max(problem);
    if (!(top > 0.0)) throw InvalidInput("lambda_max is zero; the problem is degenerate");
    PenaltyLadder ladder;
    double value = top;
    for (std::size_t i = 0; i < length; ++i) {
        value *= 0.5;
        ladder.values.push_back(value);
    }
    return ladder;
}

/// Fills M^i = sum_k ||beta_k^(i)||_2 for solutions computed at the ladder values.
inline PenaltyLadder bounds_for_ladder(PenaltyLadder ladder, const std::vector<Coefficients>& solutions)
{
    if (solutions.size() != ladder.values.size()) {
        throw DimensionMismatch("one solution per ladder value is required");
    }
    ladder.bounds.clear();
    for (const Coefficients& beta : solutions) ladder.bounds.push_back(bound_from_solution(beta));
    return ladder;
}

/// The nine (a, b) pairs with a, b in {0.2, 0.5, 0.8}.
inline std::vector<std::pair<double, double>> default_correlation_grid()
{
    std::vector<std::pair<double, double>> out;
    for (double a : {0.2, 0.5, 0.8}) {
        for (double b : {0.2, 0.5, 0.8}) out.emplace_back(a, b);
    }
    return out;
}

} // namespace gls::sim
