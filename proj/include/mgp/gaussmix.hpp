#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace mgp {

/// Multivariate normal with a Cholesky factor computed at construction.
///
/// The covariance must be symmetric; it need not be strictly positive
/// definite. When factorization fails the distribution still supports
/// moments and marginalization, while densities, conditioning on it and
/// sampling raise NumericalError.
class GaussianDist {
public:
    GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    Eigen::Index dim() const { return mean_.size(); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }

    bool factorized() const { return chol_.has_value(); }
    /// Lower-triangular L with L L^T = covariance.
    const Eigen::MatrixXd& cholesky() const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
    std::optional<Eigen::MatrixXd> chol_;
};

/// Finite mixture of equal-dimension Gaussians with simplex weights.
class GaussianMixtureDist {
public:
    GaussianMixtureDist(Eigen::VectorXd weights, std::vector<GaussianDist> components);

    Eigen::Index dim() const { return components_.front().dim(); }
    Eigen::Index size() const { return weights_.size(); }
    const Eigen::VectorXd& weights() const { return weights_; }
    const std::vector<GaussianDist>& components() const { return components_; }
    const GaussianDist& component(Eigen::Index i) const { return components_.at(i); }

private:
    Eigen::VectorXd weights_;
    std::vector<GaussianDist> components_;
};

double mvn_logpdf(const GaussianDist& dist, const Eigen::VectorXd& x);

double mixture_logpdf(const GaussianMixtureDist& mix, const Eigen::VectorXd& x);

/// Mixture over the coordinates in `keep` (in the given order).
GaussianMixtureDist marginalize(const GaussianMixtureDist& mix, std::span<const Eigen::Index> keep);

/// Conditional mixture of the unobserved coordinates given values at
/// `observed`. Remaining coordinates keep their original relative order.
GaussianMixtureDist condition(const GaussianMixtureDist& mix,
                              std::span<const Eigen::Index> observed,
                              const Eigen::VectorXd& values);

GaussianMixtureDist add_diagonal_noise(const GaussianMixtureDist& mix, double variance);

/// count x n matrix of draws; deterministic in seed.
Eigen::MatrixXd sample(const GaussianMixtureDist& mix, Eigen::Index count, std::uint64_t seed);

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

Moments moments(const GaussianMixtureDist& mix);

/// log(sum(exp(v))) with the usual max shift; -inf for an all -inf input.
double log_sum_exp(const Eigen::VectorXd& v);

/// Normalized weights from unnormalized log weights. Entries whose
/// normalized log weight falls below -745 are set to exactly zero.
/// Throws NumericalError if every entry is -inf or any is NaN.
Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights);

}  // namespace mgp
