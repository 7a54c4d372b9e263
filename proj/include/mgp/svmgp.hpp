#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mgp/gaussmix.hpp"
#include "mgp/kernels.hpp"

namespace mgp {

/// A GP prior belief before sparse initialization.
struct ComponentPrior {
    std::string name;
    MeanSpec mean;
    KernelSpec kernel;
};

/// One mixture component of a sparse variational MGP: its prior, its own
/// inducing locations and the Gaussian q(u) = N(q_mean, q_chol q_chol^T).
struct SparseComponent {
    std::string name;
    MeanSpec mean;
    KernelSpec kernel;
    Eigen::MatrixXd inducing;  ///< m x d
    Eigen::VectorXd q_mean;    ///< m
    Eigen::MatrixXd q_chol;    ///< m x m, lower triangular, positive diagonal
};

/// Sparse variational mixture of GPs with a Dirichlet prior Dir(alpha) on
/// the mixture weights and a variational Dirichlet Dir(alpha_tilde).
///
/// Flat parameter layout, component by component:
///   q_mean (m), lower triangle of q_chol row by row with the diagonal in
///   log domain (m(m+1)/2), inducing locations row-major (m*d), kernel log
///   parameters;
/// then log alpha_tilde (k) and log noise variance. Mean functions and the
/// prior alpha are fixed.
class SVMGPModel {
public:
    SVMGPModel(std::vector<SparseComponent> components, Eigen::VectorXd alpha_prior,
               Eigen::VectorXd alpha_variational, double noise_variance, GramOptions gram = {});

    Eigen::Index size() const { return static_cast<Eigen::Index>(components_.size()); }
    Eigen::Index input_dim() const { return components_.front().inducing.cols(); }
    const std::vector<SparseComponent>& components() const { return components_; }
    const SparseComponent& component(Eigen::Index i) const { return components_.at(i); }
    const Eigen::VectorXd& alpha_prior() const { return alpha_prior_; }
    const Eigen::VectorXd& alpha_variational() const { return alpha_var_; }
    double noise_variance() const { return noise_variance_; }
    const GramOptions& gram_options() const { return gram_; }

    /// E_q[pi] = alpha_tilde / sum(alpha_tilde).
    Eigen::VectorXd expected_weights() const;

    Eigen::Index num_params() const;
    Eigen::VectorXd params() const;
    SVMGPModel with_params(const Eigen::VectorXd& params) const;
    std::vector<std::string> param_names() const;
    /// Offset of component i's block in the flat layout (i == size() gives
    /// the offset of log alpha_tilde).
    Eigen::Index param_offset(Eigen::Index i) const;

    SVMGPModel with_alpha_variational(const Eigen::VectorXd& alpha_variational) const;
    SVMGPModel with_component(Eigen::Index i, SparseComponent component) const;

private:
    std::vector<SparseComponent> components_;
    Eigen::VectorXd alpha_prior_;
    Eigen::VectorXd alpha_var_;
    double noise_variance_;
    GramOptions gram_;
};

/// Per-dimension empirical quantiles at levels j/(m+1), j = 1..m, with
/// linear interpolation between order statistics.
Eigen::MatrixXd quantile_inducing_points(const Eigen::MatrixXd& X, Eigen::Index m);

/// Inducing locations at X quantiles, q(u) equal to the prior at those
/// locations, alpha_tilde = alpha and noise variance 0.1 var(y).
SVMGPModel init_model(const std::vector<ComponentPrior>& priors, const Eigen::VectorXd& alpha,
                      const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      Eigen::Index inducing_per_component, GramOptions gram = {});

double kl_dirichlet(const Eigen::VectorXd& alpha_variational, const Eigen::VectorXd& alpha_prior);

/// KL(q(u_i) || p(u_i)) for component i.
double kl_gaussian_component(const SVMGPModel& model, Eigen::Index i);

struct ElboTerms {
    double value = 0.0;
    /// (n_total / batch) * sum_j sum_i pi_tilde_i * ell_ij
    double expected_log_lik = 0.0;
    /// (n_total / batch) * sum_j ell_ij for each component (unweighted)
    Eigen::VectorXd component_expected_log_lik;
    Eigen::VectorXd kl_components;
    double kl_dirichlet = 0.0;
};

struct ElboEvaluation {
    ElboTerms terms;
    Eigen::VectorXd grad;  ///< empty unless requested
};

ElboEvaluation evaluate_elbo(const SVMGPModel& model, const Eigen::MatrixXd& X_batch,
                             const Eigen::VectorXd& y_batch, Eigen::Index n_total, bool with_grad);

double elbo(const SVMGPModel& model, const Eigen::MatrixXd& X_batch, const Eigen::VectorXd& y_batch,
            Eigen::Index n_total);

Eigen::VectorXd elbo_grad(const SVMGPModel& model, const Eigen::MatrixXd& X_batch,
                          const Eigen::VectorXd& y_batch, Eigen::Index n_total);

struct SVMGPTrainConfig {
    Eigen::Index batch_size = 256;
    int max_epochs = 200;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
};

struct SVMGPTrainResult {
    SVMGPModel model;
    /// Full-data ELBO before training and after every epoch.
    std::vector<double> trace;
    /// Epoch whose parameters are returned (0 = initial model).
    int best_epoch = 0;
};

inline constexpr double kAlphaMin = 1e-6;
inline constexpr double kAlphaMax = 1e6;

/// Minibatch Adam ascent on the ELBO. Returns the parameters with the
/// highest full-data ELBO seen at epoch boundaries.
SVMGPTrainResult train(const SVMGPModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const SVMGPTrainConfig& config = {});

/// Latent predictive mixture q(f*) at the rows of Xs.
GaussianMixtureDist predict(const SVMGPModel& model, const Eigen::MatrixXd& Xs);

/// Observation predictive: predict plus I sigma^2.
GaussianMixtureDist predict_y(const SVMGPModel& model, const Eigen::MatrixXd& Xs);

}  // namespace mgp
