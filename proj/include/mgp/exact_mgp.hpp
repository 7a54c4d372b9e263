#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mgp/gaussmix.hpp"
#include "mgp/kernels.hpp"

namespace mgp {

/// One pooled prior belief: a GP with a fixed ex-ante mixture weight.
struct PriorComponent {
    std::string name;
    MeanSpec mean;
    KernelSpec kernel;
    double weight;
};

/// Linear pool of GP priors sharing a Gaussian observation noise.
///
/// The trainable vector is laid out component by component (kernel log
/// parameters, then mean parameters) followed by log noise variance.
/// Mixture weights are not trainable.
class MGPPrior {
public:
    MGPPrior(std::vector<PriorComponent> components, double noise_variance, GramOptions gram = {});

    Eigen::Index size() const { return static_cast<Eigen::Index>(components_.size()); }
    const std::vector<PriorComponent>& components() const { return components_; }
    const PriorComponent& component(Eigen::Index i) const { return components_.at(i); }
    double noise_variance() const { return noise_variance_; }
    const GramOptions& gram_options() const { return gram_; }
    Eigen::VectorXd weights() const;

    Eigen::Index num_params() const;
    Eigen::VectorXd params() const;
    MGPPrior with_params(const Eigen::VectorXd& params) const;
    std::vector<std::string> param_names() const;

    /// Validates shapes of training data against every component.
    void check_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;
    void check_inputs(const Eigen::MatrixXd& X) const;

private:
    std::vector<PriorComponent> components_;
    double noise_variance_;
    GramOptions gram_;
};

double log_marginal_likelihood(const MGPPrior& prior, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

Eigen::VectorXd log_marginal_likelihood_grad(const MGPPrior& prior, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y);

struct EvidenceEvaluation {
    double value;
    Eigen::VectorXd grad;
    /// log N(y | m_i(X), K_i + I sigma^2) per component.
    Eigen::VectorXd component_log_evidence;
    /// Posterior component weights (Bayes responsibilities).
    Eigen::VectorXd responsibilities;
};

EvidenceEvaluation evaluate_evidence(const MGPPrior& prior, const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y, bool with_grad = true);

struct TrainConfig {
    int max_iterations = 2000;
    double learning_rate = 0.01;
    double tolerance = 1e-8;
    /// Consecutive steps with |change| < tolerance before stopping.
    int patience = 20;
    bool train_noise = true;
};

struct FitResult {
    MGPPrior prior;
    /// Objective at the initial point and after every accepted step.
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

/// Adam ascent on the log marginal likelihood. A step that lowers the
/// objective is rejected and the step size halved, so the trace is monotone.
FitResult fit(const MGPPrior& prior, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              const TrainConfig& config = {});

/// Closed-form posterior of a pooled prior conditioned on (X, y).
class ExactMGPPosterior {
public:
    const MGPPrior& prior() const { return prior_; }
    const Eigen::MatrixXd& inputs() const { return X_; }
    const Eigen::VectorXd& targets() const { return y_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::VectorXd& component_log_evidence() const { return log_evidence_; }
    /// Lower Cholesky factor of K_i + I sigma^2.
    const Eigen::MatrixXd& factor(Eigen::Index i) const { return states_.at(i).chol; }
    /// (K_i + I sigma^2)^{-1} (y - m_i(X)).
    const Eigen::VectorXd& solve_vector(Eigen::Index i) const { return states_.at(i).alpha; }

private:
    friend ExactMGPPosterior condition_on_data(const MGPPrior&, const Eigen::MatrixXd&,
                                               const Eigen::VectorXd&);
    struct ComponentState {
        Eigen::MatrixXd chol;
        Eigen::VectorXd alpha;
    };

    ExactMGPPosterior(MGPPrior prior, Eigen::MatrixXd X, Eigen::VectorXd y)
        : prior_(std::move(prior)), X_(std::move(X)), y_(std::move(y)) {}

    MGPPrior prior_;
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    std::vector<ComponentState> states_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd log_evidence_;
};

ExactMGPPosterior condition_on_data(const MGPPrior& prior, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y);

/// Latent-function predictive mixture at the rows of Xs.
GaussianMixtureDist predict_f(const ExactMGPPosterior& post, const Eigen::MatrixXd& Xs);

/// Observation predictive: predict_f plus I sigma^2 on every component.
GaussianMixtureDist predict_y(const ExactMGPPosterior& post, const Eigen::MatrixXd& Xs);

}  // namespace mgp
