#include "mgp/exact_mgp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "mgp/adam.hpp"
#include "mgp/error.hpp"

namespace mgp {

namespace {

struct Factorized {
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd alpha;
    double log_evidence;
};

Factorized factor_component(const MGPPrior& prior, Eigen::Index i, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y)
{
    const auto& comp = prior.component(i);
    Eigen::MatrixXd K = assemble_gram(comp.kernel, X, prior.gram_options());
    K.diagonal().array() += prior.noise_variance();
    Factorized f{Eigen::LLT<Eigen::MatrixXd>(K), {}, 0.0};
    if (f.llt.info() != Eigen::Success)
        throw NumericalError("component '" + comp.name + "' (" + std::string(comp.kernel.name()) +
                             " kernel): K + I sigma^2 is not positive definite");
    const Eigen::VectorXd resid = y - mean_eval(comp.mean, X);
    f.alpha = f.llt.solve(resid);
    const Eigen::MatrixXd L = f.llt.matrixL();
    const double n = static_cast<double>(X.rows());
    f.log_evidence = -0.5 * resid.dot(f.alpha) - L.diagonal().array().log().sum() -
                     0.5 * n * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(f.log_evidence))
        throw NumericalError("component '" + comp.name + "' (" + std::string(comp.kernel.name()) +
                             " kernel): non-finite log evidence");
    return f;
}

}  // namespace

MGPPrior::MGPPrior(std::vector<PriorComponent> components, double noise_variance, GramOptions gram)
    : components_(std::move(components)), noise_variance_(noise_variance), gram_(gram)
{
    if (components_.empty()) throw InvalidArgument("MGPPrior needs at least one component");
    if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_))
        throw InvalidArgument("noise variance must be positive and finite");
    if (gram_.jitter_scale < 0.0) throw InvalidArgument("jitter_scale must be nonnegative");
    double total = 0.0;
    std::optional<Eigen::Index> dim;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0 && c.weight <= 1.0))
            throw InvalidArgument("component '" + c.name + "': prior weight must lie in (0, 1]");
        total += c.weight;
        for (const auto d : {c.kernel.input_dim(), c.mean.input_dim()}) {
            if (!d) continue;
            if (dim && *dim != *d)
                throw InvalidArgument("component '" + c.name + "' expects input dimension " +
                                      std::to_string(*d) + ", others expect " + std::to_string(*dim));
            dim = d;
        }
    }
    if (std::abs(total - 1.0) > 1e-10) throw InvalidArgument("prior weights must sum to 1");
}

Eigen::VectorXd MGPPrior::weights() const
{
    Eigen::VectorXd w(size());
    for (Eigen::Index i = 0; i < size(); ++i) w[i] = components_[i].weight;
    return w;
}

Eigen::Index MGPPrior::num_params() const
{
    Eigen::Index n = 1;
    for (const auto& c : components_) n += c.kernel.num_params() + c.mean.num_params();
    return n;
}

Eigen::VectorXd MGPPrior::params() const
{
    Eigen::VectorXd p(num_params());
    Eigen::Index at = 0;
    for (const auto& c : components_) {
        p.segment(at, c.kernel.num_params()) = c.kernel.log_params();
        at += c.kernel.num_params();
        p.segment(at, c.mean.num_params()) = c.mean.params();
        at += c.mean.num_params();
    }
    p[at] = std::log(noise_variance_);
    return p;
}

MGPPrior MGPPrior::with_params(const Eigen::VectorXd& params) const
{
    if (params.size() != num_params()) throw InvalidArgument("MGPPrior: parameter vector has wrong length");
    std::vector<PriorComponent> comps = components_;
    Eigen::Index at = 0;
    for (auto& c : comps) {
        c.kernel = c.kernel.with_log_params(params.segment(at, c.kernel.num_params()));
        at += c.kernel.num_params();
        c.mean = c.mean.with_params(params.segment(at, c.mean.num_params()));
        at += c.mean.num_params();
    }
    return MGPPrior(std::move(comps), std::exp(params[at]), gram_);
}

std::vector<std::string> MGPPrior::param_names() const
{
    std::vector<std::string> names;
    for (const auto& c : components_) {
        for (const auto& p : c.kernel.param_names()) names.push_back(c.name + ".kernel.log_" + p);
        for (Eigen::Index j = 0; j < c.mean.num_params(); ++j)
            names.push_back(c.name + ".mean." + std::to_string(j));
    }
    names.push_back("log_noise_variance");
    return names;
}

void MGPPrior::check_inputs(const Eigen::MatrixXd& X) const
{
    if (X.rows() < 1) throw InvalidArgument("need at least one input point");
    for (const auto& c : components_) {
        c.kernel.check_input_dim(X.cols());
        c.mean.check_input_dim(X.cols());
    }
}

void MGPPrior::check_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const
{
    check_inputs(X);
    if (y.size() != X.rows())
        throw InvalidArgument("got " + std::to_string(y.size()) + " targets for " +
                              std::to_string(X.rows()) + " inputs");
    if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("training data contains NaN or Inf");
}

EvidenceEvaluation evaluate_evidence(const MGPPrior& prior, const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y, bool with_grad)
{
    prior.check_data(X, y);
    const Eigen::Index k = prior.size();
    const Eigen::Index n = X.rows();

    std::vector<Factorized> parts;
    parts.reserve(k);
    Eigen::VectorXd log_ev(k);
    Eigen::VectorXd log_w(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        parts.push_back(factor_component(prior, i, X, y));
        log_ev[i] = parts.back().log_evidence;
        log_w[i] = std::log(prior.component(i).weight) + log_ev[i];
    }

    EvidenceEvaluation out{log_sum_exp(log_w), Eigen::VectorXd::Zero(prior.num_params()), log_ev,
                           normalize_log_weights(log_w)};
    if (!with_grad) return out;

    const double noise = prior.noise_variance();
    const double jitter_scale = prior.gram_options().jitter_scale;
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& comp = prior.component(i);
        const Eigen::Index nk = comp.kernel.num_params();
        const Eigen::Index nm = comp.mean.num_params();
        const double r = out.responsibilities[i];
        if (r > 0.0) {
            const auto& alpha = parts[i].alpha;
            const Eigen::MatrixXd W =
                alpha * alpha.transpose() - parts[i].llt.solve(Eigen::MatrixXd::Identity(n, n));
            const double trace_w = W.trace();
            const auto dK = kernel_param_grads(comp.kernel, X);
            for (Eigen::Index t = 0; t < nk; ++t) {
                double g = 0.5 * W.cwiseProduct(dK[t]).sum();
                if (jitter_scale > 0.0) g += 0.5 * jitter_scale * dK[t].diagonal().mean() * trace_w;
                out.grad[at + t] += r * g;
            }
            Eigen::VectorXd gm = Eigen::VectorXd::Zero(nm);
            for (Eigen::Index j = 0; j < n; ++j) comp.mean.accumulate_param_grad(X.row(j), alpha[j], gm);
            out.grad.segment(at + nk, nm) += r * gm;
            out.grad[out.grad.size() - 1] += r * 0.5 * noise * trace_w;
        }
        at += nk + nm;
    }
    return out;
}

double log_marginal_likelihood(const MGPPrior& prior, const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    return evaluate_evidence(prior, X, y, false).value;
}

Eigen::VectorXd log_marginal_likelihood_grad(const MGPPrior& prior, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y)
{
    return evaluate_evidence(prior, X, y, true).grad;
}

FitResult fit(const MGPPrior& prior, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              const TrainConfig& config)
{
    if (config.max_iterations < 0) throw InvalidArgument("max_iterations must be nonnegative");
    if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");

    Eigen::VectorXd theta = prior.params();
    EvidenceEvaluation current = evaluate_evidence(prior, X, y);
    FitResult result{prior, {current.value}, 0, false};

    Adam adam(theta.size(), AdamOptions{.learning_rate = config.learning_rate});
    double step_scale = 1.0;
    int quiet = 0;
    for (int it = 0; it < config.max_iterations; ++it) {
        Eigen::VectorXd grad = current.grad;
        if (!config.train_noise) grad[grad.size() - 1] = 0.0;
        Eigen::VectorXd candidate = theta;
        adam.ascend(candidate, grad, step_scale);
        const MGPPrior next_prior = prior.with_params(candidate);
        EvidenceEvaluation next = evaluate_evidence(next_prior, X, y);
        result.iterations = it + 1;

        double change = 0.0;
        if (next.value >= current.value) {
            change = next.value - current.value;
            theta = std::move(candidate);
            current = std::move(next);
            result.prior = next_prior;
            result.trace.push_back(current.value);
            step_scale = std::min(1.0, 2.0 * step_scale);
        } else {
            step_scale *= 0.5;
        }
        quiet = std::abs(change) < config.tolerance ? quiet + 1 : 0;
        if (quiet >= config.patience) {
            result.converged = true;
            break;
        }
    }
    return result;
}

ExactMGPPosterior condition_on_data(const MGPPrior& prior, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y)
{
    prior.check_data(X, y);
    ExactMGPPosterior post(prior, X, y);
    const Eigen::Index k = prior.size();
    post.log_evidence_.resize(k);
    Eigen::VectorXd log_w(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Factorized f = factor_component(prior, i, X, y);
        post.log_evidence_[i] = f.log_evidence;
        log_w[i] = std::log(prior.component(i).weight) + f.log_evidence;
        post.states_.push_back({f.llt.matrixL(), std::move(f.alpha)});
    }
    post.weights_ = normalize_log_weights(log_w);
    return post;
}

GaussianMixtureDist predict_f(const ExactMGPPosterior& post, const Eigen::MatrixXd& Xs)
{
    const auto& prior = post.prior();
    prior.check_inputs(Xs);
    if (Xs.cols() != post.inputs().cols())
        throw InvalidArgument("predict: test inputs have dimension " + std::to_string(Xs.cols()) +
                              ", training inputs have " + std::to_string(post.inputs().cols()));
    std::vector<GaussianDist> comps;
    comps.reserve(prior.size());
    for (Eigen::Index i = 0; i < prior.size(); ++i) {
        const auto& c = prior.component(i);
        const Eigen::MatrixXd Ksn = cross_gram(c.kernel, Xs, post.inputs());
        Eigen::VectorXd mean = mean_eval(c.mean, Xs) + Ksn * post.solve_vector(i);
        const Eigen::MatrixXd V = post.factor(i).triangularView<Eigen::Lower>().solve(Ksn.transpose());
        Eigen::MatrixXd cov = assemble_gram(c.kernel, Xs, prior.gram_options());
        cov.noalias() -= V.transpose() * V;
        cov = 0.5 * (cov + cov.transpose()).eval();
        comps.emplace_back(std::move(mean), std::move(cov));
    }
    return GaussianMixtureDist(post.weights(), std::move(comps));
}

GaussianMixtureDist predict_y(const ExactMGPPosterior& post, const Eigen::MatrixXd& Xs)
{
    return add_diagonal_noise(predict_f(post, Xs), post.prior().noise_variance());
}

}  // namespace mgp
