#include "mgp/svmgp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "mgp/adam.hpp"
#include "mgp/error.hpp"
#include "mgp/rng.hpp"

namespace mgp {

namespace {

Eigen::Index tri_size(Eigen::Index m) { return m * (m + 1) / 2; }

Eigen::Index component_param_count(const SparseComponent& c)
{
    const Eigen::Index m = c.inducing.rows();
    return m + tri_size(m) + m * c.inducing.cols() + c.kernel.num_params();
}

void validate_component(const SparseComponent& c)
{
    const Eigen::Index m = c.inducing.rows();
    if (m < 1) throw InvalidArgument("component '" + c.name + "' has no inducing points");
    if (c.q_mean.size() != m || c.q_chol.rows() != m || c.q_chol.cols() != m)
        throw InvalidArgument("component '" + c.name + "': variational shapes do not match " +
                              std::to_string(m) + " inducing points");
    if (!c.inducing.allFinite() || !c.q_mean.allFinite() || !c.q_chol.allFinite())
        throw InvalidArgument("component '" + c.name + "': non-finite variational parameters");
    for (Eigen::Index r = 0; r < m; ++r) {
        if (!(c.q_chol(r, r) > 0.0))
            throw InvalidArgument("component '" + c.name + "': q_chol needs a positive diagonal");
        for (Eigen::Index col = r + 1; col < m; ++col)
            if (c.q_chol(r, col) != 0.0)
                throw InvalidArgument("component '" + c.name + "': q_chol must be lower triangular");
    }
    c.kernel.check_input_dim(c.inducing.cols());
    c.mean.check_input_dim(c.inducing.cols());
}

/// Kmm with jitter and its factorization.
struct InducingPrior {
    Eigen::MatrixXd Kmm;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd mean_z;
};

InducingPrior inducing_prior(const SparseComponent& c, const GramOptions& gram)
{
    InducingPrior p{assemble_gram(c.kernel, c.inducing, gram), {}, mean_eval(c.mean, c.inducing)};
    p.llt.compute(p.Kmm);
    if (p.llt.info() != Eigen::Success)
        throw NumericalError("component '" + c.name + "' (" + std::string(c.kernel.name()) +
                             " kernel): K_mm is not positive definite");
    return p;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt)
{
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// Adds sum_ab G_ab dK_ab/dtheta (log domain) for K = kernel over the rows of Z.
void chain_symmetric(const KernelSpec& kernel, const Eigen::MatrixXd& Z, const Eigen::MatrixXd& G,
                     Eigen::Ref<Eigen::VectorXd> theta_grad, Eigen::Ref<Eigen::MatrixXd> z_grad)
{
    Eigen::VectorXd g(kernel.num_params());
    const Eigen::Index m = Z.rows();
    for (Eigen::Index b = 0; b < m; ++b) {
        for (Eigen::Index a = b; a < m; ++a) {
            const double w = a == b ? G(a, a) : G(a, b) + G(b, a);
            kernel.param_grad(Z.row(a), Z.row(b), g);
            theta_grad += w * g;
            kernel.accumulate_input_grad(Z.row(a), Z.row(b), w, z_grad.row(a));
            if (a != b) kernel.accumulate_input_grad(Z.row(b), Z.row(a), w, z_grad.row(b));
            else kernel.accumulate_input_grad(Z.row(a), Z.row(a), w, z_grad.row(a));
        }
    }
}

}  // namespace

SVMGPModel::SVMGPModel(std::vector<SparseComponent> components, Eigen::VectorXd alpha_prior,
                       Eigen::VectorXd alpha_variational, double noise_variance, GramOptions gram)
    : components_(std::move(components)), alpha_prior_(std::move(alpha_prior)),
      alpha_var_(std::move(alpha_variational)), noise_variance_(noise_variance), gram_(gram)
{
    const auto k = static_cast<Eigen::Index>(components_.size());
    if (k < 1) throw InvalidArgument("SVMGPModel needs at least one component");
    if (alpha_prior_.size() != k || alpha_var_.size() != k)
        throw InvalidArgument("Dirichlet parameters must have one entry per component");
    if (!alpha_prior_.allFinite() || !(alpha_prior_.array() > 0.0).all())
        throw InvalidArgument("Dirichlet prior parameters must be positive and finite");
    if (!alpha_var_.allFinite() || !(alpha_var_.array() > 0.0).all())
        throw InvalidArgument("variational Dirichlet parameters must be positive and finite");
    if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_))
        throw InvalidArgument("noise variance must be positive and finite");
    for (const auto& c : components_) {
        validate_component(c);
        if (c.inducing.cols() != components_.front().inducing.cols())
            throw InvalidArgument("components disagree on input dimension");
    }
}

Eigen::VectorXd SVMGPModel::expected_weights() const { return alpha_var_ / alpha_var_.sum(); }

Eigen::Index SVMGPModel::param_offset(Eigen::Index i) const
{
    Eigen::Index at = 0;
    for (Eigen::Index c = 0; c < i; ++c) at += component_param_count(components_[c]);
    return at;
}

Eigen::Index SVMGPModel::num_params() const { return param_offset(size()) + size() + 1; }

Eigen::VectorXd SVMGPModel::params() const
{
    Eigen::VectorXd p(num_params());
    Eigen::Index at = 0;
    for (const auto& c : components_) {
        const Eigen::Index m = c.inducing.rows();
        const Eigen::Index d = c.inducing.cols();
        p.segment(at, m) = c.q_mean;
        at += m;
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index col = 0; col <= r; ++col)
                p[at++] = r == col ? std::log(c.q_chol(r, r)) : c.q_chol(r, col);
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index j = 0; j < d; ++j) p[at++] = c.inducing(r, j);
        p.segment(at, c.kernel.num_params()) = c.kernel.log_params();
        at += c.kernel.num_params();
    }
    p.segment(at, size()) = alpha_var_.array().log().matrix();
    p[at + size()] = std::log(noise_variance_);
    return p;
}

SVMGPModel SVMGPModel::with_params(const Eigen::VectorXd& p) const
{
    if (p.size() != num_params()) throw InvalidArgument("SVMGPModel: parameter vector has wrong length");
    std::vector<SparseComponent> comps = components_;
    Eigen::Index at = 0;
    for (auto& c : comps) {
        const Eigen::Index m = c.inducing.rows();
        const Eigen::Index d = c.inducing.cols();
        c.q_mean = p.segment(at, m);
        at += m;
        c.q_chol.setZero();
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index col = 0; col <= r; ++col, ++at)
                c.q_chol(r, col) = r == col ? std::exp(p[at]) : p[at];
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index j = 0; j < d; ++j) c.inducing(r, j) = p[at++];
        c.kernel = c.kernel.with_log_params(p.segment(at, c.kernel.num_params()));
        at += c.kernel.num_params();
    }
    Eigen::VectorXd alpha_var = p.segment(at, size()).array().exp().matrix();
    return SVMGPModel(std::move(comps), alpha_prior_, std::move(alpha_var), std::exp(p[at + size()]), gram_);
}

std::vector<std::string> SVMGPModel::param_names() const
{
    std::vector<std::string> names;
    for (const auto& c : components_) {
        const Eigen::Index m = c.inducing.rows();
        for (Eigen::Index r = 0; r < m; ++r) names.push_back(c.name + ".q_mean." + std::to_string(r));
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index col = 0; col <= r; ++col)
                names.push_back(c.name + (r == col ? ".q_chol_logdiag." : ".q_chol.") + std::to_string(r) +
                                "." + std::to_string(col));
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index j = 0; j < c.inducing.cols(); ++j)
                names.push_back(c.name + ".inducing." + std::to_string(r) + "." + std::to_string(j));
        for (const auto& n : c.kernel.param_names()) names.push_back(c.name + ".kernel.log_" + n);
    }
    for (const auto& c : components_) names.push_back(c.name + ".log_alpha_tilde");
    names.push_back("log_noise_variance");
    return names;
}

SVMGPModel SVMGPModel::with_alpha_variational(const Eigen::VectorXd& alpha_variational) const
{
    return SVMGPModel(components_, alpha_prior_, alpha_variational, noise_variance_, gram_);
}

SVMGPModel SVMGPModel::with_component(Eigen::Index i, SparseComponent component) const
{
    auto comps = components_;
    comps.at(i) = std::move(component);
    return SVMGPModel(std::move(comps), alpha_prior_, alpha_var_, noise_variance_, gram_);
}

Eigen::MatrixXd quantile_inducing_points(const Eigen::MatrixXd& X, Eigen::Index m)
{
    const Eigen::Index n = X.rows();
    if (m < 1) throw InvalidArgument("need at least one inducing point");
    if (m > n)
        throw InvalidArgument("inducing points per component (" + std::to_string(m) +
                              ") exceed the number of data points (" + std::to_string(n) + ")");
    Eigen::MatrixXd Z(m, X.cols());
    std::vector<double> col(n);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) col[i] = X(i, j);
        std::sort(col.begin(), col.end());
        for (Eigen::Index q = 0; q < m; ++q) {
            const double pos = static_cast<double>(q + 1) / static_cast<double>(m + 1) *
                               static_cast<double>(n - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const std::size_t hi = std::min<std::size_t>(lo + 1, n - 1);
            const double frac = pos - static_cast<double>(lo);
            Z(q, j) = col[lo] + frac * (col[hi] - col[lo]);
        }
    }
    return Z;
}

SVMGPModel init_model(const std::vector<ComponentPrior>& priors, const Eigen::VectorXd& alpha,
                      const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      Eigen::Index inducing_per_component, GramOptions gram)
{
    if (y.size() != X.rows()) throw InvalidArgument("init_model: X and y lengths differ");
    if (X.rows() < 1) throw InvalidArgument("init_model: empty data");
    const Eigen::MatrixXd Z = quantile_inducing_points(X, inducing_per_component);
    std::vector<SparseComponent> comps;
    for (const auto& p : priors) {
        p.kernel.check_input_dim(X.cols());
        p.mean.check_input_dim(X.cols());
        SparseComponent c{p.name, p.mean, p.kernel, Z, mean_eval(p.mean, Z), {}};
        Eigen::LLT<Eigen::MatrixXd> llt(assemble_gram(p.kernel, Z, gram));
        if (llt.info() != Eigen::Success)
            throw NumericalError("component '" + p.name + "': K_mm is not positive definite at init");
        c.q_chol = llt.matrixL();
        comps.push_back(std::move(c));
    }
    const double var_y = (y.array() - y.mean()).square().mean();
    return SVMGPModel(std::move(comps), alpha, alpha, std::max(0.1 * var_y, 1e-8), gram);
}

double kl_dirichlet(const Eigen::VectorXd& alpha_variational, const Eigen::VectorXd& alpha_prior)
{
    if (alpha_variational.size() != alpha_prior.size() || alpha_prior.size() == 0)
        throw InvalidArgument("kl_dirichlet: parameter vectors must be nonempty and of equal length");
    if (!(alpha_variational.array() > 0.0).all() || !(alpha_prior.array() > 0.0).all() ||
        !alpha_variational.allFinite() || !alpha_prior.allFinite())
        throw InvalidArgument("kl_dirichlet: parameters must be positive and finite");
    using boost::math::digamma;
    using boost::math::lgamma;
    const double a0t = alpha_variational.sum();
    const double a0 = alpha_prior.sum();
    const double psi0 = digamma(a0t);
    double kl = lgamma(a0t) - lgamma(a0);
    for (Eigen::Index i = 0; i < alpha_prior.size(); ++i) {
        const double at = alpha_variational[i];
        const double a = alpha_prior[i];
        kl += lgamma(a) - lgamma(at) + (at - a) * (digamma(at) - psi0);
    }
    return kl;
}

double kl_gaussian_component(const SVMGPModel& model, Eigen::Index i)
{
    const auto& c = model.component(i);
    const InducingPrior p = inducing_prior(c, model.gram_options());
    const Eigen::Index m = c.inducing.rows();
    const Eigen::MatrixXd W = p.llt.matrixL().solve(c.q_chol);  // L_K^{-1} L_q
    const Eigen::VectorXd delta = c.q_mean - p.mean_z;
    const Eigen::VectorXd v = p.llt.matrixL().solve(delta);
    const double logdet_s = 2.0 * c.q_chol.diagonal().array().log().sum();
    return 0.5 * (W.squaredNorm() + v.squaredNorm() - static_cast<double>(m) + log_det(p.llt) - logdet_s);
}

ElboEvaluation evaluate_elbo(const SVMGPModel& model, const Eigen::MatrixXd& Xb,
                             const Eigen::VectorXd& yb, Eigen::Index n_total, bool with_grad)
{
    const Eigen::Index B = Xb.rows();
    if (B < 1) throw InvalidArgument("elbo: empty batch");
    if (yb.size() != B) throw InvalidArgument("elbo: batch inputs and targets differ in length");
    if (Xb.cols() != model.input_dim())
        throw InvalidArgument("elbo: batch has input dimension " + std::to_string(Xb.cols()) +
                              ", model expects " + std::to_string(model.input_dim()));
    if (n_total < B) throw InvalidArgument("elbo: n_total smaller than the batch");

    const Eigen::Index k = model.size();
    const double noise = model.noise_variance();
    const double scale = static_cast<double>(n_total) / static_cast<double>(B);
    const double jitter_scale = model.gram_options().jitter_scale;
    const Eigen::VectorXd pi = model.expected_weights();

    ElboEvaluation out;
    out.terms.component_expected_log_lik.resize(k);
    out.terms.kl_components.resize(k);
    if (with_grad) out.grad = Eigen::VectorXd::Zero(model.num_params());
    const Eigen::Index noise_at = model.num_params() - 1;

    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& c = model.component(i);
        const Eigen::Index m = c.inducing.rows();
        const Eigen::Index d = c.inducing.cols();
        const InducingPrior prior = inducing_prior(c, model.gram_options());

        const Eigen::MatrixXd Knm = cross_gram(c.kernel, Xb, c.inducing);
        Eigen::VectorXd kdiag(B);
        for (Eigen::Index j = 0; j < B; ++j) kdiag[j] = c.kernel(Xb.row(j), Xb.row(j));
        const Eigen::MatrixXd A = prior.llt.solve(Knm.transpose());  // K_mm^{-1} K_mn
        const Eigen::VectorXd delta = c.q_mean - prior.mean_z;
        const Eigen::VectorXd b = prior.llt.solve(delta);
        const Eigen::VectorXd r = yb - mean_eval(c.mean, Xb) - Knm * b;
        const Eigen::MatrixXd LtA = c.q_chol.transpose() * A;

        const double explained = Knm.cwiseProduct(A.transpose()).sum();  // sum_j k_j^T K_mm^{-1} k_j
        const double spread = LtA.squaredNorm();                        // sum_j a_j^T S a_j
        const double T = r.squaredNorm() + kdiag.sum() - explained + spread;
        const double ell_sum =
            -0.5 * static_cast<double>(B) * std::log(2.0 * std::numbers::pi * noise) - T / (2.0 * noise);
        const double E = scale * ell_sum;

        const Eigen::MatrixXd W = prior.llt.matrixL().solve(c.q_chol);
        const Eigen::VectorXd v = prior.llt.matrixL().solve(delta);
        const double logdet_s = 2.0 * c.q_chol.diagonal().array().log().sum();
        const double kl = 0.5 * (W.squaredNorm() + v.squaredNorm() - static_cast<double>(m) +
                                 log_det(prior.llt) - logdet_s);

        if (!std::isfinite(E) || !std::isfinite(kl))
            throw NumericalError("component '" + c.name + "' (" + std::string(c.kernel.name()) +
                                 " kernel): non-finite ELBO term");
        out.terms.component_expected_log_lik[i] = E;
        out.terms.kl_components[i] = kl;
        out.terms.expected_log_lik += pi[i] * E;

        if (with_grad) {
            const double cw = scale * pi[i];
            const double gamma = -cw / (2.0 * noise);
            const Eigen::MatrixXd Q = prior.llt.solve(Eigen::MatrixXd::Identity(m, m));
            const Eigen::MatrixXd S = c.q_chol * c.q_chol.transpose();
            const Eigen::MatrixXd AAt = A * A.transpose();
            const Eigen::VectorXd g = A * r;
            const Eigen::MatrixXd SQ = S * Q;

            // dF/dK_mm (entries treated as independent), dF/dK_nm, dF/dk(x_j, x_j)
            Eigen::MatrixXd G_mm = gamma * (2.0 * g * b.transpose() + AAt - SQ.transpose() * AAt -
                                            AAt * SQ) -
                                   0.5 * (Q - Q * SQ - b * b.transpose());
            const Eigen::MatrixXd G_nm =
                gamma * (-2.0 * r * b.transpose() - 2.0 * A.transpose() + 2.0 * A.transpose() * SQ);
            if (jitter_scale > 0.0)
                G_mm.diagonal().array() += jitter_scale * G_mm.trace() / static_cast<double>(m);

            Eigen::Ref<Eigen::VectorXd> grad = out.grad;
            // q_mean
            const Eigen::VectorXd d_delta = (cw / noise) * g - b;
            grad.segment(at, m) = d_delta;
            // q_chol, lower triangle row by row, log diagonal
            const Eigen::MatrixXd G_S = gamma * AAt - 0.5 * Q;
            const Eigen::MatrixXd dL = 2.0 * G_S * c.q_chol;
            Eigen::Index t = at + m;
            for (Eigen::Index row = 0; row < m; ++row)
                for (Eigen::Index col = 0; col <= row; ++col, ++t)
                    grad[t] = row == col ? c.q_chol(row, row) * dL(row, row) + 1.0 : dL(row, col);
            // inducing locations and kernel hyperparameters
            Eigen::MatrixXd z_grad = Eigen::MatrixXd::Zero(m, d);
            Eigen::VectorXd theta_grad = Eigen::VectorXd::Zero(c.kernel.num_params());
            chain_symmetric(c.kernel, c.inducing, G_mm, theta_grad, z_grad);
            Eigen::VectorXd gk(c.kernel.num_params());
            for (Eigen::Index a = 0; a < m; ++a) {
                for (Eigen::Index j = 0; j < B; ++j) {
                    const double w = G_nm(j, a);
                    c.kernel.param_grad(Xb.row(j), c.inducing.row(a), gk);
                    theta_grad += w * gk;
                    c.kernel.accumulate_input_grad(c.inducing.row(a), Xb.row(j), w, z_grad.row(a));
                }
                c.mean.accumulate_input_grad(c.inducing.row(a), -d_delta[a], z_grad.row(a));
            }
            for (Eigen::Index j = 0; j < B; ++j) {
                c.kernel.param_grad(Xb.row(j), Xb.row(j), gk);
                theta_grad += gamma * gk;
            }
            for (Eigen::Index row = 0; row < m; ++row)
                for (Eigen::Index j = 0; j < d; ++j) grad[t++] = z_grad(row, j);
            grad.segment(t, c.kernel.num_params()) = theta_grad;

            grad[noise_at] += cw * (-0.5 * static_cast<double>(B) + T / (2.0 * noise));
        }
        at += component_param_count(c);
    }

    out.terms.kl_dirichlet = kl_dirichlet(model.alpha_variational(), model.alpha_prior());
    out.terms.value = out.terms.expected_log_lik - out.terms.kl_components.sum() - out.terms.kl_dirichlet;

    if (with_grad) {
        using boost::math::trigamma;
        const Eigen::VectorXd& at_var = model.alpha_variational();
        const Eigen::VectorXd& a_prior = model.alpha_prior();
        const double a0t = at_var.sum();
        const double shared = (a0t - a_prior.sum()) * trigamma(a0t);
        const double mean_E = out.terms.expected_log_lik;
        for (Eigen::Index i = 0; i < k; ++i) {
            const double d_kl = (at_var[i] - a_prior[i]) * trigamma(at_var[i]) - shared;
            out.grad[at + i] = pi[i] * (out.terms.component_expected_log_lik[i] - mean_E) - at_var[i] * d_kl;
        }
    }
    return out;
}

double elbo(const SVMGPModel& model, const Eigen::MatrixXd& X_batch, const Eigen::VectorXd& y_batch,
            Eigen::Index n_total)
{
    return evaluate_elbo(model, X_batch, y_batch, n_total, false).terms.value;
}

Eigen::VectorXd elbo_grad(const SVMGPModel& model, const Eigen::MatrixXd& X_batch,
                          const Eigen::VectorXd& y_batch, Eigen::Index n_total)
{
    return evaluate_elbo(model, X_batch, y_batch, n_total, true).grad;
}

SVMGPTrainResult train(const SVMGPModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const SVMGPTrainConfig& config)
{
    const Eigen::Index n = X.rows();
    if (y.size() != n) throw InvalidArgument("train: X and y lengths differ");
    if (config.max_epochs < 0) throw InvalidArgument("train: max_epochs must be nonnegative");
    if (config.batch_size < 1 || config.batch_size > n)
        throw InvalidArgument("train: batch_size must lie in [1, n]");
    if (!(config.learning_rate > 0.0)) throw InvalidArgument("train: learning_rate must be positive");
    if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("train: data contains NaN or Inf");

    SVMGPTrainResult result{model, {elbo(model, X, y, n)}, 0};
    double best = result.trace.front();

    SVMGPModel current = model;
    Eigen::VectorXd theta = model.params();
    const Eigen::Index alpha_at = model.param_offset(model.size());
    Adam adam(theta.size(), AdamOptions{.learning_rate = config.learning_rate});
    const CounterRng root(config.seed);
    std::vector<Eigen::Index> order(n);
    Eigen::MatrixXd Xb;
    Eigen::VectorXd yb;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        CounterRng rng = root.split(static_cast<std::uint64_t>(epoch));
        for (Eigen::Index i = n - 1; i > 0; --i)
            std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
        try {
            for (Eigen::Index start = 0; start < n; start += config.batch_size) {
                const Eigen::Index len = std::min(config.batch_size, n - start);
                Xb.resize(len, X.cols());
                yb.resize(len);
                for (Eigen::Index j = 0; j < len; ++j) {
                    Xb.row(j) = X.row(order[start + j]);
                    yb[j] = y[order[start + j]];
                }
                const Eigen::VectorXd grad = elbo_grad(current, Xb, yb, n);
                adam.ascend(theta, grad);
                theta.segment(alpha_at, model.size()) = theta.segment(alpha_at, model.size())
                                                            .cwiseMax(std::log(kAlphaMin))
                                                            .cwiseMin(std::log(kAlphaMax));
                current = current.with_params(theta);
            }
            const double value = elbo(current, X, y, n);
            if (!std::isfinite(value)) throw NumericalError("non-finite full-data ELBO");
            result.trace.push_back(value);
            if (value >= best) {
                best = value;
                result.model = current;
                result.best_epoch = epoch;
            }
        } catch (const NumericalError& e) {
            throw NumericalError("SV-MGP training, epoch " + std::to_string(epoch) + ": " + e.what());
        } catch (const InvalidArgument& e) {
            throw NumericalError("SV-MGP training, epoch " + std::to_string(epoch) + ": " + e.what());
        }
    }
    return result;
}

GaussianMixtureDist predict(const SVMGPModel& model, const Eigen::MatrixXd& Xs)
{
    if (Xs.rows() < 1) throw InvalidArgument("predict: need at least one test point");
    if (Xs.cols() != model.input_dim())
        throw InvalidArgument("predict: test inputs have dimension " + std::to_string(Xs.cols()) +
                              ", model expects " + std::to_string(model.input_dim()));
    std::vector<GaussianDist> comps;
    for (const auto& c : model.components()) {
        const InducingPrior prior = inducing_prior(c, model.gram_options());
        const Eigen::MatrixXd Ksm = cross_gram(c.kernel, Xs, c.inducing);
        const Eigen::MatrixXd A = prior.llt.solve(Ksm.transpose());  // K_mm^{-1} K_m*
        Eigen::VectorXd mean = mean_eval(c.mean, Xs) + A.transpose() * (c.q_mean - prior.mean_z);
        const Eigen::MatrixXd LtA = c.q_chol.transpose() * A;
        Eigen::MatrixXd cov = assemble_gram(c.kernel, Xs, model.gram_options());
        cov.noalias() -= Ksm * A;
        cov.noalias() += LtA.transpose() * LtA;
        cov = 0.5 * (cov + cov.transpose()).eval();
        comps.emplace_back(std::move(mean), std::move(cov));
    }
    return GaussianMixtureDist(model.expected_weights(), std::move(comps));
}

GaussianMixtureDist predict_y(const SVMGPModel& model, const Eigen::MatrixXd& Xs)
{
    return add_diagonal_noise(predict(model, Xs), model.noise_variance());
}

}  // namespace mgp
