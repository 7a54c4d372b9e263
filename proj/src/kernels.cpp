#include "mgp/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "mgp/error.hpp"

namespace mgp {

namespace {

double checked_log(double value, const char* what, bool allow_zero = false)
{
    if (!std::isfinite(value) || value < 0.0 || (!allow_zero && value == 0.0))
        throw InvalidArgument(std::string(what) + " must be " +
                              (allow_zero ? "nonnegative" : "positive") + " and finite");
    return std::log(value);
}

}  // namespace

KernelSpec KernelSpec::ard_se(double signal_variance, const Eigen::VectorXd& lengthscales)
{
    if (lengthscales.size() == 0) throw InvalidArgument("ard_se needs at least one lengthscale");
    Eigen::VectorXd p(1 + lengthscales.size());
    p[0] = checked_log(signal_variance, "ard_se signal_variance");
    for (Eigen::Index j = 0; j < lengthscales.size(); ++j)
        p[1 + j] = checked_log(lengthscales[j], "ard_se lengthscale");
    return KernelSpec(KernelKind::ArdSe, std::move(p));
}

KernelSpec KernelSpec::linear(double bias_variance, double weight_variance)
{
    Eigen::VectorXd p(2);
    p[0] = checked_log(bias_variance, "linear bias_variance", true);
    p[1] = checked_log(weight_variance, "linear weight_variance");
    return KernelSpec(KernelKind::Linear, std::move(p));
}

KernelSpec KernelSpec::periodic(double signal_variance, double lengthscale, double period)
{
    Eigen::VectorXd p(3);
    p[0] = checked_log(signal_variance, "periodic signal_variance");
    p[1] = checked_log(lengthscale, "periodic lengthscale");
    p[2] = checked_log(period, "periodic period");
    return KernelSpec(KernelKind::Periodic, std::move(p));
}

std::string_view KernelSpec::name() const
{
    switch (kind_) {
    case KernelKind::ArdSe: return "ard_se";
    case KernelKind::Linear: return "linear";
    case KernelKind::Periodic: return "periodic";
    }
    return "unknown";
}

std::optional<Eigen::Index> KernelSpec::input_dim() const
{
    switch (kind_) {
    case KernelKind::ArdSe: return log_params_.size() - 1;
    case KernelKind::Periodic: return 1;
    case KernelKind::Linear: break;
    }
    return std::nullopt;
}

void KernelSpec::check_input_dim(Eigen::Index d) const
{
    const auto want = input_dim();
    if (d < 1 || (want && *want != d))
        throw InvalidArgument(std::string(name()) + " kernel expects input dimension " +
                              (want ? std::to_string(*want) : std::string(">= 1")) + ", got " +
                              std::to_string(d));
}

KernelSpec KernelSpec::with_log_params(const Eigen::VectorXd& log_params) const
{
    if (log_params.size() != log_params_.size())
        throw InvalidArgument("kernel parameter vector has wrong length");
    for (Eigen::Index i = 0; i < log_params.size(); ++i) {
        // -inf is the frozen zero bias of the linear kernel; everything else must be finite.
        const bool frozen_bias = kind_ == KernelKind::Linear && i == 0 &&
                                 log_params[i] == -std::numeric_limits<double>::infinity();
        if (!std::isfinite(log_params[i]) && !frozen_bias)
            throw InvalidArgument("non-finite kernel parameter in " + std::string(name()));
    }
    return KernelSpec(kind_, log_params);
}

std::vector<std::string> KernelSpec::param_names() const
{
    switch (kind_) {
    case KernelKind::ArdSe: {
        std::vector<std::string> names{"signal_variance"};
        for (Eigen::Index j = 1; j < log_params_.size(); ++j)
            names.push_back("lengthscale_" + std::to_string(j));
        return names;
    }
    case KernelKind::Linear: return {"bias_variance", "weight_variance"};
    case KernelKind::Periodic: return {"signal_variance", "lengthscale", "period"};
    }
    return {};
}

double KernelSpec::natural_param(Eigen::Index i) const { return std::exp(log_params_[i]); }

double KernelSpec::operator()(PointRef x, PointRef xp) const
{
    switch (kind_) {
    case KernelKind::ArdSe: {
        double q = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const double r = x[j] - xp[j];
            q += r * r * std::exp(-2.0 * log_params_[1 + j]);
        }
        return std::exp(log_params_[0] - 0.5 * q);
    }
    case KernelKind::Linear:
        return std::exp(log_params_[0]) + std::exp(log_params_[1]) * x.dot(xp);
    case KernelKind::Periodic: {
        const double s = std::sin(std::numbers::pi * std::abs(x[0] - xp[0]) / std::exp(log_params_[2]));
        return std::exp(log_params_[0] - 2.0 * s * s * std::exp(-2.0 * log_params_[1]));
    }
    }
    return 0.0;
}

double KernelSpec::param_grad(PointRef x, PointRef xp, Eigen::Ref<Eigen::VectorXd> grad) const
{
    switch (kind_) {
    case KernelKind::ArdSe: {
        double q = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const double r = x[j] - xp[j];
            const double t = r * r * std::exp(-2.0 * log_params_[1 + j]);
            grad[1 + j] = t;
            q += t;
        }
        const double k = std::exp(log_params_[0] - 0.5 * q);
        grad[0] = k;
        grad.tail(x.size()) *= k;
        return k;
    }
    case KernelKind::Linear: {
        const double b = std::exp(log_params_[0]);
        const double v = std::exp(log_params_[1]) * x.dot(xp);
        grad[0] = b;
        grad[1] = v;
        return b + v;
    }
    case KernelKind::Periodic: {
        const double inv_l2 = std::exp(-2.0 * log_params_[1]);
        const double u = std::numbers::pi * (x[0] - xp[0]) / std::exp(log_params_[2]);
        const double s = std::sin(u);
        const double k = std::exp(log_params_[0] - 2.0 * s * s * inv_l2);
        grad[0] = k;
        grad[1] = k * 4.0 * s * s * inv_l2;
        grad[2] = k * 2.0 * u * std::sin(2.0 * u) * inv_l2;
        return k;
    }
    }
    return 0.0;
}

void KernelSpec::accumulate_input_grad(PointRef x, PointRef xp, double scale, PointOut out) const
{
    switch (kind_) {
    case KernelKind::ArdSe: {
        const double k = (*this)(x, xp);
        for (Eigen::Index j = 0; j < x.size(); ++j)
            out[j] -= scale * k * (x[j] - xp[j]) * std::exp(-2.0 * log_params_[1 + j]);
        return;
    }
    case KernelKind::Linear:
        out += (scale * std::exp(log_params_[1])) * xp;
        return;
    case KernelKind::Periodic: {
        const double inv_l2 = std::exp(-2.0 * log_params_[1]);
        const double p = std::exp(log_params_[2]);
        const double u = std::numbers::pi * (x[0] - xp[0]) / p;
        const double s = std::sin(u);
        const double k = std::exp(log_params_[0] - 2.0 * s * s * inv_l2);
        out[0] -= scale * k * 2.0 * inv_l2 * std::sin(2.0 * u) * std::numbers::pi / p;
        return;
    }
    }
}

double kernel_eval(const KernelSpec& spec, PointRef x, PointRef xp)
{
    if (x.size() != xp.size())
        throw InvalidArgument("kernel_eval: input dimensions differ (" + std::to_string(x.size()) +
                              " vs " + std::to_string(xp.size()) + ")");
    spec.check_input_dim(x.size());
    return spec(x, xp);
}

double jitter_for(const Eigen::MatrixXd& raw_gram, const GramOptions& opts)
{
    if (opts.jitter_scale < 0.0) throw InvalidArgument("jitter_scale must be nonnegative");
    if (opts.jitter_scale == 0.0 || raw_gram.rows() == 0) return 0.0;
    return std::max(0.0, opts.jitter_scale * raw_gram.diagonal().mean());
}

Eigen::MatrixXd assemble_gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                              const GramOptions& opts)
{
    if (X.rows() < 1) throw InvalidArgument("gram: need at least one input point");
    spec.check_input_dim(X.cols());
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            const double v = spec(X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    K.diagonal().array() += jitter_for(K, opts);
    return K;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X, const GramOptions& opts)
{
    Eigen::MatrixXd K = assemble_gram(spec, X, opts);
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw NumericalError("Gram matrix of " + std::string(spec.name()) +
                             " kernel is not positive definite after jitter");
    return K;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& Xp)
{
    if (X.cols() != Xp.cols())
        throw InvalidArgument("cross_gram: input dimensions differ (" + std::to_string(X.cols()) +
                              " vs " + std::to_string(Xp.cols()) + ")");
    spec.check_input_dim(X.cols());
    Eigen::MatrixXd K(X.rows(), Xp.rows());
    for (Eigen::Index j = 0; j < Xp.rows(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i) K(i, j) = spec(X.row(i), Xp.row(j));
    return K;
}

std::vector<Eigen::MatrixXd> kernel_param_grads(const KernelSpec& spec, const Eigen::MatrixXd& X)
{
    spec.check_input_dim(X.cols());
    const Eigen::Index n = X.rows();
    const Eigen::Index p = spec.num_params();
    std::vector<Eigen::MatrixXd> grads(p, Eigen::MatrixXd(n, n));
    Eigen::VectorXd g(p);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            spec.param_grad(X.row(i), X.row(j), g);
            for (Eigen::Index t = 0; t < p; ++t) {
                grads[t](i, j) = g[t];
                grads[t](j, i) = g[t];
            }
        }
    }
    return grads;
}

MeanSpec MeanSpec::zero() { return MeanSpec(MeanKind::Zero, Eigen::VectorXd()); }

MeanSpec MeanSpec::constant(double value)
{
    if (!std::isfinite(value)) throw InvalidArgument("constant mean must be finite");
    return MeanSpec(MeanKind::Constant, Eigen::VectorXd::Constant(1, value));
}

MeanSpec MeanSpec::linear(const Eigen::VectorXd& weights, double bias)
{
    if (weights.size() == 0) throw InvalidArgument("linear mean needs at least one weight");
    Eigen::VectorXd p(weights.size() + 1);
    p << weights, bias;
    if (!p.allFinite()) throw InvalidArgument("linear mean parameters must be finite");
    return MeanSpec(MeanKind::Linear, std::move(p));
}

std::string_view MeanSpec::name() const
{
    switch (kind_) {
    case MeanKind::Zero: return "zero";
    case MeanKind::Constant: return "constant";
    case MeanKind::Linear: return "linear";
    }
    return "unknown";
}

std::optional<Eigen::Index> MeanSpec::input_dim() const
{
    if (kind_ == MeanKind::Linear) return params_.size() - 1;
    return std::nullopt;
}

void MeanSpec::check_input_dim(Eigen::Index d) const
{
    const auto want = input_dim();
    if (want && *want != d)
        throw InvalidArgument("linear mean expects input dimension " + std::to_string(*want) +
                              ", got " + std::to_string(d));
}

MeanSpec MeanSpec::with_params(const Eigen::VectorXd& params) const
{
    if (params.size() != params_.size()) throw InvalidArgument("mean parameter vector has wrong length");
    if (!params.allFinite()) throw InvalidArgument("non-finite mean parameter");
    return MeanSpec(kind_, params);
}

double MeanSpec::operator()(PointRef x) const
{
    switch (kind_) {
    case MeanKind::Zero: return 0.0;
    case MeanKind::Constant: return params_[0];
    case MeanKind::Linear: {
        const Eigen::Index d = params_.size() - 1;
        return x.dot(params_.head(d).transpose()) + params_[d];
    }
    }
    return 0.0;
}

void MeanSpec::accumulate_param_grad(PointRef x, double scale, Eigen::Ref<Eigen::VectorXd> acc) const
{
    switch (kind_) {
    case MeanKind::Zero: return;
    case MeanKind::Constant: acc[0] += scale; return;
    case MeanKind::Linear: {
        const Eigen::Index d = params_.size() - 1;
        acc.head(d) += scale * x.transpose();
        acc[d] += scale;
        return;
    }
    }
}

void MeanSpec::accumulate_input_grad(PointRef, double scale, PointOut out) const
{
    if (kind_ == MeanKind::Linear) out += scale * params_.head(params_.size() - 1).transpose();
}

Eigen::VectorXd mean_eval(const MeanSpec& spec, const Eigen::MatrixXd& X)
{
    spec.check_input_dim(X.cols());
    Eigen::VectorXd m(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) m[i] = spec(X.row(i));
    return m;
}

}  // namespace mgp
