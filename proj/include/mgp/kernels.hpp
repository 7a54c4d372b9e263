#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mgp {

/// A single input point: any row or column of doubles with arbitrary stride.
using PointRef = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;
/// Writable gradient slot with the same layout as PointRef.
using PointOut = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

struct GramOptions {
    /// Diagonal jitter is jitter_scale times the mean of the raw diagonal.
    double jitter_scale = 1e-6;
};

enum class KernelKind { ArdSe, Linear, Periodic };

/// Covariance function with log-parameterized hyperparameters.
///
/// Canonical parameter order (all in log domain):
///   ArdSe:    log signal_variance, log lengthscale_1..d
///   Linear:   log bias_variance, log weight_variance
///   Periodic: log signal_variance, log lengthscale, log period
///
/// Linear accepts any input dimension; Periodic is one-dimensional. A zero
/// Linear bias is stored as log(0) = -inf and stays frozen at zero.
class KernelSpec {
public:
    static KernelSpec ard_se(double signal_variance, const Eigen::VectorXd& lengthscales);
    static KernelSpec linear(double bias_variance, double weight_variance);
    static KernelSpec periodic(double signal_variance, double lengthscale, double period);

    KernelKind kind() const { return kind_; }
    std::string_view name() const;

    /// Input dimension the kernel is bound to, or nullopt when any d works.
    std::optional<Eigen::Index> input_dim() const;
    /// Throws InvalidArgument if d is not accepted.
    void check_input_dim(Eigen::Index d) const;

    Eigen::Index num_params() const { return log_params_.size(); }
    const Eigen::VectorXd& log_params() const { return log_params_; }
    KernelSpec with_log_params(const Eigen::VectorXd& log_params) const;
    std::vector<std::string> param_names() const;
    double natural_param(Eigen::Index i) const;

    double operator()(PointRef x, PointRef xp) const;

    /// Writes dk/d(log theta) into grad (size num_params) and returns k(x, x').
    double param_grad(PointRef x, PointRef xp, Eigen::Ref<Eigen::VectorXd> grad) const;

    /// Adds scale * dk(x, x')/dx to out.
    void accumulate_input_grad(PointRef x, PointRef xp, double scale, PointOut out) const;

private:
    KernelSpec(KernelKind kind, Eigen::VectorXd log_params)
        : kind_(kind), log_params_(std::move(log_params)) {}

    KernelKind kind_;
    Eigen::VectorXd log_params_;
};

/// Checked single evaluation.
double kernel_eval(const KernelSpec& spec, PointRef x, PointRef xp);

/// Kernel matrix over the rows of X plus diagonal jitter; not factorized.
Eigen::MatrixXd assemble_gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                              const GramOptions& opts = {});

/// Jitter value assemble_gram would add for a raw (jitter-free) Gram matrix.
double jitter_for(const Eigen::MatrixXd& raw_gram, const GramOptions& opts);

/// Like assemble_gram but verifies the result admits a Cholesky factorization;
/// throws NumericalError naming the kernel otherwise.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                     const GramOptions& opts = {});

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& Xp);

/// dK/d(log theta) for each hyperparameter, jitter excluded.
std::vector<Eigen::MatrixXd> kernel_param_grads(const KernelSpec& spec,
                                                const Eigen::MatrixXd& X);

enum class MeanKind { Zero, Constant, Linear };

/// Prior mean function. Parameters are unconstrained (natural domain):
/// Constant: [c]; Linear: [w_1..w_d, b].
class MeanSpec {
public:
    static MeanSpec zero();
    static MeanSpec constant(double value);
    static MeanSpec linear(const Eigen::VectorXd& weights, double bias);

    MeanKind kind() const { return kind_; }
    std::string_view name() const;
    std::optional<Eigen::Index> input_dim() const;
    void check_input_dim(Eigen::Index d) const;

    Eigen::Index num_params() const { return params_.size(); }
    const Eigen::VectorXd& params() const { return params_; }
    MeanSpec with_params(const Eigen::VectorXd& params) const;

    double operator()(PointRef x) const;
    /// Adds scale * dm(x)/d(params) to acc.
    void accumulate_param_grad(PointRef x, double scale, Eigen::Ref<Eigen::VectorXd> acc) const;
    /// Adds scale * dm(x)/dx to out.
    void accumulate_input_grad(PointRef x, double scale, PointOut out) const;

private:
    MeanSpec(MeanKind kind, Eigen::VectorXd params) : kind_(kind), params_(std::move(params)) {}

    MeanKind kind_;
    Eigen::VectorXd params_;
};

Eigen::VectorXd mean_eval(const MeanSpec& spec, const Eigen::MatrixXd& X);

}  // namespace mgp
