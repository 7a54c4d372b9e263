#include "mgp/gaussmix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "mgp/error.hpp"
#include "mgp/rng.hpp"

namespace mgp {

namespace {

constexpr double kLogWeightFloor = -745.0;

Eigen::VectorXd take(const Eigen::VectorXd& v, std::span<const Eigen::Index> idx)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) out[a] = v[idx[a]];
    return out;
}

Eigen::MatrixXd take(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows,
                     std::span<const Eigen::Index> cols)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t b = 0; b < cols.size(); ++b)
        for (std::size_t a = 0; a < rows.size(); ++a) out(a, b) = m(rows[a], cols[b]);
    return out;
}

void check_indices(std::span<const Eigen::Index> idx, Eigen::Index n, const char* op)
{
    if (idx.empty()) throw InvalidArgument(std::string(op) + ": index set is empty");
    std::vector<bool> seen(n, false);
    for (const auto i : idx) {
        if (i < 0 || i >= n)
            throw InvalidArgument(std::string(op) + ": index " + std::to_string(i) +
                                  " out of range for dimension " + std::to_string(n));
        if (seen[i]) throw InvalidArgument(std::string(op) + ": duplicate index " + std::to_string(i));
        seen[i] = true;
    }
}

double logpdf_with_factor(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol,
                          const Eigen::VectorXd& x)
{
    const Eigen::VectorXd z = chol.triangularView<Eigen::Lower>().solve(x - mean);
    const double log_det = 2.0 * chol.diagonal().array().log().sum();
    const double n = static_cast<double>(mean.size());
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

}  // namespace

GaussianDist::GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance))
{
    const Eigen::Index n = mean_.size();
    if (n < 1) throw InvalidArgument("GaussianDist: empty mean");
    if (covariance_.rows() != n || covariance_.cols() != n)
        throw InvalidArgument("GaussianDist: covariance shape does not match mean length " +
                              std::to_string(n));
    if (!mean_.allFinite() || !covariance_.allFinite())
        throw InvalidArgument("GaussianDist: non-finite mean or covariance");
    const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("GaussianDist: covariance is not symmetric");
    covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() == Eigen::Success) chol_ = llt.matrixL();
}

const Eigen::MatrixXd& GaussianDist::cholesky() const
{
    if (!chol_) throw NumericalError("Gaussian covariance is not positive definite");
    return *chol_;
}

GaussianMixtureDist::GaussianMixtureDist(Eigen::VectorXd weights, std::vector<GaussianDist> components)
    : weights_(std::move(weights)), components_(std::move(components))
{
    if (components_.empty()) throw InvalidArgument("mixture needs at least one component");
    if (weights_.size() != static_cast<Eigen::Index>(components_.size()))
        throw InvalidArgument("mixture: " + std::to_string(weights_.size()) + " weights for " +
                              std::to_string(components_.size()) + " components");
    if (!weights_.allFinite() || (weights_.array() < 0.0).any())
        throw InvalidArgument("mixture weights must be finite and nonnegative");
    if (std::abs(weights_.sum() - 1.0) > 1e-10)
        throw InvalidArgument("mixture weights must sum to 1");
    for (const auto& c : components_)
        if (c.dim() != components_.front().dim())
            throw InvalidArgument("mixture components have different dimensions");
}

double mvn_logpdf(const GaussianDist& dist, const Eigen::VectorXd& x)
{
    if (x.size() != dist.dim())
        throw InvalidArgument("mvn_logpdf: point has dimension " + std::to_string(x.size()) +
                              ", distribution has " + std::to_string(dist.dim()));
    return logpdf_with_factor(dist.mean(), dist.cholesky(), x);
}

double log_sum_exp(const Eigen::VectorXd& v)
{
    const double m = v.maxCoeff();
    if (m == -std::numeric_limits<double>::infinity()) return m;
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights)
{
    if (log_weights.hasNaN()) throw NumericalError("NaN in mixture log weights");
    const double lse = log_sum_exp(log_weights);
    if (!std::isfinite(lse))
        throw NumericalError("degenerate mixture weights: every component has zero density");
    Eigen::VectorXd w(log_weights.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double lw = log_weights[i] - lse;
        w[i] = lw < kLogWeightFloor ? 0.0 : std::exp(lw);
    }
    return w / w.sum();
}

double mixture_logpdf(const GaussianMixtureDist& mix, const Eigen::VectorXd& x)
{
    Eigen::VectorXd terms(mix.size());
    for (Eigen::Index i = 0; i < mix.size(); ++i) {
        const double w = mix.weights()[i];
        terms[i] = w > 0.0 ? std::log(w) + mvn_logpdf(mix.component(i), x)
                           : -std::numeric_limits<double>::infinity();
    }
    return log_sum_exp(terms);
}

GaussianMixtureDist marginalize(const GaussianMixtureDist& mix, std::span<const Eigen::Index> keep)
{
    check_indices(keep, mix.dim(), "marginalize");
    std::vector<GaussianDist> comps;
    comps.reserve(mix.size());
    for (const auto& c : mix.components())
        comps.emplace_back(take(c.mean(), keep), take(c.covariance(), keep, keep));
    return GaussianMixtureDist(mix.weights(), std::move(comps));
}

GaussianMixtureDist condition(const GaussianMixtureDist& mix, std::span<const Eigen::Index> observed,
                              const Eigen::VectorXd& values)
{
    const Eigen::Index n = mix.dim();
    check_indices(observed, n, "condition");
    if (static_cast<Eigen::Index>(observed.size()) >= n)
        throw InvalidArgument("condition: observed set must be a strict subset of the coordinates");
    if (values.size() != static_cast<Eigen::Index>(observed.size()))
        throw InvalidArgument("condition: " + std::to_string(values.size()) + " values for " +
                              std::to_string(observed.size()) + " observed coordinates");

    std::vector<bool> is_observed(n, false);
    for (const auto i : observed) is_observed[i] = true;
    std::vector<Eigen::Index> rest;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!is_observed[i]) rest.push_back(i);

    Eigen::VectorXd log_w(mix.size());
    std::vector<GaussianDist> comps;
    comps.reserve(mix.size());
    for (Eigen::Index c = 0; c < mix.size(); ++c) {
        const auto& comp = mix.component(c);
        const Eigen::VectorXd mu_b = take(comp.mean(), observed);
        const Eigen::MatrixXd cov_b = take(comp.covariance(), observed, observed);
        Eigen::LLT<Eigen::MatrixXd> llt(cov_b);
        if (llt.info() != Eigen::Success)
            throw NumericalError("condition: observed block of component " + std::to_string(c) +
                                 " is not positive definite");
        const Eigen::MatrixXd chol = llt.matrixL();

        const double w = mix.weights()[c];
        log_w[c] = w > 0.0 ? std::log(w) + logpdf_with_factor(mu_b, chol, values)
                           : -std::numeric_limits<double>::infinity();

        const Eigen::MatrixXd cov_ab = take(comp.covariance(), rest, observed);
        const Eigen::MatrixXd gain_t = llt.solve(cov_ab.transpose());  // cov_b^{-1} cov_ba
        Eigen::VectorXd mu = take(comp.mean(), rest) + gain_t.transpose() * (values - mu_b);
        Eigen::MatrixXd cov = take(comp.covariance(), rest, rest) - cov_ab * gain_t;
        cov = 0.5 * (cov + cov.transpose()).eval();
        comps.emplace_back(std::move(mu), std::move(cov));
    }
    return GaussianMixtureDist(normalize_log_weights(log_w), std::move(comps));
}

GaussianMixtureDist add_diagonal_noise(const GaussianMixtureDist& mix, double variance)
{
    if (!(variance >= 0.0) || !std::isfinite(variance))
        throw InvalidArgument("add_diagonal_noise: variance must be nonnegative and finite");
    std::vector<GaussianDist> comps;
    comps.reserve(mix.size());
    for (const auto& c : mix.components()) {
        Eigen::MatrixXd cov = c.covariance();
        cov.diagonal().array() += variance;
        comps.emplace_back(c.mean(), std::move(cov));
    }
    return GaussianMixtureDist(mix.weights(), std::move(comps));
}

Eigen::MatrixXd sample(const GaussianMixtureDist& mix, Eigen::Index count, std::uint64_t seed)
{
    if (count < 1) throw InvalidArgument("sample: count must be at least 1");
    const Eigen::Index n = mix.dim();
    CounterRng rng(seed);
    Eigen::VectorXd cumulative(mix.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mix.size(); ++i) cumulative[i] = (acc += mix.weights()[i]);

    Eigen::MatrixXd out(count, n);
    Eigen::VectorXd z(n);
    for (Eigen::Index s = 0; s < count; ++s) {
        const double u = rng.uniform() * acc;
        Eigen::Index c = 0;
        while (c + 1 < mix.size() && (u >= cumulative[c] || mix.weights()[c] == 0.0)) ++c;
        for (Eigen::Index j = 0; j < n; ++j) z[j] = rng.normal();
        const auto& comp = mix.component(c);
        out.row(s) = (comp.mean() + comp.cholesky().triangularView<Eigen::Lower>() * z).transpose();
    }
    return out;
}

Moments moments(const GaussianMixtureDist& mix)
{
    const Eigen::Index n = mix.dim();
    Moments m{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index i = 0; i < mix.size(); ++i) {
        const double w = mix.weights()[i];
        const auto& c = mix.component(i);
        m.mean += w * c.mean();
        m.covariance += w * (c.covariance() + c.mean() * c.mean().transpose());
    }
    m.covariance -= m.mean * m.mean.transpose();
    m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
    return m;
}

}  // namespace mgp
