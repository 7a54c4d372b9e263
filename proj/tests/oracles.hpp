#pragma once

// Reference implementations written directly from textbook formulas with
// explicit inverses and determinants. They share no code with the library.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace mgp::oracle {

using Kernel = std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>;
using Mean = std::function<double(const Eigen::RowVectorXd&)>;

inline Kernel se(double signal_variance, Eigen::VectorXd lengthscales)
{
    return [=](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
        double s = 0.0;
        for (Eigen::Index d = 0; d < a.size(); ++d) {
            const double u = (a[d] - b[d]) / lengthscales[d];
            s += u * u;
        }
        return signal_variance * std::exp(-0.5 * s);
    };
}

inline Kernel linear(double bias, double weight)
{
    return [=](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) { return bias + weight * a.dot(b); };
}

inline Kernel periodic(double signal_variance, double lengthscale, double period)
{
    return [=](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
        const double s = std::sin(std::numbers::pi * std::abs(a[0] - b[0]) / period);
        return signal_variance * std::exp(-2.0 * s * s / (lengthscale * lengthscale));
    };
}

inline Mean zero_mean()
{
    return [](const Eigen::RowVectorXd&) { return 0.0; };
}

inline Eigen::MatrixXd cov(const Kernel& k, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = k(A.row(i), B.row(j));
    return K;
}

inline Eigen::VectorXd mean(const Mean& m, const Eigen::MatrixXd& X)
{
    Eigen::VectorXd v(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) v[i] = m(X.row(i));
    return v;
}

inline Eigen::MatrixXd inverse(const Eigen::MatrixXd& A) { return A.fullPivLu().inverse(); }

inline double log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& S)
{
    const Eigen::VectorXd r = x - mu;
    const double n = static_cast<double>(x.size());
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + std::log(S.fullPivLu().determinant()) +
                   r.dot(inverse(S) * r));
}

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Standard GP posterior over f at Xs (noise added separately by callers).
inline Moments gp_posterior(const Kernel& k, const Mean& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& Xs, double noise)
{
    const Eigen::MatrixXd Kinv =
        inverse(cov(k, X, X) + noise * Eigen::MatrixXd::Identity(X.rows(), X.rows()));
    const Eigen::MatrixXd Ks = cov(k, X, Xs);
    return {mean(m, Xs) + Ks.transpose() * Kinv * (y - mean(m, X)), cov(k, Xs, Xs) - Ks.transpose() * Kinv * Ks};
}

inline double gp_log_evidence(const Kernel& k, const Mean& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              double noise)
{
    return log_density(y, mean(m, X), cov(k, X, X) + noise * Eigen::MatrixXd::Identity(X.rows(), X.rows()));
}

/// log sum_i w_i N(y | m_i, K_i + I noise), summed in linear space after a
/// common shift.
inline double pooled_log_evidence(const std::vector<Kernel>& ks, const std::vector<Mean>& ms,
                                  const Eigen::VectorXd& w, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  double noise)
{
    std::vector<double> ld;
    double top = -INFINITY;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        ld.push_back(gp_log_evidence(ks[i], ms[i], X, y, noise));
        top = std::max(top, ld.back());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) s += w[static_cast<Eigen::Index>(i)] * std::exp(ld[i] - top);
    return top + std::log(s);
}

inline double gaussian_kl(const Eigen::VectorXd& mq, const Eigen::MatrixXd& Sq, const Eigen::VectorXd& mp,
                          const Eigen::MatrixXd& Sp)
{
    const Eigen::MatrixXd Pinv = inverse(Sp);
    const Eigen::VectorXd d = mp - mq;
    return 0.5 * ((Pinv * Sq).trace() + d.dot(Pinv * d) - static_cast<double>(mq.size()) +
                  std::log(Sp.fullPivLu().determinant()) - std::log(Sq.fullPivLu().determinant()));
}

/// Per-point sparse variational bound of a single GP with inducing values
/// u ~ N(mf, S) at Z, scaled by n_total / batch, minus KL(q(u) || p(u)).
inline double svgp_elbo(const Kernel& k, const Mean& m, const Eigen::MatrixXd& Z, const Eigen::VectorXd& mf,
                        const Eigen::MatrixXd& S, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double noise,
                        double n_total)
{
    const Eigen::MatrixXd Kmm = cov(k, Z, Z);
    const Eigen::MatrixXd Q = inverse(Kmm);
    const Eigen::VectorXd mz = mean(m, Z);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        const Eigen::RowVectorXd x = X.row(j);
        const Eigen::VectorXd kappa = cov(k, Z, X.row(j)).col(0);
        const double mu = m(x) + kappa.dot(Q * (mf - mz));
        const double ktilde = k(x, x) - kappa.dot(Q * kappa);
        const Eigen::MatrixXd Lambda = Q * kappa * kappa.transpose() * Q / noise;
        sum += -0.5 * std::log(2.0 * std::numbers::pi * noise) - (y[j] - mu) * (y[j] - mu) / (2.0 * noise) -
               ktilde / (2.0 * noise) - 0.5 * (S * Lambda).trace();
    }
    return n_total / static_cast<double>(X.rows()) * sum - gaussian_kl(mf, S, mz, Kmm);
}

inline double dirichlet_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& a)
{
    double v = std::lgamma(a.sum());
    for (Eigen::Index i = 0; i < a.size(); ++i) v += (a[i] - 1.0) * std::log(x[i]) - std::lgamma(a[i]);
    return v;
}

struct Estimate {
    double mean;
    double standard_error;
};

/// Monte-Carlo KL(Dir(aq) || Dir(ap)) from gamma-normalized draws.
inline Estimate dirichlet_kl_mc(const Eigen::VectorXd& aq, const Eigen::VectorXd& ap, int samples,
                                std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::vector<std::gamma_distribution<double>> g;
    for (Eigen::Index i = 0; i < aq.size(); ++i) g.emplace_back(aq[i], 1.0);
    double s = 0.0, s2 = 0.0;
    Eigen::VectorXd x(aq.size());
    for (int t = 0; t < samples; ++t) {
        for (Eigen::Index i = 0; i < aq.size(); ++i) x[i] = g[static_cast<std::size_t>(i)](gen);
        x /= x.sum();
        const double v = dirichlet_log_density(x, aq) - dirichlet_log_density(x, ap);
        s += v;
        s2 += v * v;
    }
    const double n = samples;
    const double mean = s / n;
    return {mean, std::sqrt((s2 / n - mean * mean) / n)};
}

/// Monte-Carlo KL(N(mq, Sq) || N(mp, Sp)).
inline Estimate gaussian_kl_mc(const Eigen::VectorXd& mq, const Eigen::MatrixXd& Sq, const Eigen::VectorXd& mp,
                               const Eigen::MatrixXd& Sp, int samples, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    const Eigen::MatrixXd L = Sq.llt().matrixL();
    const Eigen::MatrixXd Qinv = inverse(Sq), Pinv = inverse(Sp);
    const double half_logdet_ratio =
        0.5 * (std::log(Sp.fullPivLu().determinant()) - std::log(Sq.fullPivLu().determinant()));
    double s = 0.0, s2 = 0.0;
    Eigen::VectorXd z(mq.size());
    for (int t = 0; t < samples; ++t) {
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = nd(gen);
        const Eigen::VectorXd x = mq + L * z;
        const Eigen::VectorXd a = x - mq, b = x - mp;
        const double v = half_logdet_ratio - 0.5 * a.dot(Qinv * a) + 0.5 * b.dot(Pinv * b);
        s += v;
        s2 += v * v;
    }
    const double n = samples;
    const double mean = s / n;
    return {mean, std::sqrt((s2 / n - mean * mean) / n)};
}

}  // namespace mgp::oracle
