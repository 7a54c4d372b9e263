#include <cmath>
#include <numbers>
#include <numeric>

#include <doctest.h>

#include "mgp/error.hpp"
#include "mgp/exact_mgp.hpp"
#include "mgp/metrics.hpp"
#include "instances.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mgp;
using namespace mgp::test;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

/// Joint mixture over (f(X) + noise, f(Xs)) with one block per component.
GaussianMixtureDist joint_mixture(const MGPPrior& prior, const std::vector<oracle::Kernel>& refs,
                                  const MatrixXd& X, const MatrixXd& Xs)
{
    const Index n = X.rows(), m = Xs.rows();
    MatrixXd all(n + m, X.cols());
    all << X, Xs;
    std::vector<GaussianDist> comps;
    for (Index i = 0; i < prior.size(); ++i) {
        MatrixXd C = oracle::cov(refs[static_cast<std::size_t>(i)], all, all);
        C.topLeftCorner(n, n) += prior.noise_variance() * MatrixXd::Identity(n, n);
        comps.emplace_back(oracle::mean(as_oracle(prior.component(i).mean), all), C);
    }
    return GaussianMixtureDist(prior.weights(), comps);
}

GramOptions no_jitter() { return {0.0}; }

}  // namespace

TEST_CASE("prior validation")
{
    const auto se = KernelSpec::ard_se(1.0, VectorXd::Ones(1));
    CHECK_THROWS_AS(MGPPrior({{"a", MeanSpec::zero(), se, 0.5}, {"b", MeanSpec::zero(), se, 0.6}}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(MGPPrior({{"a", MeanSpec::zero(), se, 1.0}}, -0.1), InvalidArgument);
    CHECK_THROWS_AS(MGPPrior({{"a", MeanSpec::zero(), se, 0.0}, {"b", MeanSpec::zero(), se, 1.0}}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(MGPPrior({}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(MGPPrior({{"a", MeanSpec::zero(), KernelSpec::ard_se(1.0, VectorXd::Ones(2)), 0.5},
                              {"b", MeanSpec::zero(), se, 0.5}}, 0.1), InvalidArgument);

    const MGPPrior ok({{"a", MeanSpec::zero(), se, 1.0}}, 0.1);
    MatrixXd X(2, 1);
    X << 0.0, 1.0;
    CHECK_THROWS_AS(log_marginal_likelihood(ok, X, VectorXd::Zero(3)), InvalidArgument);
    CHECK_THROWS_AS(log_marginal_likelihood(ok, X, Eigen::Vector2d(0.0, NAN)), InvalidArgument);
    CHECK_THROWS_AS(log_marginal_likelihood(ok, MatrixXd::Zero(2, 2), VectorXd::Zero(2)), InvalidArgument);
}

TEST_CASE("single-component evidence equals the standard GP evidence")
{
    CounterRng rng(41);
    for (int t = 0; t < 15; ++t) {
        const auto k = random_kernel(rng, t);
        const MeanSpec m = random_mean(rng, t);
        const MatrixXd X = test::uniform_matrix(rng, 8, 1, -2.0, 2.0);
        const VectorXd y = test::normal_vector(rng, 8);
        const double noise = rng.uniform(0.05, 0.5);
        const MGPPrior prior({{"c", m, k.spec, 1.0}}, noise, no_jitter());
        CHECK(std::abs(log_marginal_likelihood(prior, X, y) - oracle::gp_log_evidence(k.ref, as_oracle(m), X, y, noise)) <
              1e-10);
    }
}

TEST_CASE("one observation by hand")
{
    const double v1 = 1.5, v2 = 0.4, noise = 0.2, y = 0.9;
    const MGPPrior prior({{"a", MeanSpec::zero(), KernelSpec::ard_se(v1, VectorXd::Ones(1)), 0.3},
                          {"b", MeanSpec::zero(), KernelSpec::ard_se(v2, VectorXd::Ones(1)), 0.7}},
                         noise, no_jitter());
    auto density = [&](double v) { return std::exp(-0.5 * y * y / (v + noise)) / std::sqrt(2 * std::numbers::pi * (v + noise)); };
    const double hand = std::log(0.3 * density(v1) + 0.7 * density(v2));
    CHECK(log_marginal_likelihood(prior, MatrixXd::Constant(1, 1, 0.2), VectorXd::Constant(1, y)) ==
          doctest::Approx(hand).epsilon(1e-13));
}

TEST_CASE("evidence matches the mixture density of the pooled marginal")
{
    CounterRng rng(42);
    for (int t = 0; t < 10; ++t) {
        const auto a = random_kernel(rng, t), b = random_kernel(rng, t + 1);
        const MGPPrior prior({{"a", random_mean(rng, t), a.spec, 0.4}, {"b", random_mean(rng, t + 2), b.spec, 0.6}},
                             rng.uniform(0.05, 0.3), no_jitter());
        const MatrixXd X = test::uniform_matrix(rng, 6, 1, -2.0, 2.0);
        const VectorXd y = test::normal_vector(rng, 6);
        const auto joint = joint_mixture(prior, {a.ref, b.ref}, X, MatrixXd(0, 1));
        CHECK(std::abs(log_marginal_likelihood(prior, X, y) - mixture_logpdf(joint, y)) < 1e-12);
    }
}

TEST_CASE("single-component gradient equals the classical evidence gradient")
{
    CounterRng rng(43);
    for (int t = 0; t < 9; ++t) {
        const auto k = random_kernel(rng, t);
        const Index n = test::random_index(rng, 3, 10);
        const MatrixXd X = test::uniform_matrix(rng, n, 1, -2.0, 2.0);
        const VectorXd y = test::normal_vector(rng, n);
        const double noise = rng.uniform(0.05, 0.5);
        const MGPPrior prior({{"c", MeanSpec::zero(), k.spec, 1.0}}, noise, no_jitter());
        const VectorXd g = log_marginal_likelihood_grad(prior, X, y);

        const MatrixXd Kinv = oracle::inverse(oracle::cov(k.ref, X, X) + noise * MatrixXd::Identity(n, n));
        const VectorXd alpha = Kinv * y;
        const MatrixXd W = alpha * alpha.transpose() - Kinv;
        const VectorXd lp = k.spec.log_params();
        for (Index p = 0; p < lp.size(); ++p) {
            const double h = 1e-6;
            VectorXd up = lp, down = lp;
            up[p] += h;
            down[p] -= h;
            const MatrixXd dK = (cross_gram(k.spec.with_log_params(up), X, X) -
                                 cross_gram(k.spec.with_log_params(down), X, X)) / (2 * h);
            CHECK(std::abs(g[p] - 0.5 * (W * dK).trace()) < 1e-6 * std::max(1.0, std::abs(g[p])));
        }
        CHECK(std::abs(g[g.size() - 1] - 0.5 * noise * W.trace()) < 1e-10);
    }
}

TEST_CASE("gradient matches central differences on three-component priors")
{
    CounterRng rng(44);
    for (int t = 0; t < 20; ++t) {
        std::vector<PriorComponent> comps;
        const VectorXd w = test::random_weights(rng, 3);
        for (int i = 0; i < 3; ++i)
            comps.push_back({"c" + std::to_string(i), random_mean(rng, t + i), random_kernel(rng, t + i).spec, w[i]});
        const MGPPrior prior(comps, rng.uniform(0.05, 0.5));
        const Index n = test::random_index(rng, 4, 15);
        const MatrixXd X = test::uniform_matrix(rng, n, 1, -2.0, 2.0);
        const VectorXd y = test::normal_vector(rng, n);
        const VectorXd g = log_marginal_likelihood_grad(prior, X, y);
        const VectorXd fd = test::central_difference(
            [&](const VectorXd& p) { return log_marginal_likelihood(prior.with_params(p), X, y); }, prior.params());
        CHECK(test::max_relative_error(g, fd, 1e-3) < 1e-4);
    }
}

TEST_CASE("a component with zero responsibility has zero gradient")
{
    MatrixXd X(6, 1);
    X << -2, -1, 0, 1, 2, 3;
    VectorXd y(6);
    y << 40, -40, 40, -40, 40, -40;
    const MGPPrior prior({{"rough", MeanSpec::zero(), KernelSpec::ard_se(1000.0, VectorXd::Constant(1, 0.1)), 0.5},
                          {"flat", MeanSpec::zero(), KernelSpec::linear(1e-4, 1e-4), 0.5}},
                         0.01);
    const EvidenceEvaluation ev = evaluate_evidence(prior, X, y);
    CHECK(ev.responsibilities[1] == 0.0);
    CHECK(ev.grad.segment(2, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit")
{
    CounterRng rng(45);
    const MatrixXd X = test::uniform_matrix(rng, 50, 1, -3.0, 3.0);
    const auto truth = paired_se(1.0, 0.8);
    const double noise = 0.05;
    const MatrixXd C = oracle::cov(truth.ref, X, X) + noise * MatrixXd::Identity(50, 50);
    const VectorXd y = C.llt().matrixL() * test::normal_vector(rng, 50);

    const MGPPrior start({{"se", MeanSpec::zero(), KernelSpec::ard_se(0.5, VectorXd::Constant(1, 1.5)), 1.0}}, 0.2);

    TrainConfig none;
    none.max_iterations = 0;
    const FitResult same = fit(start, X, y, none);
    CHECK(same.prior.params() == start.params());
    CHECK(same.iterations == 0);

    const FitResult fitted = fit(start, X, y);
    const MGPPrior generating({{"se", MeanSpec::zero(), truth.spec, 1.0}}, noise);
    CHECK(log_marginal_likelihood(fitted.prior, X, y) >= log_marginal_likelihood(generating, X, y) - 1e-6);
    CHECK(fitted.trace.back() >= fitted.trace.front());
    for (std::size_t i = 1; i < fitted.trace.size(); ++i) CHECK(fitted.trace[i] >= fitted.trace[i - 1]);
    CHECK(fitted.trace.back() == doctest::Approx(log_marginal_likelihood(fitted.prior, X, y)).epsilon(1e-12));

    TrainConfig frozen;
    frozen.train_noise = false;
    frozen.max_iterations = 50;
    CHECK(fit(start, X, y, frozen).prior.noise_variance() == start.noise_variance());
}

TEST_CASE("posterior weights")
{
    CounterRng rng(46);
    const MatrixXd X = test::uniform_matrix(rng, 3, 1, -1.0, 1.0);
    const VectorXd y = test::normal_vector(rng, 3);
    const auto se = KernelSpec::ard_se(1.0, VectorXd::Ones(1));

    CHECK(condition_on_data(MGPPrior({{"a", MeanSpec::zero(), se, 1.0}}, 0.1), X, y).weights()[0] == 1.0);

    const auto twins = condition_on_data(MGPPrior({{"a", MeanSpec::zero(), se, 0.25}, {"b", MeanSpec::zero(), se, 0.75}}, 0.1), X, y);
    CHECK(twins.weights()[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(twins.weights()[1] == doctest::Approx(0.75).epsilon(1e-14));

    const auto a = paired_se(1.3, 0.7), b = paired_linear(0.4, 0.9);
    const double noise = 0.15;
    const MGPPrior prior({{"a", MeanSpec::zero(), a.spec, 0.35}, {"b", MeanSpec::zero(), b.spec, 0.65}}, noise, no_jitter());
    const auto post = condition_on_data(prior, X, y);
    const double la = mvn_logpdf(GaussianDist(VectorXd::Zero(3), oracle::cov(a.ref, X, X) + noise * MatrixXd::Identity(3, 3)), y);
    const double lb = mvn_logpdf(GaussianDist(VectorXd::Zero(3), oracle::cov(b.ref, X, X) + noise * MatrixXd::Identity(3, 3)), y);
    const double wa = 0.35 * std::exp(la), wb = 0.65 * std::exp(lb);
    CHECK(std::abs(post.weights()[0] - wa / (wa + wb)) < 1e-10);
    CHECK(std::abs(post.weights()[1] - wb / (wa + wb)) < 1e-10);
}

TEST_CASE("single-component prediction equals the standard GP posterior for every kernel")
{
    CounterRng rng(47);
    for (int family = 0; family < 3; ++family) {
        for (Index n : {1, 5, 30, 100}) {
            const auto k = random_kernel(rng, family);
            const MeanSpec m = random_mean(rng, family + static_cast<int>(n));
            const double noise = rng.uniform(0.05, 0.5);
            const MatrixXd X = test::uniform_matrix(rng, n, 1, -3.0, 3.0);
            const VectorXd y = test::normal_vector(rng, n);
            const MatrixXd Xs = test::uniform_matrix(rng, 7, 1, -4.0, 4.0);
            const auto post = condition_on_data(MGPPrior({{"c", m, k.spec, 1.0}}, noise, no_jitter()), X, y);
            const oracle::Moments ref = oracle::gp_posterior(k.ref, as_oracle(m), X, y, Xs, noise);
            const auto f = predict_f(post, Xs);
            CHECK(test::max_abs_diff(f.component(0).mean(), ref.mean) < 1e-10);
            CHECK(test::max_abs_diff(f.component(0).covariance(), ref.cov) < 1e-10);
            const auto yp = predict_y(post, Xs);
            CHECK(test::max_abs_diff(yp.component(0).covariance(), ref.cov + noise * MatrixXd::Identity(7, 7)) < 1e-10);
        }
    }
}

TEST_CASE("near-noiseless prediction interpolates the training targets")
{
    CounterRng rng(48);
    const MatrixXd X = test::uniform_matrix(rng, 6, 1, -3.0, 3.0);
    const VectorXd y = test::normal_vector(rng, 6);
    const auto post = condition_on_data(
        MGPPrior({{"se", MeanSpec::zero(), KernelSpec::ard_se(1.0, VectorXd::Constant(1, 0.5)), 1.0}}, 1e-10), X, y);
    const auto f = predict_f(post, X);
    CHECK(test::max_abs_diff(f.component(0).mean(), y) < 1e-3);
}

TEST_CASE("prediction equals conditioning the explicit joint mixture")
{
    CounterRng rng(49);
    for (int t = 0; t < 15; ++t) {
        const Index k = test::random_index(rng, 1, 3);
        const Index n = test::random_index(rng, 1, 8), m = test::random_index(rng, 1, 4);
        std::vector<PriorComponent> comps;
        std::vector<oracle::Kernel> refs;
        const VectorXd w = test::random_weights(rng, k);
        for (Index i = 0; i < k; ++i) {
            const auto pk = random_kernel(rng, t + static_cast<int>(i));
            comps.push_back({"c", random_mean(rng, t + static_cast<int>(i)), pk.spec, w[i]});
            refs.push_back(pk.ref);
        }
        const MGPPrior prior(comps, rng.uniform(0.05, 0.5), no_jitter());
        const MatrixXd X = test::uniform_matrix(rng, n, 1, -2.0, 2.0);
        const MatrixXd Xs = test::uniform_matrix(rng, m, 1, -3.0, 3.0);
        const VectorXd y = test::normal_vector(rng, n);

        std::vector<Index> observed(static_cast<std::size_t>(n));
        std::iota(observed.begin(), observed.end(), Index{0});
        const auto expected = condition(joint_mixture(prior, refs, X, Xs), observed, y);
        const auto got = predict_f(condition_on_data(prior, X, y), Xs);
        CHECK(test::max_abs_diff(got.weights(), expected.weights()) < 1e-8);
        for (Index i = 0; i < k; ++i) {
            CHECK(test::max_abs_diff(got.component(i).mean(), expected.component(i).mean()) < 1e-8);
            CHECK(test::max_abs_diff(got.component(i).covariance(), expected.component(i).covariance()) < 1e-8);
        }
    }
}

TEST_CASE("observation predictive adds the noise and scores held-out points")
{
    CounterRng rng(50);
    const double noise = 0.07;
    const MGPPrior prior({{"se", MeanSpec::zero(), KernelSpec::ard_se(1.0, VectorXd::Ones(1)), 0.6},
                          {"lin", MeanSpec::constant(0.3), KernelSpec::linear(0.5, 0.5), 0.4}},
                         noise);
    const MatrixXd X = test::uniform_matrix(rng, 10, 1, -2.0, 2.0);
    const VectorXd y = test::normal_vector(rng, 10);
    const auto post = condition_on_data(prior, X, y);
    const MatrixXd Xs = test::uniform_matrix(rng, 5, 1, -3.0, 3.0);
    const auto f = predict_f(post, Xs), yp = predict_y(post, Xs);
    for (Index i = 0; i < 2; ++i) {
        CHECK(test::max_abs_diff(yp.component(i).covariance(), f.component(i).covariance() + noise * MatrixXd::Identity(5, 5)) < 1e-15);
        CHECK(yp.component(i).covariance().diagonal().minCoeff() >= noise);
    }

    const VectorXd yt = test::normal_vector(rng, 5);
    double total = 0.0;
    for (Index j = 0; j < 5; ++j) {
        double dens = 0.0;
        for (Index i = 0; i < 2; ++i) {
            const double mu = yp.component(i).mean()[j], v = yp.component(i).covariance()(j, j);
            dens += yp.weights()[i] * std::exp(-0.5 * (yt[j] - mu) * (yt[j] - mu) / v) / std::sqrt(2 * std::numbers::pi * v);
        }
        total -= std::log(dens);
    }
    CHECK(metrics(yp, yt).nlpd == doctest::Approx(total / 5.0).epsilon(1e-12));
}

TEST_CASE("posterior mass concentrates on the linear component for linear data")
{
    CounterRng rng(51);
    const Index n = 200;
    const MatrixXd X = test::uniform_matrix(rng, n, 1, -3.0, 3.0);
    const VectorXd y = 0.8 * X.col(0) + 0.05 * test::normal_vector(rng, n);
    const MGPPrior prior({{"linear", MeanSpec::zero(), KernelSpec::linear(0.5, 0.5), 0.5},
                          {"se", MeanSpec::zero(), KernelSpec::ard_se(0.5, VectorXd::Constant(1, 1.7)), 0.5}},
                         0.05);
    const FitResult fitted = fit(prior, X, y);
    CHECK(condition_on_data(fitted.prior, X, y).weights()[0] > 0.5);
}

TEST_CASE("reordering components permutes weights and keeps predictive densities")
{
    CounterRng rng(52);
    const PriorComponent a{"a", MeanSpec::zero(), KernelSpec::ard_se(1.0, VectorXd::Ones(1)), 0.2};
    const PriorComponent b{"b", MeanSpec::constant(0.5), KernelSpec::linear(0.3, 0.7), 0.5};
    const PriorComponent c{"c", MeanSpec::zero(), KernelSpec::periodic(1.0, 1.0, 2.0), 0.3};
    const MatrixXd X = test::uniform_matrix(rng, 12, 1, -2.0, 2.0);
    const VectorXd y = test::normal_vector(rng, 12);
    const auto p1 = condition_on_data(MGPPrior({a, b, c}, 0.1), X, y);
    const auto p2 = condition_on_data(MGPPrior({c, a, b}, 0.1), X, y);
    CHECK(std::abs(p1.weights()[0] - p2.weights()[1]) < 1e-14);
    CHECK(std::abs(p1.weights()[1] - p2.weights()[2]) < 1e-14);
    CHECK(std::abs(p1.weights()[2] - p2.weights()[0]) < 1e-14);
    const MatrixXd Xs = test::uniform_matrix(rng, 4, 1, -3.0, 3.0);
    const VectorXd yt = test::normal_vector(rng, 4);
    CHECK(std::abs(mixture_logpdf(predict_y(p1, Xs), yt) - mixture_logpdf(predict_y(p2, Xs), yt)) < 1e-10);
}
