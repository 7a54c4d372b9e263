#include "mgp/metrics.hpp"

#include <cmath>
#include <string>

#include "mgp/error.hpp"

namespace mgp {

Metrics metrics(const GaussianMixtureDist& pred, const Eigen::VectorXd& y_true)
{
    if (y_true.size() != pred.dim())
        throw InvalidArgument("metrics: " + std::to_string(y_true.size()) + " targets for a " +
                              std::to_string(pred.dim()) + "-dimensional prediction");
    const MarginalSummary s = marginal_summary(pred);
    double nlpd = 0.0;
    for (Eigen::Index j = 0; j < pred.dim(); ++j) {
        const Eigen::Index keep[] = {j};
        nlpd -= mixture_logpdf(marginalize(pred, keep), Eigen::VectorXd::Constant(1, y_true[j]));
    }
    const auto n = static_cast<double>(pred.dim());
    return {std::sqrt((s.mean - y_true).squaredNorm() / n), nlpd / n};
}

MarginalSummary marginal_summary(const GaussianMixtureDist& pred)
{
    const Moments m = moments(pred);
    return {m.mean, m.covariance.diagonal().cwiseMax(0.0).cwiseSqrt()};
}

}  // namespace mgp
