#pragma once

#include <Eigen/Core>

#include "mgp/gaussmix.hpp"

namespace mgp {

struct Metrics {
    double rmse;
    /// Mean negative log density of the per-point one-dimensional marginals.
    double nlpd;
};

Metrics metrics(const GaussianMixtureDist& pred, const Eigen::VectorXd& y_true);

/// Per-point marginal mean and standard deviation of a mixture, from the
/// exact mixture moments.
struct MarginalSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
};

MarginalSummary marginal_summary(const GaussianMixtureDist& pred);

}  // namespace mgp
