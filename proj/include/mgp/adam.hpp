#pragma once

#include <cmath>

#include <Eigen/Core>

namespace mgp {

struct AdamOptions {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam moment estimates for gradient *ascent* on a flat parameter vector.
class Adam {
public:
    Adam(Eigen::Index size, AdamOptions options)
        : options_(options), first_(Eigen::VectorXd::Zero(size)), second_(Eigen::VectorXd::Zero(size))
    {
    }

    /// Updates the moments with `grad` and moves `params` uphill.
    /// `step_scale` multiplies the learning rate for this step only.
    void ascend(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad, double step_scale = 1.0)
    {
        ++steps_;
        first_ = options_.beta1 * first_ + (1.0 - options_.beta1) * grad;
        second_ = options_.beta2 * second_ + (1.0 - options_.beta2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
        const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
        const double lr = options_.learning_rate * step_scale;
        params.array() +=
            lr * (first_.array() / c1) / ((second_.array() / c2).sqrt() + options_.epsilon);
    }

    long steps() const { return steps_; }

private:
    AdamOptions options_;
    Eigen::VectorXd first_;
    Eigen::VectorXd second_;
    long steps_ = 0;
};

}  // namespace mgp
