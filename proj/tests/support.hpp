#pragma once

// Random instance generators and numeric helpers shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "mgp/rng.hpp"

namespace mgp::test {

inline Eigen::MatrixXd uniform_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi)
{
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline Eigen::VectorXd normal_vector(CounterRng& rng, Eigen::Index n, double scale = 1.0)
{
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

/// Well-conditioned SPD matrix: A A^T / n + shift I.
inline Eigen::MatrixXd random_spd(CounterRng& rng, Eigen::Index n, double shift = 0.5)
{
    const Eigen::MatrixXd a = uniform_matrix(rng, n, n, -1.0, 1.0);
    return a * a.transpose() / static_cast<double>(n) + shift * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::Index random_index(CounterRng& rng, Eigen::Index lo, Eigen::Index hi)
{
    return lo + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Random point on the probability simplex with every entry >= floor.
inline Eigen::VectorXd random_weights(CounterRng& rng, Eigen::Index k, double floor = 0.05)
{
    Eigen::VectorXd w(k);
    for (Eigen::Index i = 0; i < k; ++i) w[i] = floor + rng.uniform();
    return w / w.sum();
}

inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h = 1e-5)
{
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd up = x, down = x;
        up[i] += h;
        down[i] -= h;
        g[i] = (f(up) - f(down)) / (2.0 * h);
    }
    return g;
}

/// Largest |a - b| / max(|a|, |b|, floor) over entries.
// Fourth-order stencil for directions where the objective is steep enough
// that second-order truncation error exceeds the comparison tolerance.
inline Eigen::VectorXd five_point_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                             const Eigen::VectorXd& x, double h = 1e-5)
{
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        auto at = [&](double d) {
            Eigen::VectorXd p = x;
            p[i] += d;
            return f(p);
        };
        g[i] = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
    }
    return g;
}

inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-2)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), floor}));
    return worst;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("mgp_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace mgp::test
