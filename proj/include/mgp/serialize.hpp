#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "mgp/exact_mgp.hpp"
#include "mgp/gaussmix.hpp"
#include "mgp/kernels.hpp"
#include "mgp/svmgp.hpp"

namespace mgp {

using Json = nlohmann::json;

/// Data statistics used to fill hyperparameters a config leaves out.
struct DataScale {
    Eigen::VectorXd x_std;  ///< per input dimension
    Eigen::VectorXd x_range;
    double y_var = 1.0;

    static DataScale from_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
};

/// Heuristic starting point for a kernel family given the data scale.
KernelSpec default_kernel(std::string_view kind, const DataScale& scale);

Json to_json(const KernelSpec& spec);
/// `{"kind": ..., "params": {...}}`, params in natural domain. Params missing
/// from the document are taken from default_kernel(scale); without a scale
/// they are required.
KernelSpec kernel_from_json(const Json& j, const std::optional<DataScale>& scale = std::nullopt);

Json to_json(const MeanSpec& spec);
/// A missing or null document means the zero mean.
MeanSpec mean_from_json(const Json& j);

Json to_json(const GaussianMixtureDist& mix);
GaussianMixtureDist mixture_from_json(const Json& j);

Json to_json(const MGPPrior& prior);
MGPPrior prior_from_json(const Json& j, const std::optional<DataScale>& scale = std::nullopt);

/// FNV-1a over the IEEE-754 bytes of X (row-major) followed by y, as hex.
std::string data_checksum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Saved exact model: prior, training fingerprint, posterior weights.
Json exact_model_to_json(const ExactMGPPosterior& post);
/// Rebuilds the posterior; throws InvalidArgument if (X, y) do not match
/// the stored fingerprint.
ExactMGPPosterior exact_model_from_json(const Json& j, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

Json to_json(const SVMGPModel& model);
SVMGPModel svmgp_model_from_json(const Json& j);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const Json& j);
Eigen::MatrixXd matrix_from_json(const Json& j);

}  // namespace mgp
