#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mgp/dataset.hpp"
#include "mgp/exact_mgp.hpp"
#include "mgp/metrics.hpp"
#include "mgp/serialize.hpp"
#include "mgp/svmgp.hpp"

namespace mgp {

enum class ModelKind { Exact, Svmgp };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Declarative model description. Component kernels are kept as documents
/// because omitted hyperparameters are filled from the training data.
struct ModelConfig {
    ModelKind kind = ModelKind::Exact;
    Json components = Json::array();
    std::optional<double> noise_variance;
    double jitter_scale = 1e-6;
    Eigen::VectorXd alpha;  ///< Dirichlet prior (svmgp); ones when empty
    Eigen::Index inducing_per_component = 3;
    TrainConfig exact_train;
    SVMGPTrainConfig sparse_train;

    static ModelConfig from_json(const Json& j);
    Json to_json() const;
};

/// A trained model of either kind behind one prediction interface.
struct FittedModel {
    ModelKind kind = ModelKind::Exact;
    std::optional<ExactMGPPosterior> exact;
    std::optional<SVMGPModel> sparse;
    std::vector<double> objective_trace;

    Eigen::VectorXd prior_weights_or_alpha() const;
    Eigen::VectorXd posterior_weights() const;
    std::vector<std::string> component_names() const;
    GaussianMixtureDist predict_y(const Eigen::MatrixXd& Xs) const;
    /// Model file document.
    Json to_json() const;
};

FittedModel fit_model(const ModelConfig& config, const Dataset& data);

/// Restores a saved model. Exact models need their training data back.
FittedModel load_model(const Json& doc, const std::optional<Dataset>& training);

struct GeneratorSpec {
    std::string tag = "sin2x";
    Eigen::Index n = 100;
    double sigma = 0.2;
    double lo = -4.0;
    double hi = 4.0;
};

struct GridSpec {
    double lo = -4.0;
    double hi = 4.0;
    Eigen::Index count = 401;

    Eigen::MatrixXd points() const;
};

struct ExperimentConfig {
    std::string name = "custom";
    ModelConfig model;
    std::optional<GeneratorSpec> generator;
    std::optional<std::filesystem::path> data_path;
    std::optional<GeneratorSpec> holdout;
    GridSpec grid;

    /// Relative data paths resolve against base_dir.
    static ExperimentConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
};

/// Built-in experiment setups: fig1, fig2, fig3.
ExperimentConfig preset(std::string_view name);
std::vector<std::string> preset_names();

struct PredictionRow {
    double x = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    std::optional<double> truth_mean;
    std::optional<double> truth_sd;
    std::vector<double> comp_mean;
    std::vector<double> comp_sd;
};

struct ExperimentResult {
    Dataset train;
    std::optional<Dataset> holdout;
    FittedModel model;
    std::vector<PredictionRow> rows;
    std::optional<Metrics> holdout_metrics;
    Json summary;
};

/// Simulates or loads data, fits, predicts on the grid and scores the
/// holdout. A pure function of (config, seed) unless record_time is set.
ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed, bool record_time = false);

/// Grid predictions of a fitted model (1-D inputs only).
std::vector<PredictionRow> grid_predictions(const FittedModel& model, const GridSpec& grid,
                                            const std::optional<GeneratorRecord>& truth);

std::string predictions_csv(const std::vector<PredictionRow>& rows);

/// Writes predictions.csv and summary.json into dir.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

/// JSON text with a trailing newline.
std::string dump_json(const Json& j);

}  // namespace mgp
