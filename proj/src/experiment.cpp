#include "mgp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mgp/error.hpp"
#include "mgp/rng.hpp"

namespace mgp {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    CounterRng rng = CounterRng(seed).split(stream);
    return rng();
}

GeneratorSpec generator_from_json(const Json& j)
{
    GeneratorSpec g;
    g.tag = j.value("tag", g.tag);
    g.n = j.value("n", g.n);
    g.sigma = j.value("sigma", g.sigma);
    g.lo = j.value("lo", g.lo);
    g.hi = j.value("hi", g.hi);
    if (!is_generator_tag(g.tag)) throw ParseError("unknown generator tag '" + g.tag + "'");
    return g;
}

Json component(std::string name, double weight, Json kernel)
{
    return Json{{"name", std::move(name)}, {"weight", weight}, {"kernel", std::move(kernel)}, {"mean", {{"kind", "zero"}}}};
}

/// Prior belief in a sinusoid with period near pi.
Json periodic_belief()
{
    return Json{{"kind", "periodic"}, {"params", {{"signal_variance", 1.0}, {"lengthscale", 1.0}, {"period", 3.0}}}};
}

template <typename Fn>
auto with_context(const std::string& context, Fn&& fn)
{
    try {
        return fn();
    } catch (const NumericalError& e) {
        throw NumericalError(context + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(context + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(context + ": " + e.what());
    }
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) { return kind == ModelKind::Exact ? "exact" : "svmgp"; }

ModelKind parse_model_kind(std::string_view name)
{
    if (name == "exact") return ModelKind::Exact;
    if (name == "svmgp") return ModelKind::Svmgp;
    throw ParseError("unknown model kind '" + std::string(name) + "' (expected exact or svmgp)");
}

ModelConfig ModelConfig::from_json(const Json& j)
{
    try {
        ModelConfig c;
        c.kind = parse_model_kind(j.value("model_kind", std::string("exact")));
        if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty())
            throw ParseError("model config: 'components' must be a nonempty array");
        c.components = j.at("components");
        if (j.contains("noise_variance") && !j.at("noise_variance").is_null())
            c.noise_variance = j.at("noise_variance").get<double>();
        c.jitter_scale = j.value("jitter_scale", c.jitter_scale);
        if (j.contains("alpha")) c.alpha = vector_from_json(j.at("alpha"));
        c.inducing_per_component = j.value("inducing_per_component", c.inducing_per_component);
        if (j.contains("train")) {
            const Json& t = j.at("train");
            c.exact_train.max_iterations = t.value("max_iterations", c.exact_train.max_iterations);
            c.exact_train.learning_rate = t.value("learning_rate", c.exact_train.learning_rate);
            c.exact_train.tolerance = t.value("tolerance", c.exact_train.tolerance);
            c.exact_train.patience = t.value("patience", c.exact_train.patience);
            c.exact_train.train_noise = t.value("train_noise", c.exact_train.train_noise);
            c.sparse_train.batch_size = t.value("batch_size", c.sparse_train.batch_size);
            c.sparse_train.max_epochs = t.value("max_epochs", c.sparse_train.max_epochs);
            c.sparse_train.learning_rate = t.value("learning_rate", c.sparse_train.learning_rate);
            c.sparse_train.seed = t.value("seed", c.sparse_train.seed);
        }
        return c;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("model config: ") + e.what());
    }
}

Json ModelConfig::to_json() const
{
    Json j{{"model_kind", std::string(model_kind_name(kind))},
           {"components", components},
           {"jitter_scale", jitter_scale},
           {"train",
            {{"max_iterations", exact_train.max_iterations},
             {"learning_rate", exact_train.learning_rate},
             {"tolerance", exact_train.tolerance},
             {"patience", exact_train.patience},
             {"train_noise", exact_train.train_noise},
             {"batch_size", sparse_train.batch_size},
             {"max_epochs", sparse_train.max_epochs},
             {"seed", sparse_train.seed}}}};
    if (noise_variance) j["noise_variance"] = *noise_variance;
    if (kind == ModelKind::Svmgp) {
        if (alpha.size() > 0) j["alpha"] = mgp::to_json(alpha);
        j["inducing_per_component"] = inducing_per_component;
    }
    return j;
}

Eigen::VectorXd FittedModel::prior_weights_or_alpha() const
{
    return kind == ModelKind::Exact ? exact->prior().weights() : sparse->alpha_prior();
}

Eigen::VectorXd FittedModel::posterior_weights() const
{
    return kind == ModelKind::Exact ? exact->weights() : sparse->expected_weights();
}

std::vector<std::string> FittedModel::component_names() const
{
    std::vector<std::string> names;
    if (kind == ModelKind::Exact)
        for (const auto& c : exact->prior().components()) names.push_back(c.name);
    else
        for (const auto& c : sparse->components()) names.push_back(c.name);
    return names;
}

GaussianMixtureDist FittedModel::predict_y(const Eigen::MatrixXd& Xs) const
{
    return kind == ModelKind::Exact ? mgp::predict_y(*exact, Xs) : mgp::predict_y(*sparse, Xs);
}

Json FittedModel::to_json() const
{
    Json j = kind == ModelKind::Exact ? exact_model_to_json(*exact) : mgp::to_json(*sparse);
    j["objective_trace"] = objective_trace;
    return j;
}

FittedModel fit_model(const ModelConfig& config, const Dataset& data)
{
    data.validate();
    const DataScale scale = DataScale::from_data(data.X, data.y);
    FittedModel out;
    out.kind = config.kind;
    if (config.kind == ModelKind::Exact) {
        Json doc{{"components", config.components}, {"jitter_scale", config.jitter_scale}};
        if (config.noise_variance) doc["noise_variance"] = *config.noise_variance;
        const MGPPrior prior = prior_from_json(doc, scale);
        FitResult fitted = fit(prior, data.X, data.y, config.exact_train);
        out.exact = condition_on_data(fitted.prior, data.X, data.y);
        out.objective_trace = std::move(fitted.trace);
        return out;
    }

    std::vector<ComponentPrior> priors;
    for (std::size_t i = 0; i < config.components.size(); ++i) {
        const Json& c = config.components[i];
        if (!c.contains("kernel")) throw ParseError("component " + std::to_string(i + 1) + ": missing 'kernel'");
        priors.push_back({c.value("name", "comp" + std::to_string(i + 1)), mean_from_json(c.value("mean", Json())),
                          kernel_from_json(c.at("kernel"), scale)});
    }
    const auto k = static_cast<Eigen::Index>(priors.size());
    const Eigen::VectorXd alpha = config.alpha.size() > 0 ? config.alpha : Eigen::VectorXd::Ones(k);
    if (alpha.size() != k) throw InvalidArgument("alpha needs one entry per component");
    GramOptions gram;
    gram.jitter_scale = config.jitter_scale;
    SVMGPModel model = init_model(priors, alpha, data.X, data.y, config.inducing_per_component, gram);
    if (config.noise_variance)
        model = SVMGPModel(model.components(), model.alpha_prior(), model.alpha_variational(),
                           *config.noise_variance, gram);
    SVMGPTrainConfig train_config = config.sparse_train;
    // datasets smaller than one batch train full-batch
    train_config.batch_size = std::min(train_config.batch_size, data.size());
    SVMGPTrainResult trained = train(model, data.X, data.y, train_config);
    out.sparse = std::move(trained.model);
    out.objective_trace = std::move(trained.trace);
    return out;
}

FittedModel load_model(const Json& doc, const std::optional<Dataset>& training)
{
    FittedModel out;
    out.kind = parse_model_kind(doc.value("model_kind", std::string()));
    if (out.kind == ModelKind::Exact) {
        if (!training) throw InvalidArgument("exact models need their training data (--data)");
        out.exact = exact_model_from_json(doc, training->X, training->y);
    } else {
        out.sparse = svmgp_model_from_json(doc);
    }
    if (doc.contains("objective_trace")) out.objective_trace = doc.at("objective_trace").get<std::vector<double>>();
    return out;
}

Eigen::MatrixXd GridSpec::points() const
{
    if (count < 2 || !(lo < hi)) throw InvalidArgument("grid needs count >= 2 and lo < hi");
    Eigen::MatrixXd X(count, 1);
    for (Eigen::Index i = 0; i < count; ++i)
        X(i, 0) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return X;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j, const std::filesystem::path& base_dir)
{
    try {
        ExperimentConfig c;
        c.name = j.value("name", c.name);
        if (!j.contains("model")) throw ParseError("experiment config: missing 'model'");
        c.model = ModelConfig::from_json(j.at("model"));
        const Json& data = j.at("data");
        if (data.contains("generator")) {
            c.generator = generator_from_json(data.at("generator"));
        } else if (data.contains("path")) {
            std::filesystem::path p = data.at("path").get<std::string>();
            c.data_path = p.is_relative() ? base_dir / p : p;
        } else {
            throw ParseError("experiment config: 'data' needs 'generator' or 'path'");
        }
        if (j.contains("holdout") && j.at("holdout").contains("generator"))
            c.holdout = generator_from_json(j.at("holdout").at("generator"));
        if (j.contains("grid")) {
            const Json& g = j.at("grid");
            c.grid.lo = g.value("lo", c.grid.lo);
            c.grid.hi = g.value("hi", c.grid.hi);
            c.grid.count = g.value("count", c.grid.count);
        }
        return c;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("experiment config: ") + e.what());
    }
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3"}; }

ExperimentConfig preset(std::string_view name)
{
    ExperimentConfig c;
    c.name = std::string(name);
    const Json linear{{"kind", "linear"}};
    const Json se{{"kind", "ard_se"}};
    if (name == "fig1") {
        c.model.kind = ModelKind::Exact;
        c.model.components = Json::array({component("linear", 0.5, linear), component("se", 0.5, se)});
        c.generator = GeneratorSpec{"sin2x", 40, 0.2, -4.0, 4.0};
        c.holdout = GeneratorSpec{"sin2x", 200, 0.2, -4.0, 4.0};
    } else if (name == "fig2") {
        c.model.kind = ModelKind::Exact;
        c.model.components = Json::array({component("periodic", 0.8, periodic_belief()), component("se", 0.2, se)});
        c.generator = GeneratorSpec{"sin2x", 20, 0.2, 0.0, 4.0};
        c.holdout = GeneratorSpec{"sin2x", 200, 0.2, -4.0, 0.0};
    } else if (name == "fig3") {
        c.model.kind = ModelKind::Svmgp;
        c.model.components = Json::array({component("linear", 1.0 / 3.0, linear),
                                          component("periodic", 1.0 / 3.0, periodic_belief()),
                                          component("se", 1.0 / 3.0, se)});
        c.model.alpha = Eigen::Vector3d(3.0, 3.0, 3.0);
        c.model.inducing_per_component = 3;
        c.generator = GeneratorSpec{"sin2x", 10000, 0.2, -4.0, 4.0};
        c.holdout = GeneratorSpec{"sin2x", 1000, 0.2, -4.0, 4.0};
    } else {
        throw InvalidArgument("unknown preset '" + std::string(name) + "' (expected fig1, fig2 or fig3)");
    }
    c.grid = GridSpec{-4.0, 4.0, 401};
    return c;
}

std::vector<PredictionRow> grid_predictions(const FittedModel& model, const GridSpec& grid,
                                            const std::optional<GeneratorRecord>& truth)
{
    const Eigen::MatrixXd Xs = grid.points();
    const GaussianMixtureDist pred = model.predict_y(Xs);
    const MarginalSummary mix = marginal_summary(pred);
    std::vector<PredictionRow> rows(static_cast<std::size_t>(Xs.rows()));
    for (Eigen::Index j = 0; j < Xs.rows(); ++j) {
        auto& row = rows[static_cast<std::size_t>(j)];
        row.x = Xs(j, 0);
        row.mean = mix.mean[j];
        row.sd = mix.sd[j];
        if (truth) {
            row.truth_mean = generator_truth(truth->tag, row.x);
            row.truth_sd = truth->sigma;
        }
        for (const auto& c : pred.components()) {
            row.comp_mean.push_back(c.mean()[j]);
            row.comp_sd.push_back(std::sqrt(std::max(0.0, c.covariance()(j, j))));
        }
    }
    return rows;
}

std::string predictions_csv(const std::vector<PredictionRow>& rows)
{
    std::string out = "x,mean,sd,truth_mean,truth_sd";
    const std::size_t k = rows.empty() ? 0 : rows.front().comp_mean.size();
    for (std::size_t i = 1; i <= k; ++i)
        out += ",comp" + std::to_string(i) + "_mean,comp" + std::to_string(i) + "_sd";
    out += "\n";
    for (const auto& r : rows) {
        out += format_double(r.x) + "," + format_double(r.mean) + "," + format_double(r.sd) + ",";
        out += (r.truth_mean ? format_double(*r.truth_mean) : "") + ",";
        out += r.truth_sd ? format_double(*r.truth_sd) : "";
        for (std::size_t i = 0; i < k; ++i)
            out += "," + format_double(r.comp_mean[i]) + "," + format_double(r.comp_sd[i]);
        out += "\n";
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::uint64_t seed, bool record_time)
{
    return with_context("experiment '" + config.name + "'", [&] {
        const auto start = std::chrono::steady_clock::now();
        ExperimentResult r;
        if (config.generator) {
            const auto& g = *config.generator;
            r.train = simulate(g.tag, g.n, g.sigma, derive_seed(seed, 1), g.lo, g.hi);
        } else {
            r.train = load_csv(*config.data_path);
        }
        if (config.holdout) {
            const auto& g = *config.holdout;
            r.holdout = simulate(g.tag, g.n, g.sigma, derive_seed(seed, 2), g.lo, g.hi);
        }
        ModelConfig model_config = config.model;
        model_config.sparse_train.seed = derive_seed(seed, 3);
        r.model = fit_model(model_config, r.train);
        if (r.train.dim() == 1) r.rows = grid_predictions(r.model, config.grid, r.train.generator);
        if (r.holdout) r.holdout_metrics = metrics(r.model.predict_y(r.holdout->X), r.holdout->y);

        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.summary = Json{{"preset", config.name},
                         {"seed", seed},
                         {"model_kind", std::string(model_kind_name(config.model.kind))},
                         {"prior_weights_or_alpha", to_json(r.model.prior_weights_or_alpha())},
                         {"posterior_weights", to_json(r.model.posterior_weights())},
                         {"objective_trace", r.model.objective_trace},
                         {"rmse", r.holdout_metrics ? Json(r.holdout_metrics->rmse) : Json()},
                         {"nlpd", r.holdout_metrics ? Json(r.holdout_metrics->nlpd) : Json()},
                         {"wall_time_seconds", record_time ? Json(elapsed) : Json()}};
        return r;
    });
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_file(dir / "predictions.csv", predictions_csv(result.rows));
    write_file(dir / "summary.json", dump_json(result.summary));
}

}  // namespace mgp
