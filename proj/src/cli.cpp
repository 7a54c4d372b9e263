#include "mgp/cli.hpp"

#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mgp/dataset.hpp"
#include "mgp/error.hpp"
#include "mgp/experiment.hpp"
#include "mgp/metrics.hpp"

namespace mgp {

namespace {

Json parse_json_file(const std::string& path)
{
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Writes to the named file, or to `out` when the name is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty()) out << text;
    else write_file(path, text);
}

GridSpec parse_grid(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    if (parts.size() != 3) throw InvalidArgument("--grid expects lo,hi,count");
    try {
        GridSpec g{std::stod(parts[0]), std::stod(parts[1]), std::stol(parts[2])};
        g.points();
        return g;
    } catch (const std::logic_error&) {
        throw InvalidArgument("--grid expects lo,hi,count with lo < hi and count >= 2");
    }
}

std::string input_predictions_csv(const FittedModel& model, const Eigen::MatrixXd& Xs)
{
    const GaussianMixtureDist pred = model.predict_y(Xs);
    const MarginalSummary mix = marginal_summary(pred);
    std::string out;
    for (Eigen::Index j = 0; j < Xs.cols(); ++j) out += "x" + std::to_string(j + 1) + ",";
    out += "mean,sd";
    for (Eigen::Index i = 1; i <= pred.size(); ++i)
        out += ",comp" + std::to_string(i) + "_mean,comp" + std::to_string(i) + "_sd";
    out += "\n";
    for (Eigen::Index r = 0; r < Xs.rows(); ++r) {
        for (Eigen::Index j = 0; j < Xs.cols(); ++j) out += format_double(Xs(r, j)) + ",";
        out += format_double(mix.mean[r]) + "," + format_double(mix.sd[r]);
        for (const auto& c : pred.components())
            out += "," + format_double(c.mean()[r]) + "," +
                   format_double(std::sqrt(std::max(0.0, c.covariance()(r, r))));
        out += "\n";
    }
    return out;
}

struct SimulateArgs {
    std::string tag = "sin2x";
    long n = 100;
    double sigma = 0.2;
    std::uint64_t seed = 0;
    double lo = -4.0;
    double hi = 4.0;
    std::string out;
};

struct FitArgs {
    std::string model;
    std::string config;
    std::string data;
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct PredictArgs {
    std::string model;
    std::string data;
    std::string grid;
    std::string inputs;
    std::string out;
};

struct ExperimentArgs {
    std::string preset;
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    bool record_time = false;
};

struct EvalArgs {
    std::string model;
    std::string data;
    std::string test;
    std::string out;
};

std::optional<Dataset> optional_data(const std::string& path)
{
    if (path.empty()) return std::nullopt;
    return load_csv(path);
}

void run_simulate(const SimulateArgs& a, std::ostream& out)
{
    emit(a.out, to_csv(simulate(a.tag, a.n, a.sigma, a.seed, a.lo, a.hi)), out);
}

void run_fit(const FitArgs& a, std::ostream& out)
{
    Json doc = parse_json_file(a.config);
    if (doc.contains("model") && doc.at("model").is_object()) doc = doc.at("model");
    doc["model_kind"] = a.model;
    ModelConfig config = ModelConfig::from_json(doc);
    if (a.seed) config.sparse_train.seed = *a.seed;
    const FittedModel model = fit_model(config, load_csv(a.data));
    emit(a.out, dump_json(model.to_json()), out);
}

void run_predict(const PredictArgs& a, std::ostream& out)
{
    const FittedModel model = load_model(parse_json_file(a.model), optional_data(a.data));
    if (!a.grid.empty()) {
        emit(a.out, predictions_csv(grid_predictions(model, parse_grid(a.grid), std::nullopt)), out);
    } else {
        emit(a.out, input_predictions_csv(model, load_csv(a.inputs).X), out);
    }
}

void run_experiment_cmd(const ExperimentArgs& a)
{
    ExperimentConfig config;
    if (!a.preset.empty()) {
        config = preset(a.preset);
    } else {
        const std::filesystem::path path(a.config);
        config = ExperimentConfig::from_json(parse_json_file(a.config), path.parent_path());
    }
    write_experiment(run_experiment(config, a.seed, a.record_time), a.out);
}

void run_eval(const EvalArgs& a, std::ostream& out)
{
    const FittedModel model = load_model(parse_json_file(a.model), optional_data(a.data));
    const Dataset test = load_csv(a.test);
    const Metrics m = metrics(model.predict_y(test.X), test.y);
    emit(a.out, dump_json(Json{{"n", test.size()}, {"rmse", m.rmse}, {"nlpd", m.nlpd}}), out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Mixtures of Gaussian processes: simulate, fit, predict and evaluate", "mgp"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Draw a synthetic regression dataset as CSV");
    s->add_option("--tag", sim.tag, "Generator: sin2x, quadratic or linear")->capture_default_str();
    s->add_option("--n", sim.n, "Number of points")->capture_default_str();
    s->add_option("--sigma", sim.sigma, "Noise standard deviation")->capture_default_str();
    s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    s->add_option("--lo", sim.lo, "Lower end of the input range")->capture_default_str();
    s->add_option("--hi", sim.hi, "Upper end of the input range")->capture_default_str();
    s->add_option("--out", sim.out, "Output CSV (default: standard output)");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Train a model and write it as JSON");
    f->add_option("--model", fit.model, "exact or svmgp")->required()->check(CLI::IsMember({"exact", "svmgp"}));
    f->add_option("--config", fit.config, "Model config JSON")->required();
    f->add_option("--data", fit.data, "Training CSV")->required();
    f->add_option("--seed", fit.seed, "Minibatch seed (svmgp)");
    f->add_option("--out", fit.out, "Output model JSON (default: standard output)");

    PredictArgs pr;
    auto* p = app.add_subcommand("predict", "Predictive mean, sd and components of a saved model");
    p->add_option("--model", pr.model, "Model JSON")->required();
    p->add_option("--data", pr.data, "Training CSV (exact models)");
    auto* grid = p->add_option("--grid", pr.grid, "Uniform 1-D grid lo,hi,count");
    auto* inputs = p->add_option("--inputs", pr.inputs, "CSV of inputs in dataset format (y is ignored)");
    grid->excludes(inputs);
    p->add_option("--out", pr.out, "Output CSV (default: standard output)");

    ExperimentArgs ex;
    auto* e = app.add_subcommand("experiment", "Run a preset or configured experiment");
    auto* pre = e->add_option("--preset", ex.preset, "fig1, fig2 or fig3")->check(CLI::IsMember(preset_names()));
    auto* cfg = e->add_option("--config", ex.config, "Experiment config JSON");
    pre->excludes(cfg);
    e->add_option("--seed", ex.seed, "Random seed")->capture_default_str();
    e->add_option("--out", ex.out, "Output directory")->required();
    e->add_flag("--record-time", ex.record_time, "Store wall time in summary.json");

    EvalArgs ev;
    auto* v = app.add_subcommand("eval", "Score a saved model on a test CSV");
    v->add_option("--model", ev.model, "Model JSON")->required();
    v->add_option("--data", ev.data, "Training CSV (exact models)");
    v->add_option("--test", ev.test, "Test CSV")->required();
    v->add_option("--out", ev.out, "Output JSON (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex_) {
        const int code = app.exit(ex_, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (s->parsed()) run_simulate(sim, out);
        else if (f->parsed()) run_fit(fit, out);
        else if (p->parsed()) {
            if (pr.grid.empty() == pr.inputs.empty()) {
                err << "predict: give exactly one of --grid or --inputs\n";
                return 1;
            }
            run_predict(pr, out);
        } else if (e->parsed()) {
            if (ex.preset.empty() == ex.config.empty()) {
                err << "experiment: give exactly one of --preset or --config\n";
                return 1;
            }
            run_experiment_cmd(ex);
        } else if (v->parsed()) run_eval(ev, out);
    } catch (const NumericalError& x) {
        err << "numerical failure: " << x.what() << "\n";
        return 2;
    } catch (const std::exception& x) {
        err << "error: " << x.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace mgp
