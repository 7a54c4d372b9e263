#include "mgp/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "mgp/error.hpp"

namespace mgp {

namespace {

double positive_or(double v, double fallback) { return std::isfinite(v) && v > 0.0 ? v : fallback; }

const Json& require(const Json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw ParseError(where + ": missing field '" + key + "'");
    return j.at(key);
}

double number(const Json& j, const std::string& where)
{
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    return j.get<double>();
}

template <typename Fn>
auto wrap_json(const std::string& where, Fn&& fn)
{
    try {
        return fn();
    } catch (const Json::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
}

}  // namespace

DataScale DataScale::from_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    DataScale s;
    s.x_std.resize(X.cols());
    s.x_range.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto col = X.col(j).array();
        s.x_std[j] = std::sqrt((col - col.mean()).square().mean());
        s.x_range[j] = col.maxCoeff() - col.minCoeff();
    }
    s.y_var = y.size() > 0 ? (y.array() - y.mean()).square().mean() : 1.0;
    return s;
}

KernelSpec default_kernel(std::string_view kind, const DataScale& scale)
{
    const double sv = positive_or(scale.y_var, 1.0);
    if (kind == "ard_se") {
        Eigen::VectorXd ls = scale.x_std;
        for (auto& v : ls) v = positive_or(v, 1.0);
        return KernelSpec::ard_se(sv, ls);
    }
    if (kind == "linear") {
        const double x_var = scale.x_std.squaredNorm();
        return KernelSpec::linear(sv, positive_or(sv / x_var, 1.0));
    }
    if (kind == "periodic") {
        const double range = scale.x_range.size() > 0 ? scale.x_range[0] : 1.0;
        return KernelSpec::periodic(sv, 1.0, positive_or(0.5 * range, 1.0));
    }
    throw ParseError("unknown kernel kind '" + std::string(kind) + "'");
}

Json to_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json to_json(const Eigen::MatrixXd& m)
{
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd vector_from_json(const Json& j)
{
    if (!j.is_array()) throw ParseError("expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], "array");
    return v;
}

Eigen::MatrixXd matrix_from_json(const Json& j)
{
    if (!j.is_array()) throw ParseError("expected an array of rows");
    if (j.empty()) return Eigen::MatrixXd(0, 0);
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Eigen::VectorXd row = vector_from_json(j[i]);
        if (row.size() != cols) throw ParseError("ragged matrix rows");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

Json to_json(const KernelSpec& spec)
{
    Json params = Json::object();
    switch (spec.kind()) {
    case KernelKind::ArdSe:
        params["signal_variance"] = spec.natural_param(0);
        params["lengthscales"] = to_json(Eigen::VectorXd(spec.log_params().tail(spec.num_params() - 1).array().exp()));
        break;
    case KernelKind::Linear:
        params["bias_variance"] = spec.natural_param(0);
        params["weight_variance"] = spec.natural_param(1);
        break;
    case KernelKind::Periodic:
        params["signal_variance"] = spec.natural_param(0);
        params["lengthscale"] = spec.natural_param(1);
        params["period"] = spec.natural_param(2);
        break;
    }
    return Json{{"kind", std::string(spec.name())}, {"params", std::move(params)}};
}

KernelSpec kernel_from_json(const Json& j, const std::optional<DataScale>& scale)
{
    const std::string where = "kernel";
    const auto kind = require(j, "kind", where).get<std::string>();
    const Json params = j.contains("params") && !j.at("params").is_null() ? j.at("params") : Json::object();
    if (!params.is_object()) throw ParseError(where + ": 'params' must be an object");

    std::optional<KernelSpec> fallback;
    if (scale) fallback = default_kernel(kind, *scale);
    auto get = [&](const char* key, Eigen::Index idx) -> double {
        if (params.contains(key)) return number(params.at(key), where + "." + key);
        if (!fallback) throw ParseError(where + " (" + kind + "): missing parameter '" + key + "'");
        return fallback->natural_param(idx);
    };

    if (kind == "ard_se") {
        Eigen::VectorXd ls;
        if (params.contains("lengthscales")) {
            ls = vector_from_json(params.at("lengthscales"));
        } else if (params.contains("lengthscale")) {
            ls = Eigen::VectorXd::Constant(1, number(params.at("lengthscale"), where));
        } else {
            if (!fallback) throw ParseError(where + " (ard_se): missing parameter 'lengthscales'");
            ls = fallback->log_params().tail(fallback->num_params() - 1).array().exp();
        }
        return KernelSpec::ard_se(get("signal_variance", 0), ls);
    }
    if (kind == "linear") return KernelSpec::linear(get("bias_variance", 0), get("weight_variance", 1));
    if (kind == "periodic")
        return KernelSpec::periodic(get("signal_variance", 0), get("lengthscale", 1), get("period", 2));
    throw ParseError("unknown kernel kind '" + kind + "'");
}

Json to_json(const MeanSpec& spec)
{
    switch (spec.kind()) {
    case MeanKind::Zero: return Json{{"kind", "zero"}};
    case MeanKind::Constant: return Json{{"kind", "constant"}, {"params", {{"value", spec.params()[0]}}}};
    case MeanKind::Linear: {
        const Eigen::Index d = spec.num_params() - 1;
        return Json{{"kind", "linear"},
                    {"params", {{"weights", to_json(Eigen::VectorXd(spec.params().head(d)))},
                                {"bias", spec.params()[d]}}}};
    }
    }
    return Json();
}

MeanSpec mean_from_json(const Json& j)
{
    if (j.is_null()) return MeanSpec::zero();
    const auto kind = require(j, "kind", "mean").get<std::string>();
    const Json params = j.contains("params") ? j.at("params") : Json::object();
    if (kind == "zero") return MeanSpec::zero();
    if (kind == "constant") return MeanSpec::constant(number(require(params, "value", "mean"), "mean.value"));
    if (kind == "linear")
        return MeanSpec::linear(vector_from_json(require(params, "weights", "mean")),
                                number(require(params, "bias", "mean"), "mean.bias"));
    throw ParseError("unknown mean kind '" + kind + "'");
}

Json to_json(const GaussianMixtureDist& mix)
{
    Json comps = Json::array();
    for (const auto& c : mix.components())
        comps.push_back({{"mean", to_json(c.mean())}, {"covariance", to_json(c.covariance())}});
    return Json{{"weights", to_json(mix.weights())}, {"components", std::move(comps)}};
}

GaussianMixtureDist mixture_from_json(const Json& j)
{
    return wrap_json("mixture", [&] {
        std::vector<GaussianDist> comps;
        for (const auto& c : require(j, "components", "mixture"))
            comps.emplace_back(vector_from_json(require(c, "mean", "mixture component")),
                               matrix_from_json(require(c, "covariance", "mixture component")));
        return GaussianMixtureDist(vector_from_json(require(j, "weights", "mixture")), std::move(comps));
    });
}

Json to_json(const MGPPrior& prior)
{
    Json comps = Json::array();
    for (const auto& c : prior.components())
        comps.push_back({{"name", c.name}, {"weight", c.weight}, {"kernel", to_json(c.kernel)},
                         {"mean", to_json(c.mean)}});
    return Json{{"components", std::move(comps)},
                {"noise_variance", prior.noise_variance()},
                {"jitter_scale", prior.gram_options().jitter_scale}};
}

MGPPrior prior_from_json(const Json& j, const std::optional<DataScale>& scale)
{
    return wrap_json("prior", [&] {
        std::vector<PriorComponent> comps;
        const Json& list = require(j, "components", "prior");
        if (!list.is_array() || list.empty()) throw ParseError("prior: 'components' must be a nonempty array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Json& c = list[i];
            const std::string name = c.value("name", "comp" + std::to_string(i + 1));
            comps.push_back({name, mean_from_json(c.value("mean", Json())),
                             kernel_from_json(require(c, "kernel", "component '" + name + "'"), scale),
                             number(require(c, "weight", "component '" + name + "'"), name + ".weight")});
        }
        double noise = 0.0;
        if (j.contains("noise_variance") && !j.at("noise_variance").is_null()) {
            noise = number(j.at("noise_variance"), "noise_variance");
        } else {
            if (!scale) throw ParseError("prior: missing 'noise_variance'");
            noise = positive_or(0.1 * scale->y_var, 1e-2);
        }
        GramOptions gram;
        gram.jitter_scale = j.value("jitter_scale", gram.jitter_scale);
        return MGPPrior(std::move(comps), noise, gram);
    });
}

std::string data_checksum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) feed(X(i, j));
    for (Eigen::Index i = 0; i < y.size(); ++i) feed(y[i]);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json exact_model_to_json(const ExactMGPPosterior& post)
{
    return Json{{"model_kind", "exact"},
                {"prior", to_json(post.prior())},
                {"training",
                 {{"n", post.inputs().rows()},
                  {"d", post.inputs().cols()},
                  {"checksum", data_checksum(post.inputs(), post.targets())}}},
                {"posterior_weights", to_json(post.weights())}};
}

ExactMGPPosterior exact_model_from_json(const Json& j, const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    return wrap_json("exact model", [&] {
        if (j.value("model_kind", "") != "exact") throw ParseError("not an exact MGP model file");
        const Json& t = require(j, "training", "exact model");
        if (t.at("n").get<Eigen::Index>() != X.rows() || t.at("d").get<Eigen::Index>() != X.cols() ||
            t.at("checksum").get<std::string>() != data_checksum(X, y))
            throw InvalidArgument("training data does not match the fingerprint stored in the model");
        return condition_on_data(prior_from_json(require(j, "prior", "exact model")), X, y);
    });
}

Json to_json(const SVMGPModel& model)
{
    Json comps = Json::array();
    for (const auto& c : model.components())
        comps.push_back({{"name", c.name},
                         {"kernel", to_json(c.kernel)},
                         {"mean", to_json(c.mean)},
                         {"inducing", to_json(c.inducing)},
                         {"q_mean", to_json(c.q_mean)},
                         {"q_chol", to_json(c.q_chol)}});
    return Json{{"model_kind", "svmgp"},
                {"components", std::move(comps)},
                {"alpha", to_json(model.alpha_prior())},
                {"alpha_tilde", to_json(model.alpha_variational())},
                {"posterior_weights", to_json(model.expected_weights())},
                {"noise_variance", model.noise_variance()},
                {"jitter_scale", model.gram_options().jitter_scale}};
}

SVMGPModel svmgp_model_from_json(const Json& j)
{
    return wrap_json("svmgp model", [&] {
        if (j.value("model_kind", "") != "svmgp") throw ParseError("not an SV-MGP model file");
        std::vector<SparseComponent> comps;
        for (const auto& c : require(j, "components", "svmgp model"))
            comps.push_back({c.value("name", "comp" + std::to_string(comps.size() + 1)),
                             mean_from_json(c.value("mean", Json())), kernel_from_json(c.at("kernel")),
                             matrix_from_json(c.at("inducing")), vector_from_json(c.at("q_mean")),
                             matrix_from_json(c.at("q_chol"))});
        GramOptions gram;
        gram.jitter_scale = j.value("jitter_scale", gram.jitter_scale);
        return SVMGPModel(std::move(comps), vector_from_json(j.at("alpha")),
                          vector_from_json(j.at("alpha_tilde")), number(j.at("noise_variance"), "noise_variance"),
                          gram);
    });
}

}  // namespace mgp
