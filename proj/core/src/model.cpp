#include "copulafit/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "copulafit/util.hpp"

namespace copulafit {

MarginalEval marginal_forward(const MlpParams& params, double x) {
    if (params.input_width() != 1) throw std::invalid_argument("marginal_forward: network must have one input");
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("marginal_forward: x outside [0,1]");
    const Jet in = jet_var(0, x, 1);
    const Jet out = forward_eval(params, std::span<const Jet>(&in, 1));
    return {out.c[0], out.c[1]};
}

CopulaEval copula_forward(const MlpParams& params, std::span<const double> u) {
    const int d = params.input_width();
    if (static_cast<int>(u.size()) != d) throw std::invalid_argument("copula_forward: dimension mismatch");
    if (d > kMaxVars) throw std::invalid_argument("copula_forward: dimension exceeds jet capacity");
    std::vector<Jet> in(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        if (!(u[static_cast<std::size_t>(i)] >= 0.0 && u[static_cast<std::size_t>(i)] <= 1.0)) {
            throw std::invalid_argument("copula_forward: u outside the unit cube");
        }
        in[static_cast<std::size_t>(i)] = jet_var(i, u[static_cast<std::size_t>(i)], d);
    }
    const Jet out = forward_eval(params, in);
    return {out.value(), out.full(), out};
}

void FittedModel::validate() const {
    if (dim < 1 || dim > kMaxVars) throw std::invalid_argument("model: dimension out of range");
    if (static_cast<int>(marginals.size()) != dim) throw std::invalid_argument("model: one marginal per dimension required");
    if (copula.input_width() != dim) throw std::invalid_argument("model: copula input width != dimension");
    for (const auto& m : marginals) {
        if (m.input_width() != 1) throw std::invalid_argument("model: marginal input width must be 1");
    }
    if (norm_min.size() != static_cast<std::size_t>(dim) || norm_max.size() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("model: normalization bounds size mismatch");
    }
    for (int i = 0; i < dim; ++i) {
        if (!(norm_min[static_cast<std::size_t>(i)] < norm_max[static_cast<std::size_t>(i)])) {
            throw std::invalid_argument("model: normalization bounds must satisfy min < max");
        }
    }
}

double FittedModel::normalize(int axis, double raw) const {
    const auto a = static_cast<std::size_t>(axis);
    return (raw - norm_min[a]) / (norm_max[a] - norm_min[a]);
}

double FittedModel::denormalize(int axis, double t) const {
    const auto a = static_cast<std::size_t>(axis);
    return norm_min[a] + t * (norm_max[a] - norm_min[a]);
}

double joint_pdf(const FittedModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.dim) throw std::invalid_argument("joint_pdf: dimension mismatch");
    std::vector<double> u(static_cast<std::size_t>(model.dim));
    double dens_prod = 1.0;
    for (int i = 0; i < model.dim; ++i) {
        const MarginalEval m = marginal_forward(model.marginals[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]);
        u[static_cast<std::size_t>(i)] = m.cdf;
        dens_prod *= m.density;
    }
    const CopulaEval c = copula_forward(model.copula, u);
    return c.density * dens_prod;
}

double joint_cdf(const FittedModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.dim) throw std::invalid_argument("joint_cdf: dimension mismatch");
    std::vector<double> u(static_cast<std::size_t>(model.dim));
    for (int i = 0; i < model.dim; ++i) {
        u[static_cast<std::size_t>(i)] =
            marginal_forward(model.marginals[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]).cdf;
    }
    return copula_forward(model.copula, u).cdf;
}

namespace {

nlohmann::json mlp_to_json(const MlpParams& p) {
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (int l = 0; l < p.layer_count(); ++l) {
        const int in = p.layer_sizes[static_cast<std::size_t>(l)];
        const int out = p.layer_sizes[static_cast<std::size_t>(l) + 1];
        weights.push_back(std::vector<double>(p.weights(l), p.weights(l) + in * out));
        biases.push_back(std::vector<double>(p.biases(l), p.biases(l) + out));
    }
    return nlohmann::json{{"layer_sizes", p.layer_sizes}, {"weights", weights}, {"biases", biases}};
}

MlpParams mlp_from_json(const nlohmann::json& j) {
    MlpParams p = make_mlp(j.at("layer_sizes").get<std::vector<int>>());
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (static_cast<int>(weights.size()) != p.layer_count() || static_cast<int>(biases.size()) != p.layer_count()) {
        throw io_error("model document: layer count mismatch");
    }
    for (int l = 0; l < p.layer_count(); ++l) {
        const int in = p.layer_sizes[static_cast<std::size_t>(l)];
        const int out = p.layer_sizes[static_cast<std::size_t>(l) + 1];
        const auto w = weights.at(static_cast<std::size_t>(l)).get<std::vector<double>>();
        const auto b = biases.at(static_cast<std::size_t>(l)).get<std::vector<double>>();
        if (static_cast<int>(w.size()) != in * out || static_cast<int>(b.size()) != out) {
            throw io_error("model document: parameter array size mismatch");
        }
        std::copy(w.begin(), w.end(), p.weights(l));
        std::copy(b.begin(), b.end(), p.biases(l));
    }
    return p;
}

}  // namespace

nlohmann::json model_to_json(const FittedModel& model) {
    nlohmann::json marginals = nlohmann::json::array();
    for (const auto& m : model.marginals) marginals.push_back(mlp_to_json(m));
    return nlohmann::json{
        {"format", "copulafit-model"},
        {"version", 1},
        {"kind", "neural"},
        {"dim", model.dim},
        {"columns", model.columns},
        {"normalization", {{"min", model.norm_min}, {"max", model.norm_max}}},
        {"marginals", marginals},
        {"copula", mlp_to_json(model.copula)},
        {"seed", model.seed},
        {"config", model.config.to_json()},
    };
}

FittedModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "copulafit-model") throw io_error("not a model document");
    if (j.value("kind", "neural") != "neural") {
        throw io_error("model document holds a parametric baseline, not a neural model");
    }
    FittedModel m;
    m.dim = j.at("dim").get<int>();
    m.columns = j.at("columns").get<std::vector<std::string>>();
    const auto& norm = j.at("normalization");
    m.norm_min = norm.at("min").get<std::vector<double>>();
    m.norm_max = norm.at("max").get<std::vector<double>>();
    for (const auto& mj : j.at("marginals")) m.marginals.push_back(mlp_from_json(mj));
    m.copula = mlp_from_json(j.at("copula"));
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("config")) m.config = TrainConfig::from_json(j.at("config"));
    m.validate();
    return m;
}

void save_model(const FittedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << '\n';
}

FittedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("model parse failure in " + path + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace copulafit
