#include "copulafit/config.hpp"

#include <fstream>
#include <stdexcept>

#include "copulafit/util.hpp"

namespace copulafit {

TrainConfig TrainConfig::defaults() {
    TrainConfig c;
    c.marginal.epochs = 60000;
    c.marginal.learning_rate = 1e-3;
    c.marginal.l2_rate = 1e-3;
    c.marginal.loss_weights = {0.1, 1.0, 2.0, 2.0};
    c.marginal.n2 = 1000;
    c.marginal.n3 = 1000;
    c.marginal.hidden = {5, 5, 5, 5};
    c.copula.epochs = 60000;
    c.copula.learning_rate = 1e-4;
    c.copula.l2_rate = 1e-3;
    c.copula.loss_weights = {0.1, 1.0, 1.0, 2.0, 5.0};
    c.copula.n2 = 2500;
    c.copula.n3 = 2500;
    c.copula.n4 = 800;
    c.copula.n5 = 200;
    c.copula.hidden = {10, 10, 10, 10, 10};
    return c;
}

void TrainConfig::validate() const {
    auto check_phase = [](const PhaseConfig& p, std::size_t n_weights, const char* name) {
        if (p.epochs < 1) throw std::invalid_argument(std::string(name) + ": epochs must be >= 1");
        if (p.learning_rate <= 0 || p.l2_rate < 0) {
            throw std::invalid_argument(std::string(name) + ": rates must be positive");
        }
        if (p.loss_weights.size() != n_weights) {
            throw std::invalid_argument(std::string(name) + ": wrong number of loss weights");
        }
        for (double w : p.loss_weights) {
            if (!(w >= 0)) throw std::invalid_argument(std::string(name) + ": loss weights must be >= 0");
        }
        if (p.n2 < 1 || p.n3 < 1) throw std::invalid_argument(std::string(name) + ": grid sizes must be >= 1");
        if (p.hidden.empty()) throw std::invalid_argument(std::string(name) + ": need at least one hidden layer");
    };
    check_phase(marginal, 4, "marginal");
    check_phase(copula, 5, "copula");
    if (copula.n4 < 1 || copula.n5 < 1) {
        throw std::invalid_argument("copula: boundary/observation set sizes must be >= 1");
    }
    if (!(train_frac > 0.0 && train_frac <= 1.0)) {
        throw std::invalid_argument("train_frac must be in (0, 1]");
    }
}

namespace {

nlohmann::json phase_to_json(const PhaseConfig& p) {
    return nlohmann::json{
        {"epochs", p.epochs},       {"learning_rate", p.learning_rate},
        {"l2_rate", p.l2_rate},     {"loss_weights", p.loss_weights},
        {"n2", p.n2},               {"n3", p.n3},
        {"n4", p.n4},               {"n5", p.n5},
        {"hidden", p.hidden},       {"log_interval", p.log_interval},
    };
}

PhaseConfig phase_from_json(const nlohmann::json& j, const PhaseConfig& base) {
    PhaseConfig p = base;
    if (j.contains("epochs")) p.epochs = j.at("epochs").get<int>();
    if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("l2_rate")) p.l2_rate = j.at("l2_rate").get<double>();
    if (j.contains("loss_weights")) p.loss_weights = j.at("loss_weights").get<std::vector<double>>();
    if (j.contains("n2")) p.n2 = j.at("n2").get<int>();
    if (j.contains("n3")) p.n3 = j.at("n3").get<int>();
    if (j.contains("n4")) p.n4 = j.at("n4").get<int>();
    if (j.contains("n5")) p.n5 = j.at("n5").get<int>();
    if (j.contains("hidden")) p.hidden = j.at("hidden").get<std::vector<int>>();
    if (j.contains("log_interval")) p.log_interval = j.at("log_interval").get<int>();
    return p;
}

}  // namespace

nlohmann::json TrainConfig::to_json() const {
    return nlohmann::json{
        {"seed", seed},
        {"threads", threads},
        {"train_frac", train_frac},
        {"marginal", phase_to_json(marginal)},
        {"copula", phase_to_json(copula)},
        {"adam", {{"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}}},
    };
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c = defaults();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("train_frac")) c.train_frac = j.at("train_frac").get<double>();
    if (j.contains("marginal")) c.marginal = phase_from_json(j.at("marginal"), c.marginal);
    if (j.contains("copula")) c.copula = phase_from_json(j.at("copula"), c.copula);
    if (j.contains("adam")) {
        const auto& a = j.at("adam");
        if (a.contains("beta1")) c.adam.beta1 = a.at("beta1").get<double>();
        if (a.contains("beta2")) c.adam.beta2 = a.at("beta2").get<double>();
        if (a.contains("eps")) c.adam.eps = a.at("eps").get<double>();
    }
    return c;
}

TrainConfig TrainConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("config parse failure in " + path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace copulafit
