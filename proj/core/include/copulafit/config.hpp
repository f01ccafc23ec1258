#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace copulafit {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One training phase (marginal or copula). Defaults are the protocol the whole
// toolkit is tuned around; a bare `fit` runs exactly these numbers.
struct PhaseConfig {
    int epochs = 60000;
    double learning_rate = 1e-3;
    double l2_rate = 1e-3;
    std::vector<double> loss_weights;  // 4 entries (marginal) or 5 (copula)
    int n2 = 1000;                     // negativity grid size
    int n3 = 1000;                     // integral grid size
    int n4 = 0;                        // boundary points per face (copula only)
    int n5 = 0;                        // CDF observation points (copula only)
    std::vector<int> hidden;           // hidden layer widths
    int log_interval = 100;
};

struct TrainConfig {
    std::uint64_t seed = 7;
    int threads = 0;  // 0 = hardware
    double train_frac = 2.0 / 3.0;
    PhaseConfig marginal;
    PhaseConfig copula;
    AdamConfig adam;

    static TrainConfig defaults();
    void validate() const;

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
    static TrainConfig load_file(const std::string& path);
};

}  // namespace copulafit
