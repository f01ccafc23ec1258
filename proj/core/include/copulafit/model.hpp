#pragma once

#include <span>
#include <string>
#include <vector>

#include "copulafit/config.hpp"
#include "copulafit/mlp.hpp"

namespace copulafit {

struct MarginalEval {
    double cdf;      // network output, in (0,1)
    double density;  // derivative of the output w.r.t. the input
};

struct CopulaEval {
    double cdf;      // value coefficient
    double density;  // full mixed-partial coefficient
    Jet jet;         // all 2^d coefficients
};

// One-input network evaluated at x in [0,1]; returns the CDF estimate and its
// input derivative via a one-variable jet.
MarginalEval marginal_forward(const MlpParams& params, double x);

// d-input network evaluated at u in [0,1]^d with every input active, so the jet
// carries all 2^d mixed partials at once.
CopulaEval copula_forward(const MlpParams& params, std::span<const double> u);

// Trained marginal stack plus copula network plus the min-max bounds that map
// raw data into the unit cube.
struct FittedModel {
    int dim = 0;
    std::vector<std::string> columns;
    std::vector<MlpParams> marginals;
    MlpParams copula;
    std::vector<double> norm_min, norm_max;
    std::uint64_t seed = 0;
    TrainConfig config;

    void validate() const;

    double normalize(int axis, double raw) const;
    double denormalize(int axis, double t) const;
};

// Joint density at x in the normalized domain: copula density at the marginal
// CDF image times the product of marginal densities. May be negative for an
// unconverged model; clamping happens only inside log-likelihoods.
double joint_pdf(const FittedModel& model, std::span<const double> x);

// Joint CDF at x in the normalized domain.
double joint_cdf(const FittedModel& model, std::span<const double> x);

// Model document I/O. Neural models round-trip exactly (shortest-roundtrip
// double formatting), so identical training runs produce identical files.
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace copulafit
