#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "copulafit/data.hpp"
#include "copulafit/model.hpp"

namespace copulafit {

struct GridErrors {
    double mean_abs_cdf = 0.0;
    double max_abs_cdf = 0.0;
    double mean_abs_density = 0.0;
    double max_abs_density = 0.0;
};

struct ValidityReport {
    double lower_face_max = 0.0;   // max |C| where some coordinate is 0
    double upper_edge_max = 0.0;   // max |C(1,..,u_j,..,1) - u_j|
    std::size_t negative_rectangles = 0;
    double worst_rectangle = 0.0;  // most negative rectangle sum, as a magnitude
    double integral_deviation = 0.0;  // |1 - midpoint Riemann sum of the density|
};

struct EvalReport {
    std::optional<double> log_loss_neural, log_loss_gaussian, log_loss_frank, log_loss_student_t;
    std::optional<double> log_loss_oracle;
    std::optional<double> joint_log_density_neural;  // diagnostic, includes marginal terms
    std::optional<GridErrors> grid;
    std::vector<double> ks_distance;
    ValidityReport validity;

    nlohmann::json to_json() const;
};

// Mean log copula density at bivariate pseudo-observations; larger is better.
double test_log_loss(const std::function<double(std::span<const double>)>& copula_density,
                     std::span<const double> pseudo_obs_rowmajor, int dim);

// Mean/max absolute deviation of the model's copula CDF and density from the
// oracle tables, over the oracle's own lattice.
GridErrors grid_errors(const FittedModel& model, const OracleTables& oracle);

// Sup-distance between a marginal network's CDF and a truth callable over a
// 2001-point grid on [0,1].
double ks_distance(const MlpParams& marginal_params, const std::function<double(double)>& true_cdf);

// Checks the copula axioms on a resolution^d lattice (endpoints included):
// lower faces pin to 0, upper edges to the free coordinate, and every adjacent
// cell's signed corner sum must be non-negative. The density integral is taken
// by a midpoint rule on the (resolution-1)^d cell centers.
ValidityReport copula_validity_check(const MlpParams& copula_params, int resolution);

// Same axioms for an arbitrary CDF (and optional density) evaluator, used for
// parametric baselines and oracles.
ValidityReport validity_check_fn(const std::function<double(std::span<const double>)>& cdf,
                                 const std::function<double(std::span<const double>)>& density,
                                 int dim, int resolution);

// Rejection sampling from a non-negative density over [0,1]^dim with an
// envelope of 1.2x the maximum over a probe lattice. Deterministic per seed;
// sequential by contract. Throws numeric_error when the probe maximum is not
// positive or the acceptance rate collapses below 1e-4.
std::vector<double> rejection_sample(const std::function<double(std::span<const double>)>& density,
                                     int dim, std::size_t n, std::uint64_t seed, int probe_resolution = 101);

// Rejection sampling from the model's joint density over the normalized cube.
std::vector<double> sample_from_model(const FittedModel& model, std::size_t n, std::uint64_t seed);

}  // namespace copulafit
