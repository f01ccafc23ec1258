#pragma once

#include <array>
#include <span>
#include <vector>

#include "copulafit/model.hpp"
#include "copulafit/util.hpp"

namespace copulafit {

// Densities are clamped to this floor inside logs so early epochs with
// non-positive density estimates stay finite; negativity itself is penalized
// separately.
inline constexpr double kLogClampEps = 1e-8;

struct LossWeights {
    std::vector<double> lambda;  // 4 entries (marginal) or 5 (copula), all >= 0
};

struct LossBreakdown {
    std::vector<double> terms;
    double total = 0.0;
};

// total = sum_k lambda_k * L_k, likelihood terms already negated inside L_1.
double total_loss(const LossBreakdown& terms, const LossWeights& weights);

// ---- formula layer: pure arithmetic over precomputed values --------------

double nll_mean(std::span<const double> densities);
double negativity_mean(std::span<const double> densities);
double integral_abs_dev(std::span<const double> densities, double cell);
double endpoint_penalty_value(double cdf_at_zero, double cdf_at_one);
// Boundary term keeps the summed (unnormalized) form.
double boundary_penalty_value(std::span<const double> lower_cdf,
                              std::span<const double> upper_cdf,
                              std::span<const double> upper_free);
double anchor_penalty_value(std::span<const double> model_cdf, std::span<const double> targets);

// Fraction of samples strictly below x in every coordinate.
double empirical_cdf(std::span<const double> samples_rowmajor, int dim, std::span<const double> x);

// ---- network-level inputs --------------------------------------------------

// Marginal-phase sample sets; the endpoint set is always {0, 1}.
struct MarginalData {
    std::vector<double> d1;   // data samples in [0,1]
    std::vector<double> d2;   // negativity grid
    std::vector<double> d3;   // integral grid
    double d3_spacing = 0.0;  // grid cell length
};

struct BoundaryPoint {
    std::array<double, 3> u{};
    int axis = 0;      // which face pair the point belongs to
    bool upper = false;  // lower face (u_axis = 0) or upper edge (all-but-axis = 1)
};

// Copula-phase sets already mapped through the frozen marginals: every point
// carries its copula-network input u and, where the joint density is involved,
// the constant marginal-density product.
struct CopulaData {
    int dim = 0;
    std::vector<double> d1_u, d1_factor;
    std::vector<double> d2_u, d2_factor;
    std::vector<double> d3_u, d3_factor;
    double d3_cell = 0.0;  // product of per-axis spacings
    std::vector<BoundaryPoint> d4;
    std::vector<double> d5_u, d5_target;

    std::size_t count(const std::vector<double>& flat) const {
        return flat.size() / static_cast<std::size_t>(dim);
    }
};

// ---- evaluation engine ------------------------------------------------------
//
// Computes every term and, when grad != nullptr, d(total)/d(theta) in the same
// sweep (grad is overwritten). Per-sample work is chunked through the optional
// pool with a fixed reduction shape, so results do not depend on thread count.
// One-hot weights give individual term gradients.

LossBreakdown marginal_losses(const MlpParams& params, const MarginalData& data,
                              const LossWeights& weights, std::vector<double>* grad = nullptr,
                              ThreadPool* pool = nullptr);

LossBreakdown copula_losses(const MlpParams& copula_params, const CopulaData& data,
                            const LossWeights& weights, std::vector<double>* grad = nullptr,
                            ThreadPool* pool = nullptr);

// ---- spec-named single-term entry points ------------------------------------

double marginal_nll(const MlpParams& params, std::span<const double> d1);
double marginal_negativity_penalty(const MlpParams& params, std::span<const double> d2);
double marginal_integral_penalty(const MlpParams& params, std::span<const double> d3, double spacing);
double marginal_endpoint_penalty(const MlpParams& params);

// x-space entry points: points are rows in the normalized data domain and are
// pushed through the model's frozen marginals internally.
double copula_nll(const FittedModel& model, std::span<const double> d1_rowmajor);
double copula_negativity_penalty(const FittedModel& model, std::span<const double> d2_rowmajor);
double copula_integral_penalty(const FittedModel& model, std::span<const double> d3_rowmajor, double cell);
double copula_boundary_penalty(const MlpParams& copula_params, std::span<const BoundaryPoint> d4);
double copula_anchor_penalty(const FittedModel& model, std::span<const double> d1_rowmajor,
                             std::span<const double> d5_rowmajor);

// Maps x-space rows through the model's marginals into CopulaData entries
// (u coordinates and density factors).
void map_through_marginals(const FittedModel& model, std::span<const double> rows,
                           std::vector<double>& u_out, std::vector<double>& factor_out);

}  // namespace copulafit
