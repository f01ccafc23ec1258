#pragma once

#include <cstdint>
#include <vector>

#include "copulafit/config.hpp"
#include "copulafit/losses.hpp"
#include "copulafit/model.hpp"

namespace copulafit {

// Raw marginal-phase sets (normalized x-space). The grids are midpoint lattices
// so no constraint point sits on a domain boundary.
struct MarginalSets {
    MarginalData data;  // d1 samples, d2/d3 grids, d3 spacing
};

// Raw copula-phase sets. d1/d2/d3/d5 live in normalized x-space; d4 lives
// directly in copula-input (u) space on the unit-cube boundary.
struct CopulaSets {
    int dim = 0;
    std::vector<double> d1;  // training rows, row-major
    std::vector<double> d2;  // midpoint lattice
    std::vector<double> d3;  // midpoint lattice
    double d3_cell = 0.0;    // product of per-axis spacings
    int d3_per_axis = 0;     // actual per-axis count (n3 rounded up to a lattice)
    std::vector<BoundaryPoint> d4;
    std::vector<double> d5;              // observation points
    std::vector<double> d5_target;       // empirical CDF of d1 at each observation point
};

MarginalSets build_marginal_sets(std::span<const double> data_column, int n2, int n3, std::uint64_t seed);

CopulaSets build_copula_sets(std::span<const double> data_rowmajor, int dim, int n2, int n3, int n4,
                             int n5, std::uint64_t seed);

// Maps the x-space copula sets through frozen marginals into engine inputs.
CopulaData prepare_copula_data(const CopulaSets& sets, std::span<const MlpParams> marginals);

// Adam with bias correction; L2 regularization enters the gradient as
// 2 * l2_rate * theta on weights only (biases excluded).
struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

void adam_step(MlpParams& params, std::span<const double> grads, AdamState& state, double lr,
               double l2_rate, const AdamConfig& cfg = {});

struct HistoryEntry {
    int epoch = 0;
    LossBreakdown losses;
};

struct TrainResult {
    MlpParams params;
    std::vector<HistoryEntry> history;
};

// Full-batch training of one marginal network on the weighted four-term total.
TrainResult train_marginal(std::span<const double> data_column, const TrainConfig& config,
                           std::uint64_t stream, ThreadPool* pool = nullptr);

// Full-batch training of the copula network; marginal parameters are frozen and
// receive no gradient.
TrainResult train_copula(std::span<const double> data_rowmajor, int dim,
                         std::span<const MlpParams> marginals, const TrainConfig& config,
                         ThreadPool* pool = nullptr);

// Two-phase pipeline over a normalized dataset: fits each marginal on its
// column, freezes them, fits the copula; returns the assembled model plus the
// per-phase histories (marginals first, copula last).
struct FitOutput {
    FittedModel model;
    std::vector<TrainResult> phases;
};

FitOutput fit_model(const class Dataset& dataset, const TrainConfig& config);

}  // namespace copulafit
