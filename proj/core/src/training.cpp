#include "copulafit/training.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "copulafit/data.hpp"
#include "copulafit/rng.hpp"

namespace copulafit {

namespace {

// Midpoint lattice on [0,1]: points (i + 0.5) / n.
std::vector<double> midpoint_grid(int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = (i + 0.5) / static_cast<double>(n);
    return g;
}

}  // namespace

MarginalSets build_marginal_sets(std::span<const double> data_column, int n2, int n3, std::uint64_t seed) {
    (void)seed;  // nothing in the marginal sets is random; kept for interface symmetry
    if (data_column.empty()) throw std::invalid_argument("build_marginal_sets: empty column");
    if (n2 < 1 || n3 < 1) throw std::invalid_argument("build_marginal_sets: grid sizes must be >= 1");
    MarginalSets s;
    s.data.d1.assign(data_column.begin(), data_column.end());
    s.data.d2 = midpoint_grid(n2);
    s.data.d3 = midpoint_grid(n3);
    s.data.d3_spacing = 1.0 / static_cast<double>(n3);
    return s;
}

CopulaSets build_copula_sets(std::span<const double> data_rowmajor, int dim, int n2, int n3, int n4,
                             int n5, std::uint64_t seed) {
    if (dim < 1 || dim > kMaxVars) throw std::invalid_argument("build_copula_sets: dimension out of range");
    if (data_rowmajor.empty() || data_rowmajor.size() % static_cast<std::size_t>(dim) != 0) {
        throw std::invalid_argument("build_copula_sets: empty or malformed data");
    }
    if (n2 < 1 || n3 < 1 || n4 < 1 || n5 < 1) {
        throw std::invalid_argument("build_copula_sets: set sizes must be >= 1");
    }
    CopulaSets s;
    s.dim = dim;
    s.d1.assign(data_rowmajor.begin(), data_rowmajor.end());

    // Cartesian midpoint lattices, per-axis count rounded up.
    auto lattice = [dim](int n_target, int* per_axis_out) {
        const int per_axis = static_cast<int>(std::ceil(std::pow(static_cast<double>(n_target),
                                                                 1.0 / static_cast<double>(dim)) - 1e-9));
        *per_axis_out = per_axis;
        const std::vector<double> axis = midpoint_grid(per_axis);
        std::vector<double> pts;
        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(per_axis);
        pts.reserve(total * static_cast<std::size_t>(dim));
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        for (std::size_t f = 0; f < total; ++f) {
            for (int a = 0; a < dim; ++a) pts.push_back(axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]);
            for (int a = 0; a < dim; ++a) {
                if (++idx[static_cast<std::size_t>(a)] < per_axis) break;
                idx[static_cast<std::size_t>(a)] = 0;
            }
        }
        return pts;
    };
    int per2 = 0;
    s.d2 = lattice(n2, &per2);
    s.d3 = lattice(n3, &s.d3_per_axis);
    s.d3_cell = 1.0;
    for (int a = 0; a < dim; ++a) s.d3_cell /= static_cast<double>(s.d3_per_axis);

    // boundary faces: per dimension, n4 lower-face points (u_i = 0, rest free)
    // and n4 upper-edge points (u_i free, rest = 1)
    Rng rng(mix_seed(seed, 0x626e6479)); // "bndy"
    for (int axis = 0; axis < dim; ++axis) {
        for (int j = 0; j < n4; ++j) {
            BoundaryPoint lo;
            lo.axis = axis;
            lo.upper = false;
            for (int a = 0; a < dim; ++a) {
                lo.u[static_cast<std::size_t>(a)] = a == axis ? 0.0 : rng.uniform();
            }
            s.d4.push_back(lo);
        }
        for (int j = 0; j < n4; ++j) {
            BoundaryPoint up;
            up.axis = axis;
            up.upper = true;
            for (int a = 0; a < dim; ++a) {
                up.u[static_cast<std::size_t>(a)] = a == axis ? rng.uniform() : 1.0;
            }
            s.d4.push_back(up);
        }
    }

    // observation points with empirical-CDF targets
    Rng obs_rng(mix_seed(seed, 0x6f627376)); // "obsv"
    s.d5.reserve(static_cast<std::size_t>(n5) * static_cast<std::size_t>(dim));
    double pt[kMaxVars];
    for (int j = 0; j < n5; ++j) {
        for (int a = 0; a < dim; ++a) {
            pt[a] = obs_rng.uniform();
            s.d5.push_back(pt[a]);
        }
        s.d5_target.push_back(empirical_cdf(s.d1, dim, std::span<const double>(pt, static_cast<std::size_t>(dim))));
    }
    return s;
}

CopulaData prepare_copula_data(const CopulaSets& sets, std::span<const MlpParams> marginals) {
    if (static_cast<int>(marginals.size()) != sets.dim) {
        throw std::invalid_argument("prepare_copula_data: one marginal per dimension required");
    }
    CopulaData d;
    d.dim = sets.dim;
    d.d3_cell = sets.d3_cell;
    d.d4 = sets.d4;
    d.d5_target = sets.d5_target;

    auto map_rows = [&](const std::vector<double>& rows, std::vector<double>& u_out,
                        std::vector<double>& factor_out) {
        const std::size_t n = rows.size() / static_cast<std::size_t>(sets.dim);
        u_out.resize(rows.size());
        factor_out.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < sets.dim; ++a) {
                const MarginalEval m = marginal_forward(marginals[static_cast<std::size_t>(a)],
                                                        rows[i * static_cast<std::size_t>(sets.dim) +
                                                             static_cast<std::size_t>(a)]);
                u_out[i * static_cast<std::size_t>(sets.dim) + static_cast<std::size_t>(a)] = m.cdf;
                factor_out[i] *= m.density;
            }
        }
    };
    map_rows(sets.d1, d.d1_u, d.d1_factor);
    map_rows(sets.d2, d.d2_u, d.d2_factor);
    map_rows(sets.d3, d.d3_u, d.d3_factor);

    // observation points feed the copula through the marginal CDFs; their
    // targets were computed against the raw data and stay fixed
    std::vector<double> unused;
    map_rows(sets.d5, d.d5_u, unused);
    return d;
}

void adam_step(MlpParams& params, std::span<const double> grads, AdamState& state, double lr,
               double l2_rate, const AdamConfig& cfg) {
    const std::size_t P = params.param_count();
    if (grads.size() != P) throw std::invalid_argument("adam_step: gradient size mismatch");
    if (state.m.empty()) {
        state.m.assign(P, 0.0);
        state.v.assign(P, 0.0);
        state.t = 0;
    }
    if (state.m.size() != P) throw std::invalid_argument("adam_step: state size mismatch");
    for (double g : grads) {
        if (std::isnan(g)) throw numeric_error("adam_step: NaN gradient");
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < P; ++k) {
        double g = grads[k];
        if (l2_rate > 0.0 && params.is_weight(k)) g += 2.0 * l2_rate * params.theta[k];
        state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
        state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[k] / bc1;
        const double vhat = state.v[k] / bc2;
        params.theta[k] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

namespace {

// is_weight scans layer offsets per index; hot loop wants a flat mask instead
std::vector<char> weight_mask(const MlpParams& p) {
    std::vector<char> mask(p.param_count(), 0);
    for (int l = 0; l < p.layer_count(); ++l) {
        for (std::size_t k = p.weight_offset(l); k < p.bias_offset(l); ++k) mask[k] = 1;
    }
    return mask;
}

void adam_step_masked(MlpParams& params, std::span<const double> grads, const std::vector<char>& wmask,
                      AdamState& state, double lr, double l2_rate, const AdamConfig& cfg, int epoch) {
    const std::size_t P = params.param_count();
    for (double g : grads) {
        if (std::isnan(g)) {
            throw numeric_error("training: NaN gradient at epoch " + std::to_string(epoch));
        }
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < P; ++k) {
        double g = grads[k];
        if (l2_rate > 0.0 && wmask[k]) g += 2.0 * l2_rate * params.theta[k];
        state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
        state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
        params.theta[k] -= lr * (state.m[k] / bc1) / (std::sqrt(state.v[k] / bc2) + cfg.eps);
    }
}

}  // namespace

TrainResult train_marginal(std::span<const double> data_column, const TrainConfig& config,
                           std::uint64_t stream, ThreadPool* pool) {
    const PhaseConfig& ph = config.marginal;
    const MarginalSets sets = build_marginal_sets(data_column, ph.n2, ph.n3, config.seed);
    std::vector<int> shape;
    shape.push_back(1);
    for (int h : ph.hidden) shape.push_back(h);
    shape.push_back(1);
    TrainResult res;
    res.params = init_params(shape, mix_seed(config.seed, 0x6d617267 + stream)); // "marg" + column
    const LossWeights weights{ph.loss_weights};
    const std::vector<char> wmask = weight_mask(res.params);
    AdamState state;
    state.m.assign(res.params.param_count(), 0.0);
    state.v.assign(res.params.param_count(), 0.0);
    std::vector<double> grad;
    double last_finite = 0.0;
    for (int epoch = 1; epoch <= ph.epochs; ++epoch) {
        const LossBreakdown bd = marginal_losses(res.params, sets.data, weights, &grad, pool);
        if (!std::isfinite(bd.total)) {
            throw numeric_error("train_marginal: diverged at epoch " + std::to_string(epoch) +
                                " (last finite total " + std::to_string(last_finite) + ")");
        }
        last_finite = bd.total;
        if (epoch == 1 || epoch % ph.log_interval == 0 || epoch == ph.epochs) {
            res.history.push_back({epoch, bd});
        }
        adam_step_masked(res.params, grad, wmask, state, ph.learning_rate, ph.l2_rate, config.adam, epoch);
    }
    return res;
}

TrainResult train_copula(std::span<const double> data_rowmajor, int dim,
                         std::span<const MlpParams> marginals, const TrainConfig& config,
                         ThreadPool* pool) {
    const PhaseConfig& ph = config.copula;
    const CopulaSets sets = build_copula_sets(data_rowmajor, dim, ph.n2, ph.n3, ph.n4, ph.n5, config.seed);
    const CopulaData data = prepare_copula_data(sets, marginals);
    std::vector<int> shape;
    shape.push_back(dim);
    for (int h : ph.hidden) shape.push_back(h);
    shape.push_back(1);
    TrainResult res;
    res.params = init_params(shape, mix_seed(config.seed, 0x636f70)); // "cop"
    const LossWeights weights{ph.loss_weights};
    const std::vector<char> wmask = weight_mask(res.params);
    AdamState state;
    state.m.assign(res.params.param_count(), 0.0);
    state.v.assign(res.params.param_count(), 0.0);
    std::vector<double> grad;
    double last_finite = 0.0;
    for (int epoch = 1; epoch <= ph.epochs; ++epoch) {
        const LossBreakdown bd = copula_losses(res.params, data, weights, &grad, pool);
        if (!std::isfinite(bd.total)) {
            throw numeric_error("train_copula: diverged at epoch " + std::to_string(epoch) +
                                " (last finite total " + std::to_string(last_finite) + ")");
        }
        last_finite = bd.total;
        if (epoch == 1 || epoch % ph.log_interval == 0 || epoch == ph.epochs) {
            res.history.push_back({epoch, bd});
        }
        adam_step_masked(res.params, grad, wmask, state, ph.learning_rate, ph.l2_rate, config.adam, epoch);
    }
    return res;
}

FitOutput fit_model(const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    if (!dataset.normalized_ready() || dataset.train_idx.empty()) {
        throw std::invalid_argument("fit_model: dataset must be normalized and split first");
    }
    const int dim = dataset.dim();
    if (dim < 1 || dim > kMaxVars) {
        throw std::invalid_argument("fit_model: dimension must be 1.." + std::to_string(kMaxVars));
    }
    ThreadPool pool(resolve_threads(config.threads));

    FitOutput out;
    out.model.dim = dim;
    out.model.columns = dataset.columns;
    out.model.norm_min = dataset.norm_min;
    out.model.norm_max = dataset.norm_max;
    out.model.seed = config.seed;
    out.model.config = config;

    for (int c = 0; c < dim; ++c) {
        const std::vector<double> col = dataset.train_column(c);
        TrainResult r = train_marginal(col, config, static_cast<std::uint64_t>(c), &pool);
        out.model.marginals.push_back(r.params);
        out.phases.push_back(std::move(r));
    }
    const std::vector<double> rows = dataset.train_matrix();
    TrainResult rc = train_copula(rows, dim, out.model.marginals, config, &pool);
    out.model.copula = rc.params;
    out.phases.push_back(std::move(rc));
    out.model.validate();
    return out;
}

}  // namespace copulafit
