#include "copulafit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "copulafit/losses.hpp"
#include "copulafit/rng.hpp"
#include "copulafit/util.hpp"

namespace copulafit {

nlohmann::json EvalReport::to_json() const {
    nlohmann::json j;
    nlohmann::json ll;
    if (log_loss_neural) ll["neural"] = *log_loss_neural;
    if (log_loss_gaussian) ll["gaussian"] = *log_loss_gaussian;
    if (log_loss_frank) ll["frank"] = *log_loss_frank;
    if (log_loss_student_t) ll["student_t"] = *log_loss_student_t;
    if (log_loss_oracle) ll["oracle"] = *log_loss_oracle;
    j["test_log_loss"] = ll;
    if (joint_log_density_neural) j["joint_log_density_neural"] = *joint_log_density_neural;
    if (grid) {
        j["grid_errors"] = {{"mean_abs_C", grid->mean_abs_cdf},
                            {"max_abs_C", grid->max_abs_cdf},
                            {"mean_abs_c", grid->mean_abs_density},
                            {"max_abs_c", grid->max_abs_density}};
    }
    j["ks_distance"] = ks_distance;
    j["validity"] = {{"boundary_lower_max", validity.lower_face_max},
                     {"boundary_upper_max", validity.upper_edge_max},
                     {"rectangle_violations", validity.negative_rectangles},
                     {"rectangle_worst", validity.worst_rectangle},
                     {"integral_deviation", validity.integral_deviation}};
    return j;
}

double test_log_loss(const std::function<double(std::span<const double>)>& copula_density,
                     std::span<const double> pseudo_obs_rowmajor, int dim) {
    if (pseudo_obs_rowmajor.empty() || pseudo_obs_rowmajor.size() % static_cast<std::size_t>(dim) != 0) {
        throw std::invalid_argument("test_log_loss: empty or malformed test set");
    }
    const std::size_t n = pseudo_obs_rowmajor.size() / static_cast<std::size_t>(dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> u(pseudo_obs_rowmajor.data() + i * static_cast<std::size_t>(dim),
                                        static_cast<std::size_t>(dim));
        acc += std::log(std::max(copula_density(u), kLogClampEps));
    }
    return acc / static_cast<double>(n);
}

GridErrors grid_errors(const FittedModel& model, const OracleTables& oracle) {
    if (model.dim != oracle.dim) throw std::invalid_argument("grid_errors: dimension mismatch");
    GridErrors e;
    const int res = oracle.resolution;
    std::size_t total = 1;
    for (int a = 0; a < oracle.dim; ++a) total *= static_cast<std::size_t>(res);
    int idx[3] = {0, 0, 0};
    double u[3];
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (int a = 0; a < oracle.dim; ++a) u[a] = oracle.grid_u[static_cast<std::size_t>(idx[a])];
        const CopulaEval ce = copula_forward(model.copula, std::span<const double>(u, static_cast<std::size_t>(oracle.dim)));
        const double dc = std::abs(ce.cdf - oracle.copula_cdf[flat]);
        const double dd = std::abs(ce.density - oracle.copula_density[flat]);
        e.mean_abs_cdf += dc;
        e.mean_abs_density += dd;
        e.max_abs_cdf = std::max(e.max_abs_cdf, dc);
        e.max_abs_density = std::max(e.max_abs_density, dd);
        for (int a = 0; a < oracle.dim; ++a) {
            if (++idx[a] < res) break;
            idx[a] = 0;
        }
    }
    e.mean_abs_cdf /= static_cast<double>(total);
    e.mean_abs_density /= static_cast<double>(total);
    return e;
}

double ks_distance(const MlpParams& marginal_params, const std::function<double(double)>& true_cdf) {
    constexpr int kGrid = 2001;
    double worst = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double x = static_cast<double>(i) / (kGrid - 1);
        const double fhat = marginal_forward(marginal_params, x).cdf;
        worst = std::max(worst, std::abs(fhat - true_cdf(x)));
    }
    return worst;
}

ValidityReport validity_check_fn(const std::function<double(std::span<const double>)>& cdf,
                                 const std::function<double(std::span<const double>)>& density,
                                 int dim, int resolution) {
    if (resolution < 2) throw std::invalid_argument("validity check: resolution must be >= 2");
    if (dim < 1 || dim > kMaxVars) throw std::invalid_argument("validity check: dimension out of range");
    ValidityReport rep;

    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(resolution);
    std::vector<double> table(total);
    int idx[3] = {0, 0, 0};
    double u[3] = {0, 0, 0};
    for (std::size_t flat = 0; flat < total; ++flat) {
        bool lower = false;
        int ones = 0;
        int free_axis = 0;
        for (int a = 0; a < dim; ++a) {
            u[a] = static_cast<double>(idx[a]) / (resolution - 1);
            if (idx[a] == 0) lower = true;
            if (idx[a] == resolution - 1) {
                ++ones;
            } else {
                free_axis = a;
            }
        }
        const double C = cdf(std::span<const double>(u, static_cast<std::size_t>(dim)));
        table[flat] = C;
        if (lower) {
            rep.lower_face_max = std::max(rep.lower_face_max, std::abs(C));
        }
        if (!lower && ones >= dim - 1) {
            const double target = ones == dim ? 1.0 : u[free_axis];
            rep.upper_edge_max = std::max(rep.upper_edge_max, std::abs(C - target));
        }
        for (int a = 0; a < dim; ++a) {
            if (++idx[a] < resolution) break;
            idx[a] = 0;
        }
    }

    // d-increasing: signed corner sums over every adjacent cell
    std::size_t cells = 1;
    for (int a = 0; a < dim; ++a) cells *= static_cast<std::size_t>(resolution - 1);
    std::size_t stride[3] = {1, static_cast<std::size_t>(resolution),
                             static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution)};
    int cidx[3] = {0, 0, 0};
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::size_t base = 0;
        for (int a = 0; a < dim; ++a) base += static_cast<std::size_t>(cidx[a]) * stride[a];
        double sum = 0.0;
        for (int corner = 0; corner < (1 << dim); ++corner) {
            std::size_t off = base;
            int lows = 0;
            for (int a = 0; a < dim; ++a) {
                if (corner & (1 << a)) {
                    off += stride[a];
                } else {
                    ++lows;
                }
            }
            sum += (lows % 2 == 0 ? 1.0 : -1.0) * table[off];
        }
        if (sum < 0.0) {
            ++rep.negative_rectangles;
            rep.worst_rectangle = std::max(rep.worst_rectangle, -sum);
        }
        for (int a = 0; a < dim; ++a) {
            if (++cidx[a] < resolution - 1) break;
            cidx[a] = 0;
        }
    }

    // density integral by midpoint rule on cell centers
    if (density) {
        double cell_vol = 1.0;
        for (int a = 0; a < dim; ++a) cell_vol /= static_cast<double>(resolution - 1);
        double acc = 0.0;
        int midx[3] = {0, 0, 0};
        for (std::size_t cell = 0; cell < cells; ++cell) {
            for (int a = 0; a < dim; ++a) u[a] = (midx[a] + 0.5) / (resolution - 1);
            acc += density(std::span<const double>(u, static_cast<std::size_t>(dim)));
            for (int a = 0; a < dim; ++a) {
                if (++midx[a] < resolution - 1) break;
                midx[a] = 0;
            }
        }
        rep.integral_deviation = std::abs(1.0 - acc * cell_vol);
    }
    return rep;
}

ValidityReport copula_validity_check(const MlpParams& copula_params, int resolution) {
    const int dim = copula_params.input_width();
    auto cdf = [&](std::span<const double> u) { return copula_forward(copula_params, u).cdf; };
    auto dens = [&](std::span<const double> u) { return copula_forward(copula_params, u).density; };
    return validity_check_fn(cdf, dens, dim, resolution);
}

std::vector<double> rejection_sample(const std::function<double(std::span<const double>)>& density,
                                     int dim, std::size_t n, std::uint64_t seed, int probe_resolution) {
    if (dim < 1 || dim > kMaxVars) throw std::invalid_argument("rejection_sample: dimension out of range");
    if (probe_resolution < 2) throw std::invalid_argument("rejection_sample: probe resolution too small");

    // probe lattice maximum, negative densities clamped to zero
    double peak = 0.0;
    std::size_t probes = 1;
    for (int a = 0; a < dim; ++a) probes *= static_cast<std::size_t>(probe_resolution);
    int idx[3] = {0, 0, 0};
    double u[3];
    for (std::size_t flat = 0; flat < probes; ++flat) {
        for (int a = 0; a < dim; ++a) u[a] = static_cast<double>(idx[a]) / (probe_resolution - 1);
        peak = std::max(peak, density(std::span<const double>(u, static_cast<std::size_t>(dim))));
        for (int a = 0; a < dim; ++a) {
            if (++idx[a] < probe_resolution) break;
            idx[a] = 0;
        }
    }
    if (!(peak > 0.0)) throw numeric_error("rejection_sample: probe maximum is not positive");
    const double envelope = 1.2 * peak;

    std::vector<double> out;
    out.reserve(n * static_cast<std::size_t>(dim));
    Rng rng(mix_seed(seed, 0x73616d70)); // "samp"
    std::size_t accepted = 0, attempts = 0;
    double pt[3];
    while (accepted < n) {
        for (int a = 0; a < dim; ++a) pt[a] = rng.uniform();
        const double threshold = rng.uniform() * envelope;
        ++attempts;
        const double f = std::max(density(std::span<const double>(pt, static_cast<std::size_t>(dim))), 0.0);
        if (threshold < f) {
            for (int a = 0; a < dim; ++a) out.push_back(pt[a]);
            ++accepted;
        }
        if (attempts >= 10000 && static_cast<double>(accepted) < 1e-4 * static_cast<double>(attempts)) {
            throw numeric_error("rejection_sample: acceptance rate below 1e-4 (envelope " +
                                std::to_string(envelope) + ", " + std::to_string(accepted) + "/" +
                                std::to_string(attempts) + " accepted)");
        }
    }
    return out;
}

std::vector<double> sample_from_model(const FittedModel& model, std::size_t n, std::uint64_t seed) {
    auto density = [&](std::span<const double> x) { return joint_pdf(model, x); };
    return rejection_sample(density, model.dim, n, seed, 101);
}

}  // namespace copulafit
