#include "copulafit/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "copulafit/tape.hpp"

namespace copulafit {

double total_loss(const LossBreakdown& terms, const LossWeights& weights) {
    if (terms.terms.size() != weights.lambda.size()) {
        throw std::invalid_argument("total_loss: term/weight length mismatch");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < weights.lambda.size(); ++k) total += weights.lambda[k] * terms.terms[k];
    return total;
}

double nll_mean(std::span<const double> densities) {
    if (densities.empty()) throw std::invalid_argument("nll: empty sample set");
    double acc = 0.0;
    for (double v : densities) acc -= std::log(std::max(v, kLogClampEps));
    return acc / static_cast<double>(densities.size());
}

double negativity_mean(std::span<const double> densities) {
    if (densities.empty()) throw std::invalid_argument("negativity penalty: empty grid");
    double acc = 0.0;
    for (double v : densities) acc += std::max(-v, 0.0);
    return acc / static_cast<double>(densities.size());
}

double integral_abs_dev(std::span<const double> densities, double cell) {
    if (densities.empty()) throw std::invalid_argument("integral penalty: empty grid");
    double acc = 0.0;
    for (double v : densities) acc += v;
    return std::abs(1.0 - acc * cell);
}

double endpoint_penalty_value(double cdf_at_zero, double cdf_at_one) {
    return cdf_at_zero + std::abs(1.0 - cdf_at_one);
}

double boundary_penalty_value(std::span<const double> lower_cdf,
                              std::span<const double> upper_cdf,
                              std::span<const double> upper_free) {
    if (upper_cdf.size() != upper_free.size()) {
        throw std::invalid_argument("boundary penalty: upper value/coordinate mismatch");
    }
    double acc = 0.0;
    for (double v : lower_cdf) acc += v;
    for (std::size_t i = 0; i < upper_cdf.size(); ++i) acc += std::abs(upper_cdf[i] - upper_free[i]);
    return acc;
}

double anchor_penalty_value(std::span<const double> model_cdf, std::span<const double> targets) {
    if (model_cdf.empty()) throw std::invalid_argument("anchor penalty: empty observation set");
    if (model_cdf.size() != targets.size()) {
        throw std::invalid_argument("anchor penalty: value/target length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < model_cdf.size(); ++i) acc += std::abs(model_cdf[i] - targets[i]);
    return acc / static_cast<double>(model_cdf.size());
}

double empirical_cdf(std::span<const double> samples_rowmajor, int dim, std::span<const double> x) {
    if (dim < 1 || samples_rowmajor.empty() || samples_rowmajor.size() % static_cast<std::size_t>(dim) != 0) {
        throw std::invalid_argument("empirical_cdf: empty or malformed sample set");
    }
    if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("empirical_cdf: dimension mismatch");
    const std::size_t n = samples_rowmajor.size() / static_cast<std::size_t>(dim);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool below = true;
        for (int j = 0; j < dim; ++j) {
            if (!(samples_rowmajor[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)] <
                  x[static_cast<std::size_t>(j)])) {
                below = false;
                break;
            }
        }
        if (below) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// evaluation engine
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kChunk = 512;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Runs fn over [0,n) in fixed chunks (inline when pool is null), then combines
// per-chunk value partials in chunk order and, when requested, sums per-chunk
// gradient partials in chunk order as well.
struct ChunkRunner {
    ThreadPool* pool;
    std::size_t param_count;
    bool want_grad;

    std::vector<double> value_partials;
    std::vector<std::vector<double>> grad_partials;

    template <typename Fn>
    double run(std::size_t n, std::vector<double>* grad_out, const Fn& per_point) {
        const std::size_t chunks = ThreadPool::chunk_count(n, kChunk);
        value_partials.assign(chunks, 0.0);
        if (want_grad) {
            grad_partials.resize(chunks);
            for (auto& g : grad_partials) g.assign(param_count, 0.0);
        }
        auto body = [&](std::size_t ci, std::size_t begin, std::size_t end) {
            Tape tape;
            double acc = 0.0;
            double* g = want_grad ? grad_partials[ci].data() : nullptr;
            for (std::size_t i = begin; i < end; ++i) acc += per_point(i, tape, g);
            value_partials[ci] = acc;
        };
        if (pool != nullptr) {
            pool->for_chunks(n, kChunk, body);
        } else {
            for (std::size_t ci = 0; ci < chunks; ++ci) {
                const std::size_t b = ci * kChunk;
                body(ci, b, std::min(n, b + kChunk));
            }
        }
        double total = 0.0;
        for (double v : value_partials) total += v;
        if (want_grad && grad_out != nullptr) {
            for (const auto& g : grad_partials) {
                for (std::size_t k = 0; k < param_count; ++k) (*grad_out)[k] += g[k];
            }
        }
        return total;
    }
};

}  // namespace

LossBreakdown marginal_losses(const MlpParams& params, const MarginalData& data,
                              const LossWeights& weights, std::vector<double>* grad, ThreadPool* pool) {
    if (weights.lambda.size() != 4) throw std::invalid_argument("marginal losses: need 4 weights");
    if (data.d1.empty()) throw std::invalid_argument("marginal losses: empty sample set");
    if (data.d2.empty() || data.d3.empty()) throw std::invalid_argument("marginal losses: empty grid");
    if (params.input_width() != 1) throw std::invalid_argument("marginal losses: network must have one input");
    const std::size_t P = params.param_count();
    if (grad != nullptr) grad->assign(P, 0.0);
    const bool wg = grad != nullptr;
    const double n1 = static_cast<double>(data.d1.size());
    const double n2 = static_cast<double>(data.d2.size());

    // integral term first: its per-point adjoint needs the global Riemann sum
    double T = 0.0;
    {
        ChunkRunner r{pool, P, false, {}, {}};
        T = r.run(data.d3.size(), nullptr, [&](std::size_t i, Tape&, double*) {
            const Jet in = jet_var(0, data.d3[i], 1);
            return forward_eval(params, std::span<const Jet>(&in, 1)).c[1];
        }) * data.d3_spacing;
    }
    const double sign3 = sign_of(1.0 - T);

    LossBreakdown out;
    out.terms.assign(4, 0.0);
    out.terms[2] = std::abs(1.0 - T);

    // D1: negative mean log density
    {
        ChunkRunner r{pool, P, wg, {}, {}};
        out.terms[0] = r.run(data.d1.size(), grad, [&](std::size_t i, Tape& tape, double* g) {
            const Jet in = jet_var(0, data.d1[i], 1);
            if (g == nullptr) {
                const double v = forward_eval(params, std::span<const Jet>(&in, 1)).c[1];
                return -std::log(std::max(v, kLogClampEps));
            }
            tape.forward(params, std::span<const Jet>(&in, 1));
            const double v = tape.output().c[1];
            Jet seed;
            seed.dim = 1;
            if (v > kLogClampEps) seed.c[1] = weights.lambda[0] * (-1.0 / (n1 * v));
            tape.backward_weighted(seed, std::span<double>(g, P));
            return -std::log(std::max(v, kLogClampEps));
        }) / n1;
    }

    // D2: mean relu(-density)
    {
        ChunkRunner r{pool, P, wg, {}, {}};
        out.terms[1] = r.run(data.d2.size(), grad, [&](std::size_t i, Tape& tape, double* g) {
            const Jet in = jet_var(0, data.d2[i], 1);
            if (g == nullptr) {
                const double v = forward_eval(params, std::span<const Jet>(&in, 1)).c[1];
                return std::max(-v, 0.0);
            }
            tape.forward(params, std::span<const Jet>(&in, 1));
            const double v = tape.output().c[1];
            Jet seed;
            seed.dim = 1;
            if (v < 0.0) seed.c[1] = -weights.lambda[1] / n2;
            tape.backward_weighted(seed, std::span<double>(g, P));
            return std::max(-v, 0.0);
        }) / n2;
    }

    // D3 gradient sweep (value already known)
    if (wg && weights.lambda[2] != 0.0 && sign3 != 0.0) {
        ChunkRunner r{pool, P, true, {}, {}};
        r.run(data.d3.size(), grad, [&](std::size_t i, Tape& tape, double* g) {
            const Jet in = jet_var(0, data.d3[i], 1);
            tape.forward(params, std::span<const Jet>(&in, 1));
            Jet seed;
            seed.dim = 1;
            seed.c[1] = weights.lambda[2] * (-sign3) * data.d3_spacing;
            tape.backward_weighted(seed, std::span<double>(g, P));
            return 0.0;
        });
    }

    // D4 = {0, 1}
    {
        Tape tape;
        const Jet in0 = jet_var(0, 0.0, 1);
        tape.forward(params, std::span<const Jet>(&in0, 1));
        const double F0 = tape.output().c[0];
        if (wg) {
            Jet seed;
            seed.dim = 1;
            seed.c[0] = weights.lambda[3];
            tape.backward_weighted(seed, std::span<double>(grad->data(), P));
        }
        const Jet in1 = jet_var(0, 1.0, 1);
        tape.forward(params, std::span<const Jet>(&in1, 1));
        const double F1 = tape.output().c[0];
        if (wg) {
            Jet seed;
            seed.dim = 1;
            seed.c[0] = weights.lambda[3] * sign_of(F1 - 1.0);
            tape.backward_weighted(seed, std::span<double>(grad->data(), P));
        }
        out.terms[3] = endpoint_penalty_value(F0, F1);
    }

    out.total = total_loss(out, weights);
    return out;
}

namespace {

// Per-point copula forward: builds the input jets (active variables when
// `active` is true, plain constants otherwise) in caller-provided storage.
void copula_inputs(std::span<const double> flat, std::size_t i, int dim, bool active, Jet* out) {
    const std::size_t base = i * static_cast<std::size_t>(dim);
    for (int a = 0; a < dim; ++a) {
        out[a] = active ? jet_var(a, flat[base + static_cast<std::size_t>(a)], dim)
                        : jet_const(flat[base + static_cast<std::size_t>(a)], 0);
    }
}

}  // namespace

LossBreakdown copula_losses(const MlpParams& copula_params, const CopulaData& data,
                            const LossWeights& weights, std::vector<double>* grad, ThreadPool* pool) {
    if (weights.lambda.size() != 5) throw std::invalid_argument("copula losses: need 5 weights");
    const int d = data.dim;
    if (d < 1 || d > kMaxVars) throw std::invalid_argument("copula losses: dimension out of range");
    if (copula_params.input_width() != d) throw std::invalid_argument("copula losses: dimension mismatch");
    if (data.d1_u.empty()) throw std::invalid_argument("copula losses: empty sample set");
    if (data.d2_u.empty() || data.d3_u.empty()) throw std::invalid_argument("copula losses: empty grid");
    if (data.d4.empty()) throw std::invalid_argument("copula losses: empty boundary set");
    if (data.d5_u.empty()) throw std::invalid_argument("copula losses: empty observation set");
    if (std::abs(static_cast<double>(data.count(data.d3_u)) * data.d3_cell - 1.0) > 1e-9) {
        throw std::invalid_argument("copula losses: integral grid is not a full Cartesian lattice");
    }

    const std::size_t P = copula_params.param_count();
    if (grad != nullptr) grad->assign(P, 0.0);
    const bool wg = grad != nullptr;
    const int full_mask = (1 << d) - 1;
    const double n1 = static_cast<double>(data.count(data.d1_u));
    const double n2 = static_cast<double>(data.count(data.d2_u));
    const double n5 = static_cast<double>(data.count(data.d5_u));

    // integral term: global Riemann sum first
    double T = 0.0;
    {
        ChunkRunner r{pool, P, false, {}, {}};
        T = r.run(data.count(data.d3_u), nullptr, [&](std::size_t i, Tape&, double*) {
            Jet in[kMaxVars];
            copula_inputs(data.d3_u, i, d, true, in);
            const Jet o = forward_eval(copula_params, std::span<const Jet>(in, static_cast<std::size_t>(d)));
            return o.full() * data.d3_factor[i];
        }) * data.d3_cell;
    }
    const double sign3 = sign_of(1.0 - T);

    LossBreakdown out;
    out.terms.assign(5, 0.0);
    out.terms[2] = std::abs(1.0 - T);

    // D1: negative mean log joint density (copula density times frozen factor)
    {
        ChunkRunner r{pool, P, wg, {}, {}};
        out.terms[0] = r.run(data.count(data.d1_u), grad, [&](std::size_t i, Tape& tape, double* g) {
            Jet in[kMaxVars];
            copula_inputs(data.d1_u, i, d, true, in);
            const std::span<const Jet> ins(in, static_cast<std::size_t>(d));
            if (g == nullptr) {
                const double fc = forward_eval(copula_params, ins).full() * data.d1_factor[i];
                return -std::log(std::max(fc, kLogClampEps));
            }
            tape.forward(copula_params, ins);
            const double fc = tape.output().full() * data.d1_factor[i];
            Jet seed;
            seed.dim = d;
            if (fc > kLogClampEps) {
                seed.c[static_cast<std::size_t>(full_mask)] =
                    weights.lambda[0] * (-data.d1_factor[i] / (n1 * fc));
            }
            tape.backward_weighted(seed, std::span<double>(g, P));
            return -std::log(std::max(fc, kLogClampEps));
        }) / n1;
    }

    // D2: mean relu(-joint density)
    {
        ChunkRunner r{pool, P, wg, {}, {}};
        out.terms[1] = r.run(data.count(data.d2_u), grad, [&](std::size_t i, Tape& tape, double* g) {
            Jet in[kMaxVars];
            copula_inputs(data.d2_u, i, d, true, in);
            const std::span<const Jet> ins(in, static_cast<std::size_t>(d));
            if (g == nullptr) {
                const double fc = forward_eval(copula_params, ins).full() * data.d2_factor[i];
                return std::max(-fc, 0.0);
            }
            tape.forward(copula_params, ins);
            const double fc = tape.output().full() * data.d2_factor[i];
            Jet seed;
            seed.dim = d;
            if (fc < 0.0) {
                seed.c[static_cast<std::size_t>(full_mask)] = -weights.lambda[1] * data.d2_factor[i] / n2;
            }
            tape.backward_weighted(seed, std::span<double>(g, P));
            return std::max(-fc, 0.0);
        }) / n2;
    }

    // D3 gradient sweep
    if (wg && weights.lambda[2] != 0.0 && sign3 != 0.0) {
        ChunkRunner r{pool, P, true, {}, {}};
        r.run(data.count(data.d3_u), grad, [&](std::size_t i, Tape& tape, double* g) {
            Jet in[kMaxVars];
            copula_inputs(data.d3_u, i, d, true, in);
            tape.forward(copula_params, std::span<const Jet>(in, static_cast<std::size_t>(d)));
            Jet seed;
            seed.dim = d;
            seed.c[static_cast<std::size_t>(full_mask)] =
                weights.lambda[2] * (-sign3) * data.d3_factor[i] * data.d3_cell;
            tape.backward_weighted(seed, std::span<double>(g, P));
            return 0.0;
        });
    }

    // D4: boundary sum (scalar-mode jets; only the value coefficient matters)
    {
        ChunkRunner r{pool, P, wg, {}, {}};
        out.terms[3] = r.run(data.d4.size(), grad, [&](std::size_t i, Tape& tape, double* g) {
            const BoundaryPoint& bp = data.d4[i];
            Jet in[kMaxVars];
            for (int a = 0; a < d; ++a) in[a] = jet_const(bp.u[static_cast<std::size_t>(a)], 0);
            const std::span<const Jet> ins(in, static_cast<std::size_t>(d));
            double C;
            if (g == nullptr) {
                C = forward_eval(copula_params, ins).value();
            } else {
                tape.forward(copula_params, ins);
                C = tape.output().value();
                Jet seed;
                seed.dim = 0;
                seed.c[0] = bp.upper ? weights.lambda[3] * sign_of(C - bp.u[static_cast<std::size_t>(bp.axis)])
                                     : weights.lambda[3];
                tape.backward_weighted(seed, std::span<double>(g, P));
            }
            return bp.upper ? std::abs(C - bp.u[static_cast<std::size_t>(bp.axis)]) : C;
        });
    }

    // D5: mean absolute deviation from the empirical CDF targets
    {
        ChunkRunner r{pool, P, wg, {}, {}};
        out.terms[4] = r.run(data.count(data.d5_u), grad, [&](std::size_t i, Tape& tape, double* g) {
            Jet in[kMaxVars];
            copula_inputs(data.d5_u, i, d, false, in);
            const std::span<const Jet> ins(in, static_cast<std::size_t>(d));
            double C;
            if (g == nullptr) {
                C = forward_eval(copula_params, ins).value();
            } else {
                tape.forward(copula_params, ins);
                C = tape.output().value();
                Jet seed;
                seed.dim = 0;
                seed.c[0] = weights.lambda[4] * sign_of(C - data.d5_target[i]) / n5;
                tape.backward_weighted(seed, std::span<double>(g, P));
            }
            return std::abs(C - data.d5_target[i]);
        }) / n5;
    }

    out.total = total_loss(out, weights);
    return out;
}

// ---------------------------------------------------------------------------
// spec-named wrappers
// ---------------------------------------------------------------------------

namespace {

std::vector<double> marginal_densities(const MlpParams& params, std::span<const double> xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const Jet in = jet_var(0, x, 1);
        out.push_back(forward_eval(params, std::span<const Jet>(&in, 1)).c[1]);
    }
    return out;
}

}  // namespace

double marginal_nll(const MlpParams& params, std::span<const double> d1) {
    if (d1.empty()) throw std::invalid_argument("marginal_nll: empty sample set");
    return nll_mean(marginal_densities(params, d1));
}

double marginal_negativity_penalty(const MlpParams& params, std::span<const double> d2) {
    if (d2.empty()) throw std::invalid_argument("marginal_negativity_penalty: empty grid");
    return negativity_mean(marginal_densities(params, d2));
}

double marginal_integral_penalty(const MlpParams& params, std::span<const double> d3, double spacing) {
    if (d3.empty()) throw std::invalid_argument("marginal_integral_penalty: empty grid");
    return integral_abs_dev(marginal_densities(params, d3), spacing);
}

double marginal_endpoint_penalty(const MlpParams& params) {
    return endpoint_penalty_value(marginal_forward(params, 0.0).cdf, marginal_forward(params, 1.0).cdf);
}

void map_through_marginals(const FittedModel& model, std::span<const double> rows,
                           std::vector<double>& u_out, std::vector<double>& factor_out) {
    const int d = model.dim;
    const std::size_t n = rows.size() / static_cast<std::size_t>(d);
    u_out.resize(rows.size());
    factor_out.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) {
            const MarginalEval m = marginal_forward(model.marginals[static_cast<std::size_t>(a)],
                                                    rows[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)]);
            u_out[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] = m.cdf;
            factor_out[i] *= m.density;
        }
    }
}

namespace {

std::vector<double> joint_densities(const FittedModel& model, std::span<const double> rows) {
    std::vector<double> u, f;
    map_through_marginals(model, rows, u, f);
    const std::size_t n = f.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> ui(u.data() + i * static_cast<std::size_t>(model.dim),
                                         static_cast<std::size_t>(model.dim));
        out[i] = copula_forward(model.copula, ui).density * f[i];
    }
    return out;
}

}  // namespace

double copula_nll(const FittedModel& model, std::span<const double> d1_rowmajor) {
    if (d1_rowmajor.empty()) throw std::invalid_argument("copula_nll: empty sample set");
    if (d1_rowmajor.size() % static_cast<std::size_t>(model.dim) != 0) {
        throw std::invalid_argument("copula_nll: dimension mismatch");
    }
    return nll_mean(joint_densities(model, d1_rowmajor));
}

double copula_negativity_penalty(const FittedModel& model, std::span<const double> d2_rowmajor) {
    if (d2_rowmajor.empty()) throw std::invalid_argument("copula_negativity_penalty: empty grid");
    return negativity_mean(joint_densities(model, d2_rowmajor));
}

double copula_integral_penalty(const FittedModel& model, std::span<const double> d3_rowmajor, double cell) {
    if (d3_rowmajor.empty()) throw std::invalid_argument("copula_integral_penalty: empty grid");
    const std::size_t n = d3_rowmajor.size() / static_cast<std::size_t>(model.dim);
    if (std::abs(static_cast<double>(n) * cell - 1.0) > 1e-9) {
        throw std::invalid_argument("copula_integral_penalty: grid is not a full Cartesian lattice");
    }
    return integral_abs_dev(joint_densities(model, d3_rowmajor), cell);
}

double copula_boundary_penalty(const MlpParams& copula_params, std::span<const BoundaryPoint> d4) {
    if (d4.empty()) throw std::invalid_argument("copula_boundary_penalty: empty boundary set");
    const int d = copula_params.input_width();
    double acc = 0.0;
    for (const BoundaryPoint& bp : d4) {
        bool lower_ok = !bp.upper && bp.u[static_cast<std::size_t>(bp.axis)] == 0.0;
        bool upper_ok = bp.upper;
        if (bp.upper) {
            for (int a = 0; a < d; ++a) {
                if (a != bp.axis && bp.u[static_cast<std::size_t>(a)] != 1.0) upper_ok = false;
            }
        }
        if (!lower_ok && !upper_ok) {
            throw std::invalid_argument("copula_boundary_penalty: point lies on neither face type");
        }
        const double C = copula_forward(copula_params, std::span<const double>(bp.u.data(),
                                                                               static_cast<std::size_t>(d))).cdf;
        acc += bp.upper ? std::abs(C - bp.u[static_cast<std::size_t>(bp.axis)]) : C;
    }
    return acc;
}

double copula_anchor_penalty(const FittedModel& model, std::span<const double> d1_rowmajor,
                             std::span<const double> d5_rowmajor) {
    if (d5_rowmajor.empty()) throw std::invalid_argument("copula_anchor_penalty: empty observation set");
    const int d = model.dim;
    const std::size_t n5 = d5_rowmajor.size() / static_cast<std::size_t>(d);
    std::vector<double> cdf(n5), target(n5);
    for (std::size_t i = 0; i < n5; ++i) {
        const std::span<const double> xi(d5_rowmajor.data() + i * static_cast<std::size_t>(d),
                                         static_cast<std::size_t>(d));
        cdf[i] = joint_cdf(model, xi);
        target[i] = empirical_cdf(d1_rowmajor, d, xi);
    }
    return anchor_penalty_value(cdf, target);
}

}  // namespace copulafit
