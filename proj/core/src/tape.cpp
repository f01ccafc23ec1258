#include "copulafit/tape.hpp"

#include <stdexcept>

namespace copulafit {

void Tape::forward(const MlpParams& net, std::span<const Jet> inputs) {
    if (static_cast<int>(inputs.size()) != net.input_width()) {
        throw std::invalid_argument("tape: input width mismatch");
    }
    const int dim = inputs[0].dim;
    for (const Jet& j : inputs) {
        if (j.dim != dim) throw std::invalid_argument("tape: mixed jet universes");
    }
    net_ = &net;
    dim_ = dim;
    inputs_.assign(inputs.begin(), inputs.end());
    const int L = net.layer_count();
    pre_.resize(static_cast<std::size_t>(L));
    act_.resize(static_cast<std::size_t>(L));
    gtab_.resize(static_cast<std::size_t>(L));
    const int ncoef = 1 << dim;
    const std::vector<Jet>* prev = &inputs_;
    for (int l = 0; l < L; ++l) {
        const int in = net.layer_sizes[static_cast<std::size_t>(l)];
        const int out = net.layer_sizes[static_cast<std::size_t>(l) + 1];
        const double* W = net.weights(l);
        const double* B = net.biases(l);
        const Activation actk = net.activation(l);
        auto& z = pre_[static_cast<std::size_t>(l)];
        auto& a = act_[static_cast<std::size_t>(l)];
        auto& g = gtab_[static_cast<std::size_t>(l)];
        z.assign(static_cast<std::size_t>(out), Jet{});
        a.assign(static_cast<std::size_t>(out), Jet{});
        g.assign(static_cast<std::size_t>(out), {});
        for (int r = 0; r < out; ++r) {
            Jet& zr = z[static_cast<std::size_t>(r)];
            zr.dim = dim;
            zr.c[0] = B[r];
            const double* wrow = W + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
            for (int i = 0; i < in; ++i) {
                const double w = wrow[i];
                const Jet& h = (*prev)[static_cast<std::size_t>(i)];
                for (int m = 0; m < ncoef; ++m) zr.c[m] += w * h.c[m];
            }
            auto& gr = g[static_cast<std::size_t>(r)];
            activation_derivs(actk, zr.c[0], dim + 1, std::span<double>(gr.data(), gr.size()));
            a[static_cast<std::size_t>(r)] = jet_unary(zr, std::span<const double>(gr.data(), gr.size()));
        }
        prev = &a;
    }
}

const Jet& Tape::output() const {
    if (!recorded()) throw std::logic_error("tape: no forward pass recorded");
    return act_.back()[0];
}

Jet Tape::replay() const {
    if (!recorded()) throw std::logic_error("tape: no forward pass recorded");
    return forward_eval(*net_, inputs_);
}

void Tape::backward(int coeff_mask, std::span<double> grad) const {
    if (!recorded()) throw std::logic_error("tape: no forward pass recorded");
    if (coeff_mask < 0 || coeff_mask >= (1 << dim_)) {
        throw std::invalid_argument("tape: coefficient selector outside the jet universe");
    }
    Jet seed;
    seed.dim = dim_;
    seed.c[static_cast<std::size_t>(coeff_mask)] = 1.0;
    backward_weighted(seed, grad);
}

void Tape::backward_weighted(const Jet& seed, std::span<double> grad) const {
    if (!recorded()) throw std::logic_error("tape: no forward pass recorded");
    if (seed.dim != dim_) throw std::invalid_argument("tape: seed universe mismatch");
    if (grad.size() != net_->param_count()) throw std::invalid_argument("tape: gradient size mismatch");
    const PartitionTable& pt = partition_table();
    const int ncoef = 1 << dim_;
    const int L = net_->layer_count();

    adj_a_.assign(1, seed);  // adjoint of the activated outputs of the current layer
    for (int l = L - 1; l >= 0; --l) {
        const int in = net_->layer_sizes[static_cast<std::size_t>(l)];
        const int out = net_->layer_sizes[static_cast<std::size_t>(l) + 1];
        const double* W = net_->weights(l);
        const auto& z = pre_[static_cast<std::size_t>(l)];
        const auto& g = gtab_[static_cast<std::size_t>(l)];
        const std::vector<Jet>& below = l == 0 ? inputs_ : act_[static_cast<std::size_t>(l) - 1];

        // activation transpose: adjoint of a -> adjoint of z
        adj_z_.assign(static_cast<std::size_t>(out), Jet{});
        for (int r = 0; r < out; ++r) {
            const Jet& abar = adj_a_[static_cast<std::size_t>(r)];
            const Jet& zr = z[static_cast<std::size_t>(r)];
            const auto& gr = g[static_cast<std::size_t>(r)];
            Jet& zbar = adj_z_[static_cast<std::size_t>(r)];
            zbar.dim = dim_;
            zbar.c[0] += abar.c[0] * gr[1];
            for (int s = 1; s < ncoef; ++s) {
                const double as = abar.c[static_cast<std::size_t>(s)];
                if (as == 0.0) continue;
                for (const auto& p : pt.partitions[static_cast<std::size_t>(s)]) {
                    double full = 1.0;
                    for (int b = 0; b < p.block_count; ++b) full *= zr.c[p.blocks[static_cast<std::size_t>(b)]];
                    // d a_s / d z_0: every g-order steps up by one
                    zbar.c[0] += as * gr[static_cast<std::size_t>(p.block_count) + 1] * full;
                    // d a_s / d z_B for each block B
                    for (int b = 0; b < p.block_count; ++b) {
                        double others = 1.0;
                        for (int b2 = 0; b2 < p.block_count; ++b2) {
                            if (b2 != b) others *= zr.c[p.blocks[static_cast<std::size_t>(b2)]];
                        }
                        zbar.c[p.blocks[static_cast<std::size_t>(b)]] +=
                            as * gr[p.block_count] * others;
                    }
                }
            }
        }

        // linear transpose: z = W a_below + b
        double* gW = grad.data() + net_->weight_offset(l);
        double* gB = grad.data() + net_->bias_offset(l);
        adj_prev_.assign(static_cast<std::size_t>(in), Jet{});
        for (int i = 0; i < in; ++i) adj_prev_[static_cast<std::size_t>(i)].dim = dim_;
        for (int r = 0; r < out; ++r) {
            const Jet& zbar = adj_z_[static_cast<std::size_t>(r)];
            gB[r] += zbar.c[0];
            const double* wrow = W + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
            double* gwrow = gW + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
            for (int i = 0; i < in; ++i) {
                const Jet& h = below[static_cast<std::size_t>(i)];
                Jet& hbar = adj_prev_[static_cast<std::size_t>(i)];
                double acc = 0.0;
                const double w = wrow[i];
                for (int m = 0; m < ncoef; ++m) {
                    acc += h.c[m] * zbar.c[m];
                    hbar.c[m] += w * zbar.c[m];
                }
                gwrow[i] += acc;
            }
        }
        std::swap(adj_a_, adj_prev_);
    }
}

}  // namespace copulafit
