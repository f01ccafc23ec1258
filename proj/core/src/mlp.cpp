#include "copulafit/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "copulafit/rng.hpp"

namespace copulafit {

void MlpParams::compute_offsets() {
    if (layer_sizes.size() < 2) throw std::invalid_argument("mlp: need at least input and output layers");
    for (int s : layer_sizes) {
        if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be positive");
    }
    if (layer_sizes.back() != 1) throw std::invalid_argument("mlp: output layer must have width 1");
    offsets_.clear();
    std::size_t off = 0;
    for (int l = 0; l < layer_count(); ++l) {
        const std::size_t in = static_cast<std::size_t>(layer_sizes[static_cast<std::size_t>(l)]);
        const std::size_t out = static_cast<std::size_t>(layer_sizes[static_cast<std::size_t>(l) + 1]);
        offsets_.push_back(off);
        off += in * out;
        offsets_.push_back(off);
        off += out;
    }
    theta.resize(off, 0.0);
}

bool MlpParams::is_weight(std::size_t i) const {
    for (int l = 0; l < layer_count(); ++l) {
        if (i >= weight_offset(l) && i < bias_offset(l)) return true;
    }
    return false;
}

MlpParams make_mlp(std::vector<int> layer_sizes) {
    MlpParams p;
    p.layer_sizes = std::move(layer_sizes);
    p.compute_offsets();
    return p;
}

MlpParams init_params(std::vector<int> layer_sizes, std::uint64_t seed) {
    MlpParams p = make_mlp(std::move(layer_sizes));
    Rng rng(mix_seed(seed, 0x6d6c70)); // "mlp"
    for (int l = 0; l < p.layer_count(); ++l) {
        const int fan_in = p.layer_sizes[static_cast<std::size_t>(l)];
        const int fan_out = p.layer_sizes[static_cast<std::size_t>(l) + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        double* w = p.weights(l);
        for (int i = 0; i < fan_in * fan_out; ++i) w[i] = rng.uniform(-bound, bound);
        // biases stay zero
    }
    return p;
}

namespace {

struct Scratch {
    std::vector<Jet> a, b;
    std::array<double, kMaxVars + 2> g;
};

Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

}  // namespace

Jet forward_eval(const MlpParams& net, std::span<const Jet> inputs) {
    if (static_cast<int>(inputs.size()) != net.input_width()) {
        throw std::invalid_argument("forward_eval: input width mismatch");
    }
    const int dim = inputs[0].dim;
    for (const Jet& j : inputs) {
        if (j.dim != dim) throw std::invalid_argument("forward_eval: mixed jet universes");
    }
    Scratch& s = scratch();
    s.a.assign(inputs.begin(), inputs.end());
    const int ncoef = 1 << dim;
    for (int l = 0; l < net.layer_count(); ++l) {
        const int in = net.layer_sizes[static_cast<std::size_t>(l)];
        const int out = net.layer_sizes[static_cast<std::size_t>(l) + 1];
        const double* W = net.weights(l);
        const double* B = net.biases(l);
        const Activation act = net.activation(l);
        s.b.assign(static_cast<std::size_t>(out), Jet{});
        for (int r = 0; r < out; ++r) {
            Jet z;
            z.dim = dim;
            z.c[0] = B[r];
            const double* wrow = W + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
            for (int i = 0; i < in; ++i) {
                const double w = wrow[i];
                const Jet& h = s.a[static_cast<std::size_t>(i)];
                for (int m = 0; m < ncoef; ++m) z.c[m] += w * h.c[m];
            }
            activation_derivs(act, z.c[0], dim, std::span<double>(s.g.data(), s.g.size()));
            s.b[static_cast<std::size_t>(r)] = jet_unary(z, std::span<const double>(s.g.data(), s.g.size()));
        }
        std::swap(s.a, s.b);
    }
    return s.a[0];
}

double forward_value(const MlpParams& net, std::span<const double> inputs) {
    thread_local std::vector<Jet> jets;
    jets.clear();
    for (double v : inputs) jets.push_back(jet_const(v, 0));
    return forward_eval(net, jets).value();
}

}  // namespace copulafit
