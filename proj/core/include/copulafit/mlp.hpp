#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "copulafit/jet.hpp"

namespace copulafit {

// Fully connected network with tanh hidden layers and a sigmoid output, the only
// architecture in this toolkit. Parameters live in one flat vector, layer-major:
// W0 (row-major out x in), b0, W1, b1, ... — so optimizer state and gradient
// vectors index the same way.
struct MlpParams {
    std::vector<int> layer_sizes;  // input width, hidden widths..., 1
    std::vector<double> theta;

    int input_width() const { return layer_sizes.front(); }
    int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }
    std::size_t param_count() const { return theta.size(); }

    std::size_t weight_offset(int layer) const { return offsets_[static_cast<std::size_t>(2 * layer)]; }
    std::size_t bias_offset(int layer) const { return offsets_[static_cast<std::size_t>(2 * layer + 1)]; }

    const double* weights(int layer) const { return theta.data() + weight_offset(layer); }
    const double* biases(int layer) const { return theta.data() + bias_offset(layer); }
    double* weights(int layer) { return theta.data() + weight_offset(layer); }
    double* biases(int layer) { return theta.data() + bias_offset(layer); }

    Activation activation(int layer) const {
        return layer == layer_count() - 1 ? Activation::Sigmoid : Activation::Tanh;
    }

    // True when flat index i addresses a weight (not a bias); L2 regularization
    // applies to weights only.
    bool is_weight(std::size_t i) const;

    void compute_offsets();

    std::vector<std::size_t> offsets_;  // alternating weight/bias offsets per layer
};

MlpParams make_mlp(std::vector<int> layer_sizes);

// Glorot-uniform weights in [-sqrt(6/(fan_in+fan_out)), +], zero biases;
// deterministic per seed.
MlpParams init_params(std::vector<int> layer_sizes, std::uint64_t seed);

// Jet-valued forward pass without recording anything; scratch buffers are
// thread-local, so this is safe to call concurrently.
Jet forward_eval(const MlpParams& net, std::span<const Jet> inputs);

// Scalar forward pass (universe of size 0); returns the network output.
double forward_value(const MlpParams& net, std::span<const double> inputs);

}  // namespace copulafit
