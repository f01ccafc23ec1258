#pragma once

#include <span>
#include <vector>

#include "copulafit/mlp.hpp"

namespace copulafit {

// Records one jet-valued forward pass through an MLP so that the gradient of any
// output coefficient with respect to every parameter can be pulled back in a
// single reverse sweep. A tape is confined to one thread; evaluation over many
// samples uses independent tapes.
//
// Per layer the tape keeps the pre-activation jets, the activated jets and the
// activation-derivative table per neuron (orders 0..dim+1 — the reverse pass
// through an activation needs one order more than the forward pass).
class Tape {
public:
    // Runs and records a forward pass. Inputs must share one jet universe.
    void forward(const MlpParams& net, std::span<const Jet> inputs);

    bool recorded() const { return net_ != nullptr; }
    int dim() const { return dim_; }
    const Jet& output() const;

    // Recomputes the forward pass from the recorded inputs and parameters;
    // bit-identical to output() by construction.
    Jet replay() const;

    // Accumulates d(output.c[coeff_mask]) / d(theta_k) into grad (same flat
    // layout as MlpParams::theta). grad must be pre-sized and is added to, not
    // overwritten.
    void backward(int coeff_mask, std::span<double> grad) const;

    // General form: seed[m] = dL/d(output.c[m]); accumulates dL/d(theta) into grad.
    void backward_weighted(const Jet& seed, std::span<double> grad) const;

private:
    const MlpParams* net_ = nullptr;
    int dim_ = 0;
    std::vector<Jet> inputs_;
    std::vector<std::vector<Jet>> pre_;   // z per layer
    std::vector<std::vector<Jet>> act_;   // activation(z) per layer
    std::vector<std::vector<std::array<double, kMaxVars + 2>>> gtab_;

    // reverse-sweep scratch, kept to avoid per-call allocation
    mutable std::vector<Jet> adj_a_, adj_z_, adj_prev_;
};

}  // namespace copulafit
