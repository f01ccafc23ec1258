#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace copulafit {

// Square-free mixed-partial jets: a value plus one coefficient per subset of the
// active input variables, each variable differentiated at most once. coeffs[0]
// is the function value; coeffs[mask] is the mixed partial over the variables in
// mask. 2^d coefficients suffice because the copula density is exactly the
// full-set mixed partial, so nothing of higher order per variable is ever needed.
//
// The subset algebra below (Leibniz convolution, partition-table composition) is
// generic in d. Storage is capped at kMaxVars because the activation-derivative
// tables stop at order kMaxVars + 1; raising the cap means bumping the constant
// and extending activation_derivs.
inline constexpr int kMaxVars = 3;
inline constexpr int kJetCap = 1 << kMaxVars;

enum class Activation : std::uint8_t { Tanh, Sigmoid };

// Closed-form derivatives g^(0..order)(x) of tanh or the logistic sigmoid.
// order <= 4 (order d is needed to push a d-variable jet forward; order d+1 to
// pull parameter adjoints back through the activation).
void activation_derivs(Activation kind, double x, int order, std::span<double> out);

struct Jet {
    int dim = 0;
    std::array<double, kJetCap> c{};

    int size() const { return 1 << dim; }
    double value() const { return c[0]; }
    // Full-set coefficient: the mixed partial over every active variable.
    double full() const { return c[size() - 1]; }
    bool finite() const;
};

Jet jet_const(double value, int dim);

// Seed jet for input variable `index`: value plus unit first derivative.
Jet jet_var(int index, double value, int dim);

Jet jet_add(const Jet& a, const Jet& b);
Jet jet_sub(const Jet& a, const Jet& b);
Jet jet_scale(const Jet& a, double s);

// Leibniz product over square-free multi-indices: (ab)_S = sum_{A subset S} a_A b_{S\A}.
Jet jet_mul(const Jet& a, const Jet& b);

// Composition g(a) by Faa di Bruno over set partitions; derivs[k] = g^(k)(a.value()),
// k = 0..a.dim (extra entries ignored).
Jet jet_unary(const Jet& a, std::span<const double> derivs);

// Set-partition tables per subset mask, shared by jet_unary and the tape's
// reverse pass. partitions[mask] lists every partition of mask; a partition is a
// flat list of block masks. For |S| = 0..3 the partition counts are 1, 1, 2, 5.
struct PartitionTable {
    struct Partition {
        std::array<std::uint8_t, kMaxVars> blocks;
        std::uint8_t block_count;
    };
    std::array<std::vector<Partition>, kJetCap> partitions;
};

const PartitionTable& partition_table();

}  // namespace copulafit
