#include "copulafit/jet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace copulafit {

void activation_derivs(Activation kind, double x, int order, std::span<double> out) {
    if (order < 0 || order > kMaxVars + 1) {
        throw std::invalid_argument("activation_derivs: unsupported order " + std::to_string(order));
    }
    if (out.size() < static_cast<std::size_t>(order) + 1) {
        throw std::invalid_argument("activation_derivs: output span too short");
    }
    if (!std::isfinite(x)) {
        throw std::invalid_argument("activation_derivs: non-finite evaluation point");
    }
    if (kind == Activation::Tanh) {
        const double t = std::tanh(x);
        const double s = 1.0 - t * t;  // sech^2
        out[0] = t;
        if (order >= 1) out[1] = s;
        if (order >= 2) out[2] = -2.0 * t * s;
        if (order >= 3) out[3] = -2.0 * s * (1.0 - 3.0 * t * t);
        if (order >= 4) out[4] = 8.0 * t * s * (2.0 - 3.0 * t * t);
    } else {
        const double s = 1.0 / (1.0 + std::exp(-x));
        const double d1 = s * (1.0 - s);
        out[0] = s;
        if (order >= 1) out[1] = d1;
        if (order >= 2) out[2] = d1 * (1.0 - 2.0 * s);
        if (order >= 3) out[3] = d1 * (1.0 - 6.0 * s + 6.0 * s * s);
        if (order >= 4) out[4] = d1 * (1.0 - 14.0 * s + 36.0 * s * s - 24.0 * s * s * s);
    }
}

bool Jet::finite() const {
    for (int m = 0; m < size(); ++m) {
        if (!std::isfinite(c[m])) return false;
    }
    return true;
}

static void check_dim(int dim) {
    if (dim < 0 || dim > kMaxVars) {
        throw std::invalid_argument("jet: dimension out of range [0, " + std::to_string(kMaxVars) + "]");
    }
}

Jet jet_const(double value, int dim) {
    check_dim(dim);
    Jet j;
    j.dim = dim;
    j.c[0] = value;
    return j;
}

Jet jet_var(int index, double value, int dim) {
    check_dim(dim);
    if (index < 0 || index >= dim) {
        throw std::invalid_argument("jet_var: index out of range");
    }
    Jet j;
    j.dim = dim;
    j.c[0] = value;
    j.c[std::size_t{1} << index] = 1.0;
    return j;
}

static void check_same_universe(const Jet& a, const Jet& b) {
    if (a.dim != b.dim) throw std::invalid_argument("jet: universe mismatch");
}

Jet jet_add(const Jet& a, const Jet& b) {
    check_same_universe(a, b);
    Jet r = a;
    for (int m = 0; m < a.size(); ++m) r.c[m] += b.c[m];
    return r;
}

Jet jet_sub(const Jet& a, const Jet& b) {
    check_same_universe(a, b);
    Jet r = a;
    for (int m = 0; m < a.size(); ++m) r.c[m] -= b.c[m];
    return r;
}

Jet jet_scale(const Jet& a, double s) {
    Jet r = a;
    for (int m = 0; m < a.size(); ++m) r.c[m] *= s;
    return r;
}

Jet jet_mul(const Jet& a, const Jet& b) {
    check_same_universe(a, b);
    Jet r;
    r.dim = a.dim;
    for (int s = 0; s < a.size(); ++s) {
        double acc = 0.0;
        int sub = s;
        for (;;) {
            acc += a.c[sub] * b.c[s ^ sub];
            if (sub == 0) break;
            sub = (sub - 1) & s;
        }
        r.c[s] = acc;
    }
    return r;
}

const PartitionTable& partition_table() {
    static const PartitionTable table = [] {
        PartitionTable t;
        // Recursive enumeration: the block containing the lowest element of S,
        // paired with every partition of the remainder.
        struct Builder {
            PartitionTable& t;
            void build(int mask) {
                auto& out = t.partitions[static_cast<std::size_t>(mask)];
                if (mask == 0) {
                    out.push_back({{}, 0});
                    return;
                }
                const int low = mask & -mask;
                const int rest = mask ^ low;
                // Iterate subsets of rest; block = low | subset.
                int sub = rest;
                for (;;) {
                    const int block = low | sub;
                    const int remainder = mask ^ block;
                    for (const auto& tail : t.partitions[static_cast<std::size_t>(remainder)]) {
                        PartitionTable::Partition p = tail;
                        p.blocks[p.block_count++] = static_cast<std::uint8_t>(block);
                        out.push_back(p);
                    }
                    if (sub == 0) break;
                    sub = (sub - 1) & rest;
                }
            }
        } builder{t};
        for (int mask = 0; mask < kJetCap; ++mask) builder.build(mask);
        return t;
    }();
    return table;
}

Jet jet_unary(const Jet& a, std::span<const double> derivs) {
    if (derivs.size() < static_cast<std::size_t>(a.dim) + 1) {
        throw std::invalid_argument("jet_unary: need derivatives up to the jet order");
    }
    const PartitionTable& pt = partition_table();
    Jet r;
    r.dim = a.dim;
    r.c[0] = derivs[0];
    for (int s = 1; s < a.size(); ++s) {
        double acc = 0.0;
        for (const auto& p : pt.partitions[static_cast<std::size_t>(s)]) {
            double prod = derivs[p.block_count];
            for (int b = 0; b < p.block_count; ++b) prod *= a.c[p.blocks[static_cast<std::size_t>(b)]];
            acc += prod;
        }
        r.c[s] = acc;
    }
    return r;
}

}  // namespace copulafit
