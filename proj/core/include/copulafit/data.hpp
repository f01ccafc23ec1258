#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace copulafit {

// Column-oriented dataset with per-column min-max bounds and a train/test split.
struct Dataset {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> cols;  // raw values, column-major
    std::vector<double> norm_min, norm_max;
    std::vector<std::size_t> train_idx, test_idx;

    std::size_t rows() const { return cols.empty() ? 0 : cols[0].size(); }
    int dim() const { return static_cast<int>(cols.size()); }
    bool normalized_ready() const { return !norm_min.empty(); }

    double normalized(int col, std::size_t row) const {
        const auto c = static_cast<std::size_t>(col);
        return (cols[c][row] - norm_min[c]) / (norm_max[c] - norm_min[c]);
    }

    // Normalized training rows, row-major (dim-stride).
    std::vector<double> train_matrix() const;
    std::vector<double> test_matrix() const;
    std::vector<double> train_column(int col) const;
};

// Parses a comma-separated file with a header row. `columns` selects and orders
// the columns; empty means "all, in file order". Rejects ragged rows and
// non-numeric cells with row/column diagnostics.
Dataset load_csv(const std::string& path, const std::vector<std::string>& columns = {});

// Builds a Dataset directly from row-major points (synthetic pipelines).
Dataset dataset_from_rows(const std::vector<std::string>& columns,
                          const std::vector<double>& rows_rowmajor);

// Computes per-column min-max bounds on the full data, then shuffles rows by
// seed and splits train/test with floor(n * train_frac) training rows.
void normalize_split(Dataset& ds, double train_frac, std::uint64_t seed);

// Built-in synthetic densities: a shifted sine bump over a box, normalized to
// integrate to 1. Identified by formula ids "eq35" (2-D) and "eq36" (3-D).
struct SyntheticSpec {
    std::string id;       // "eq35" or "eq36"
    int dim = 2;
    double k = 5.0;       // y frequency
    double l = 0.0;       // z frequency (3-D only)
    double lo[3] = {0, 0, 0};
    double hi[3] = {3, 2, 1};
    double norm_const = 0;  // recomputed numerically on construction

    double density_raw(const double* x) const;  // sin(...)+1, unnormalized
    double density(const double* x) const { return density_raw(x) / norm_const; }
};

// z_max applies to the 3-D formula only (its z-domain is configurable).
SyntheticSpec make_synthetic_spec(const std::string& formula, double z_max = 1.0);

// Rejection sampling under the flat envelope max f = 2 / norm_const; returns
// exactly n accepted points, row-major. attempts_out, when given, receives the
// number of proposals drawn (for acceptance-rate checks).
std::vector<double> sample_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed,
                                     std::size_t* attempts_out = nullptr);

// Ground-truth tables built by composite Simpson: marginal CDFs (with inverses
// by bisection), and the true copula C and its density c on a `resolution`-point
// per-axis lattice over the unit cube (endpoints included).
struct OracleTables {
    SyntheticSpec spec;
    int dim = 0;
    int resolution = 0;
    int marginal_resolution = 0;
    std::vector<std::vector<double>> marginal_cdf;      // per axis, uniform raw-coordinate grid
    std::vector<std::vector<double>> marginal_density;  // same grid
    std::vector<double> grid_u;                         // per-axis lattice coordinates in [0,1]
    std::vector<double> copula_cdf;                     // resolution^dim, row-major (axis 0 fastest)
    std::vector<double> copula_density;                 // same layout

    double marginal_cdf_at(int axis, double raw) const;      // interpolated
    double marginal_density_at(int axis, double raw) const;  // interpolated
    double marginal_inverse(int axis, double u) const;       // bisection + linear interp
    double copula_cdf_point(const double* u) const;          // recomputed from the definition
    double copula_density_point(const double* u) const;
    std::size_t table_index(const int* idx) const;
};

OracleTables true_marginals_and_copula(const SyntheticSpec& spec, int resolution);

}  // namespace copulafit
