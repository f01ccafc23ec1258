#include "copulafit/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "copulafit/quadrature.hpp"
#include "copulafit/rng.hpp"
#include "copulafit/util.hpp"

namespace copulafit {

std::vector<double> Dataset::train_matrix() const {
    std::vector<double> out;
    out.reserve(train_idx.size() * static_cast<std::size_t>(dim()));
    for (std::size_t r : train_idx) {
        for (int c = 0; c < dim(); ++c) out.push_back(normalized(c, r));
    }
    return out;
}

std::vector<double> Dataset::test_matrix() const {
    std::vector<double> out;
    out.reserve(test_idx.size() * static_cast<std::size_t>(dim()));
    for (std::size_t r : test_idx) {
        for (int c = 0; c < dim(); ++c) out.push_back(normalized(c, r));
    }
    return out;
}

std::vector<double> Dataset::train_column(int col) const {
    std::vector<double> out;
    out.reserve(train_idx.size());
    for (std::size_t r : train_idx) out.push_back(normalized(col, r));
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open data file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw io_error(path + ": empty file");
    const std::vector<std::string> header = split_line(line);

    std::vector<std::size_t> pick;
    std::vector<std::string> names = columns.empty() ? header : columns;
    for (const auto& name : names) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw io_error(path + ": missing column '" + name + "'");
        pick.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    Dataset ds;
    ds.columns = names;
    ds.cols.resize(names.size());
    std::size_t row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw io_error(path + ": row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(header.size()));
        }
        for (std::size_t k = 0; k < pick.size(); ++k) {
            const std::string& cell = cells[pick[k]];
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size() || !std::isfinite(v)) throw std::invalid_argument(cell);
                ds.cols[k].push_back(v);
            } catch (const std::exception&) {
                throw io_error(path + ": row " + std::to_string(row_no) + ", column " +
                               std::to_string(pick[k] + 1) + ": not a number ('" + cell + "')");
            }
        }
    }
    if (ds.rows() == 0) throw io_error(path + ": no data rows");
    return ds;
}

Dataset dataset_from_rows(const std::vector<std::string>& columns,
                          const std::vector<double>& rows_rowmajor) {
    const std::size_t d = columns.size();
    if (d == 0 || rows_rowmajor.size() % d != 0) {
        throw std::invalid_argument("dataset_from_rows: size not a multiple of the column count");
    }
    Dataset ds;
    ds.columns = columns;
    ds.cols.resize(d);
    const std::size_t n = rows_rowmajor.size() / d;
    for (std::size_t c = 0; c < d; ++c) {
        ds.cols[c].reserve(n);
        for (std::size_t r = 0; r < n; ++r) ds.cols[c].push_back(rows_rowmajor[r * d + c]);
    }
    return ds;
}

void normalize_split(Dataset& ds, double train_frac, std::uint64_t seed) {
    if (ds.rows() == 0) throw std::invalid_argument("normalize_split: empty dataset");
    if (!(train_frac > 0.0 && train_frac <= 1.0)) {
        throw std::invalid_argument("normalize_split: train_frac must be in (0, 1]");
    }
    ds.norm_min.clear();
    ds.norm_max.clear();
    for (std::size_t c = 0; c < ds.cols.size(); ++c) {
        const auto [mn, mx] = std::minmax_element(ds.cols[c].begin(), ds.cols[c].end());
        if (*mn == *mx) {
            throw numeric_error("normalize_split: column '" + ds.columns[c] + "' is constant");
        }
        ds.norm_min.push_back(*mn);
        ds.norm_max.push_back(*mx);
    }
    const std::size_t n = ds.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(seed, 0x73706c69)); // "spli"
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    const std::size_t n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_frac));
    ds.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
}

double SyntheticSpec::density_raw(const double* x) const {
    double arg = x[0] + k * x[1];
    if (dim == 3) arg += l * x[2];
    return std::sin(arg) + 1.0;
}

SyntheticSpec make_synthetic_spec(const std::string& formula, double z_max) {
    SyntheticSpec s;
    s.id = formula;
    if (formula == "eq35") {
        s.dim = 2;
        s.k = 5.0;
        s.l = 0.0;
        s.hi[0] = 3.0;
        s.hi[1] = 2.0;
        s.hi[2] = 0.0;
        s.norm_const = simpson_2d([&](double x, double y) {
            const double p[2] = {x, y};
            return s.density_raw(p);
        }, s.lo[0], s.hi[0], s.lo[1], s.hi[1], 200);
    } else if (formula == "eq36") {
        if (!(z_max > 0.0)) throw std::invalid_argument("eq36: z_max must be positive");
        s.dim = 3;
        s.k = 2.0;
        s.l = 3.0;
        s.hi[0] = 3.0;
        s.hi[1] = 2.0;
        s.hi[2] = z_max;
        s.norm_const = simpson_3d([&](double x, double y, double z) {
            const double p[3] = {x, y, z};
            return s.density_raw(p);
        }, s.lo[0], s.hi[0], s.lo[1], s.hi[1], s.lo[2], s.hi[2], 120);
    } else {
        throw std::invalid_argument("unknown synthetic formula id '" + formula + "' (expected eq35 or eq36)");
    }
    if (!(s.norm_const > 0.0)) throw numeric_error("synthetic spec: normalization integral is not positive");
    return s;
}

std::vector<double> sample_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed,
                                     std::size_t* attempts_out) {
    Rng rng(mix_seed(seed, 0x67656e)); // "gen"
    std::vector<double> out;
    out.reserve(n * static_cast<std::size_t>(spec.dim));
    double pt[3] = {0, 0, 0};
    std::size_t attempts = 0;
    while (out.size() < n * static_cast<std::size_t>(spec.dim)) {
        for (int i = 0; i < spec.dim; ++i) pt[i] = rng.uniform(spec.lo[i], spec.hi[i]);
        const double u = rng.uniform();
        ++attempts;
        // envelope: density_raw <= 2 everywhere, so accept with prob density_raw / 2
        if (u * 2.0 < spec.density_raw(pt)) {
            for (int i = 0; i < spec.dim; ++i) out.push_back(pt[i]);
        }
    }
    if (attempts_out != nullptr) *attempts_out = attempts;
    return out;
}

namespace {

// Marginal density of the synthetic spec along one axis, by Simpson over the
// remaining axes.
double synthetic_marginal_density(const SyntheticSpec& spec, int axis, double t) {
    const int cells = spec.dim == 3 ? 60 : 100;
    if (spec.dim == 2) {
        const int other = 1 - axis;
        return simpson([&](double o) {
            double p[2];
            p[axis] = t;
            p[other] = o;
            return spec.density(p);
        }, spec.lo[other], spec.hi[other], cells);
    }
    const int o1 = axis == 0 ? 1 : 0;
    const int o2 = axis == 2 ? 1 : 2;
    return simpson_2d([&](double a, double b) {
        double p[3];
        p[axis] = t;
        p[o1] = a;
        p[o2] = b;
        return spec.density(p);
    }, spec.lo[o1], spec.hi[o1], spec.lo[o2], spec.hi[o2], cells);
}

// Joint CDF of the spec at x (integral over [lo, x]), cells scaled to the
// sub-box so accuracy is uniform.
double synthetic_joint_cdf(const SyntheticSpec& spec, const double* x) {
    const int base = spec.dim == 3 ? 30 : 60;
    int cells[3];
    for (int i = 0; i < spec.dim; ++i) {
        const double frac = (x[i] - spec.lo[i]) / (spec.hi[i] - spec.lo[i]);
        if (frac <= 0.0) return 0.0;
        cells[i] = std::max(4, static_cast<int>(std::ceil(base * frac)));
    }
    if (spec.dim == 2) {
        return simpson_2d([&](double a, double b) {
            const double p[2] = {a, b};
            return spec.density(p);
        }, spec.lo[0], x[0], spec.lo[1], x[1], std::max(cells[0], cells[1]));
    }
    return simpson_3d([&](double a, double b, double c) {
        const double p[3] = {a, b, c};
        return spec.density(p);
    }, spec.lo[0], x[0], spec.lo[1], x[1], spec.lo[2], x[2],
       std::max({cells[0], cells[1], cells[2]}));
}

}  // namespace

std::size_t OracleTables::table_index(const int* idx) const {
    std::size_t out = 0;
    for (int a = dim - 1; a >= 0; --a) out = out * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(idx[a]);
    return out;
}

namespace {

double interp_uniform_table(const std::vector<double>& tab, double lo, double hi, double raw,
                            double below, double above) {
    const int n = static_cast<int>(tab.size());
    const double t = (raw - lo) / (hi - lo) * (n - 1);
    if (t <= 0.0) return below;
    if (t >= n - 1) return above;
    const int j = static_cast<int>(t);
    const double w = t - j;
    return tab[static_cast<std::size_t>(j)] * (1.0 - w) + tab[static_cast<std::size_t>(j) + 1] * w;
}

}  // namespace

double OracleTables::marginal_cdf_at(int axis, double raw) const {
    return interp_uniform_table(marginal_cdf[static_cast<std::size_t>(axis)], spec.lo[axis], spec.hi[axis],
                                raw, 0.0, 1.0);
}

double OracleTables::marginal_density_at(int axis, double raw) const {
    const auto& tab = marginal_density[static_cast<std::size_t>(axis)];
    return interp_uniform_table(tab, spec.lo[axis], spec.hi[axis], raw, tab.front(), tab.back());
}

double OracleTables::marginal_inverse(int axis, double u) const {
    const auto& tab = marginal_cdf[static_cast<std::size_t>(axis)];
    const int n = static_cast<int>(tab.size());
    if (u <= 0.0) return spec.lo[axis];
    if (u >= 1.0) return spec.hi[axis];
    // binary search for the bracketing cell of the monotone table
    int a = 0, b = n - 1;
    while (b - a > 1) {
        const int m = (a + b) / 2;
        if (tab[static_cast<std::size_t>(m)] < u) {
            a = m;
        } else {
            b = m;
        }
    }
    const double fa = tab[static_cast<std::size_t>(a)], fb = tab[static_cast<std::size_t>(b)];
    const double w = fb > fa ? (u - fa) / (fb - fa) : 0.5;
    const double h = (spec.hi[axis] - spec.lo[axis]) / (n - 1);
    return spec.lo[axis] + (a + w) * h;
}

OracleTables true_marginals_and_copula(const SyntheticSpec& spec, int resolution) {
    if (resolution < 3) throw std::invalid_argument("oracle: resolution must be >= 3 per axis");
    OracleTables t;
    t.spec = spec;
    t.dim = spec.dim;
    t.resolution = resolution;
    t.marginal_resolution = 2001;

    // marginal CDF tables by per-cell Simpson over tabulated densities
    t.marginal_cdf.resize(static_cast<std::size_t>(spec.dim));
    t.marginal_density.resize(static_cast<std::size_t>(spec.dim));
    const int mn = t.marginal_resolution;
    for (int axis = 0; axis < spec.dim; ++axis) {
        const double h = (spec.hi[axis] - spec.lo[axis]) / (mn - 1);
        auto& dens = t.marginal_density[static_cast<std::size_t>(axis)];
        dens.resize(static_cast<std::size_t>(mn));
        std::vector<double> mid(static_cast<std::size_t>(mn) - 1);
        for (int j = 0; j < mn; ++j) {
            dens[static_cast<std::size_t>(j)] = synthetic_marginal_density(spec, axis, spec.lo[axis] + j * h);
        }
        for (int j = 0; j + 1 < mn; ++j) {
            mid[static_cast<std::size_t>(j)] = synthetic_marginal_density(spec, axis, spec.lo[axis] + (j + 0.5) * h);
        }
        auto& cdf = t.marginal_cdf[static_cast<std::size_t>(axis)];
        cdf.assign(static_cast<std::size_t>(mn), 0.0);
        for (int j = 0; j + 1 < mn; ++j) {
            cdf[static_cast<std::size_t>(j) + 1] =
                cdf[static_cast<std::size_t>(j)] +
                h / 6.0 * (dens[static_cast<std::size_t>(j)] + 4.0 * mid[static_cast<std::size_t>(j)] +
                           dens[static_cast<std::size_t>(j) + 1]);
        }
        const double total = cdf.back();
        if (!(total > 0.0)) throw numeric_error("oracle: degenerate marginal");
        for (double& v : cdf) v /= total;
    }

    // copula tables on the u-lattice
    t.grid_u.resize(static_cast<std::size_t>(resolution));
    for (int j = 0; j < resolution; ++j) {
        t.grid_u[static_cast<std::size_t>(j)] = static_cast<double>(j) / (resolution - 1);
    }
    std::size_t total_nodes = 1;
    for (int a = 0; a < spec.dim; ++a) total_nodes *= static_cast<std::size_t>(resolution);
    t.copula_cdf.assign(total_nodes, 0.0);
    t.copula_density.assign(total_nodes, 0.0);

    std::vector<std::vector<double>> inv(static_cast<std::size_t>(spec.dim),
                                         std::vector<double>(static_cast<std::size_t>(resolution)));
    for (int a = 0; a < spec.dim; ++a) {
        for (int j = 0; j < resolution; ++j) {
            inv[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] =
                t.marginal_inverse(a, t.grid_u[static_cast<std::size_t>(j)]);
        }
    }

    int idx[3] = {0, 0, 0};
    for (std::size_t flat = 0; flat < total_nodes; ++flat) {
        double x[3], u[3];
        bool on_lower = false;
        int ones = 0;
        int free_axis = -1;
        for (int a = 0; a < spec.dim; ++a) {
            u[a] = t.grid_u[static_cast<std::size_t>(idx[a])];
            x[a] = inv[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[a])];
            if (idx[a] == 0) on_lower = true;
            if (idx[a] == resolution - 1) {
                ++ones;
            } else {
                free_axis = a;
            }
        }
        double C;
        if (on_lower) {
            C = 0.0;  // a zero coordinate pins the copula to zero
        } else if (ones >= spec.dim - 1) {
            C = ones == spec.dim ? 1.0 : u[free_axis];  // uniform-marginal edge
        } else {
            C = synthetic_joint_cdf(spec, x);
        }
        t.copula_cdf[flat] = C;

        double dens_prod = 1.0;
        for (int a = 0; a < spec.dim; ++a) {
            dens_prod *= t.marginal_density_at(a, x[a]);
        }
        t.copula_density[flat] = dens_prod > 0.0 ? spec.density(x) / dens_prod : 0.0;

        for (int a = 0; a < spec.dim; ++a) {
            if (++idx[a] < resolution) break;
            idx[a] = 0;
        }
    }
    return t;
}

double OracleTables::copula_cdf_point(const double* u) const {
    double x[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        if (u[a] <= 0.0) return 0.0;
        x[a] = marginal_inverse(a, u[a]);
    }
    return synthetic_joint_cdf(spec, x);
}

double OracleTables::copula_density_point(const double* u) const {
    double x[3] = {0, 0, 0};
    double dens_prod = 1.0;
    for (int a = 0; a < dim; ++a) {
        x[a] = marginal_inverse(a, u[a]);
        dens_prod *= marginal_density_at(a, x[a]);
    }
    return dens_prod > 0.0 ? spec.density(x) / dens_prod : 0.0;
}

}  // namespace copulafit
