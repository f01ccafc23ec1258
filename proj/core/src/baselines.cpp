#include "copulafit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "copulafit/util.hpp"

namespace copulafit {

std::string family_name(CopulaFamily f) {
    switch (f) {
        case CopulaFamily::Gaussian: return "gaussian";
        case CopulaFamily::Frank: return "frank";
        case CopulaFamily::StudentT: return "student_t";
    }
    return "unknown";
}

CopulaFamily family_from_name(const std::string& name) {
    if (name == "gaussian") return CopulaFamily::Gaussian;
    if (name == "frank") return CopulaFamily::Frank;
    if (name == "student_t") return CopulaFamily::StudentT;
    throw std::invalid_argument("unknown copula family '" + name + "'");
}

nlohmann::json ParametricCopula::to_json() const {
    nlohmann::json params;
    switch (family) {
        case CopulaFamily::Gaussian: params = {{"rho", rho}}; break;
        case CopulaFamily::Frank: params = {{"theta", theta}}; break;
        case CopulaFamily::StudentT: params = {{"rho", rho}, {"nu", nu}}; break;
    }
    return nlohmann::json{{"format", "copulafit-model"},
                          {"version", 1},
                          {"kind", "parametric"},
                          {"family", family_name(family)},
                          {"params", params}};
}

ParametricCopula ParametricCopula::from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "parametric") throw io_error("not a parametric model document");
    ParametricCopula c;
    c.family = family_from_name(j.at("family").get<std::string>());
    const auto& p = j.at("params");
    switch (c.family) {
        case CopulaFamily::Gaussian: c.rho = p.at("rho").get<double>(); break;
        case CopulaFamily::Frank: c.theta = p.at("theta").get<double>(); break;
        case CopulaFamily::StudentT:
            c.rho = p.at("rho").get<double>();
            c.nu = p.at("nu").get<double>();
            break;
    }
    return c;
}

std::vector<double> pseudo_observations(std::span<const double> data_rowmajor, int dim) {
    if (dim < 1 || data_rowmajor.size() % static_cast<std::size_t>(dim) != 0) {
        throw std::invalid_argument("pseudo_observations: malformed data");
    }
    const std::size_t n = data_rowmajor.size() / static_cast<std::size_t>(dim);
    if (n < 2) throw std::invalid_argument("pseudo_observations: need at least two rows");
    std::vector<double> out(data_rowmajor.size());
    std::vector<std::size_t> order(n);
    for (int c = 0; c < dim; ++c) {
        auto value = [&](std::size_t r) { return data_rowmajor[r * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)]; };
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
        // average rank over tie runs; ranks are 1-based
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && value(order[j + 1]) == value(order[i])) ++j;
            const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
            for (std::size_t k = i; k <= j; ++k) {
                out[order[k] * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)] =
                    avg_rank / static_cast<double>(n + 1);
            }
            i = j + 1;
        }
    }
    return out;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

void check_interior(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
        throw std::invalid_argument("copula evaluation needs a point strictly inside the unit square");
    }
}

void check_params(const ParametricCopula& c) {
    switch (c.family) {
        case CopulaFamily::Gaussian:
            if (!(c.rho > -1.0 && c.rho < 1.0)) throw std::invalid_argument("gaussian: rho outside (-1,1)");
            break;
        case CopulaFamily::Frank:
            if (c.theta == 0.0 || !std::isfinite(c.theta)) throw std::invalid_argument("frank: theta must be nonzero");
            break;
        case CopulaFamily::StudentT:
            if (!(c.rho > -1.0 && c.rho < 1.0)) throw std::invalid_argument("student_t: rho outside (-1,1)");
            if (!(c.nu > 2.0)) throw std::invalid_argument("student_t: nu must exceed 2");
            break;
    }
}

double gaussian_density(double rho, double x, double y) {
    const double r2 = rho * rho;
    const double q = 1.0 - r2;
    return std::exp(-(r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * q)) / std::sqrt(q);
}

double frank_density(double theta, double u, double v) {
    const double em = std::expm1(-theta);  // e^-theta - 1
    const double eu = std::expm1(-theta * u);
    const double ev = std::expm1(-theta * v);
    const double den = em + eu * ev;
    return -theta * em * std::exp(-theta * (u + v)) / (den * den);
}

double frank_cdf(double theta, double u, double v) {
    const double em = std::expm1(-theta);
    const double eu = std::expm1(-theta * u);
    const double ev = std::expm1(-theta * v);
    return -std::log1p(eu * ev / em) / theta;
}

struct StudentTConstants {
    double nu;
    double log_c2;  // log of the bivariate-t normalization without the 1/sqrt(1-r^2)
    double log_c1;  // log of the univariate-t normalization
};

StudentTConstants student_constants(double nu) {
    StudentTConstants k{};
    k.nu = nu;
    k.log_c2 = std::lgamma((nu + 2.0) / 2.0) - std::lgamma(nu / 2.0) - std::log(nu * kTwoPi / 2.0);
    k.log_c1 = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * kTwoPi / 2.0);
    return k;
}

double student_t_density_ratio(const StudentTConstants& k, double rho, double x, double y) {
    const double q = 1.0 - rho * rho;
    const double log_f2 = k.log_c2 - 0.5 * std::log(q) -
                          (k.nu + 2.0) / 2.0 * std::log1p((x * x - 2.0 * rho * x * y + y * y) / (k.nu * q));
    const double log_f1 = k.log_c1 - (k.nu + 1.0) / 2.0 * std::log1p(x * x / k.nu);
    const double log_f1y = k.log_c1 - (k.nu + 1.0) / 2.0 * std::log1p(y * y / k.nu);
    return std::exp(log_f2 - log_f1 - log_f1y);
}

double student_t_quantile(double nu, double p) {
    const boost::math::students_t dist(nu);
    return boost::math::quantile(dist, p);
}

// Gauss-Legendre nodes/weights on [0,1], computed once by Newton iteration.
struct GaussLegendre {
    std::vector<double> x, w;
};

const GaussLegendre& gauss_legendre_32() {
    static const GaussLegendre gl = [] {
        constexpr int n = 32;
        GaussLegendre g;
        g.x.resize(n);
        g.w.resize(n);
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double z = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) < 1e-15) break;
            }
            // map from [-1,1] to [0,1]
            g.x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
            g.x[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + z);
            const double wi = 1.0 / ((1.0 - z * z) * pp * pp);
            g.w[static_cast<std::size_t>(i)] = wi;
            g.w[static_cast<std::size_t>(n - 1 - i)] = wi;
        }
        return g;
    }();
    return gl;
}

// Bivariate normal CDF via the correlation-integral identity:
// Phi2(x,y;rho) = Phi(x)Phi(y) + int_0^rho phi2(x,y;r) dr.
double bivariate_normal_cdf(double x, double y, double rho) {
    double acc = normal_cdf(x) * normal_cdf(y);
    const GaussLegendre& gl = gauss_legendre_32();
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
        const double r = rho * gl.x[i];
        const double q = 1.0 - r * r;
        const double dens = std::exp(-(x * x - 2.0 * r * x * y + y * y) / (2.0 * q)) / (kTwoPi * std::sqrt(q));
        acc += rho * gl.w[i] * dens;
    }
    return acc;
}

}  // namespace

double copula_density(const ParametricCopula& c, double u, double v) {
    check_interior(u, v);
    check_params(c);
    switch (c.family) {
        case CopulaFamily::Gaussian:
            return gaussian_density(c.rho, inverse_normal_cdf(u), inverse_normal_cdf(v));
        case CopulaFamily::Frank:
            return frank_density(c.theta, u, v);
        case CopulaFamily::StudentT: {
            const StudentTConstants k = student_constants(c.nu);
            return student_t_density_ratio(k, c.rho, student_t_quantile(c.nu, u), student_t_quantile(c.nu, v));
        }
    }
    return 0.0;
}

double copula_cdf(const ParametricCopula& c, double u, double v) {
    check_interior(u, v);
    check_params(c);
    switch (c.family) {
        case CopulaFamily::Gaussian:
            return bivariate_normal_cdf(inverse_normal_cdf(u), inverse_normal_cdf(v), c.rho);
        case CopulaFamily::Frank:
            return frank_cdf(c.theta, u, v);
        case CopulaFamily::StudentT:
            throw std::invalid_argument("student_t CDF is not implemented");
    }
    return 0.0;
}

double mean_log_density(const ParametricCopula& c, std::span<const double> u_rowmajor) {
    if (u_rowmajor.empty() || u_rowmajor.size() % 2 != 0) {
        throw std::invalid_argument("mean_log_density: malformed bivariate points");
    }
    const std::size_t n = u_rowmajor.size() / 2;
    double acc = 0.0;
    if (c.family == CopulaFamily::StudentT) {
        // cache the quantile transform constants once
        const StudentTConstants k = student_constants(c.nu);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = student_t_quantile(c.nu, u_rowmajor[2 * i]);
            const double y = student_t_quantile(c.nu, u_rowmajor[2 * i + 1]);
            acc += std::log(std::max(student_t_density_ratio(k, c.rho, x, y), 1e-300));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            acc += std::log(std::max(copula_density(c, u_rowmajor[2 * i], u_rowmajor[2 * i + 1]), 1e-300));
        }
    }
    return acc / static_cast<double>(n);
}

namespace {

// Golden-section maximization of a unimodal function on [a, b].
template <typename Fn>
double golden_max(const Fn& f, double a, double b, int iters = 80) {
    const double phi = 0.6180339887498948482;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

void check_not_degenerate(std::span<const double> u, int dim) {
    for (int c = 0; c < dim; ++c) {
        const double first = u[static_cast<std::size_t>(c)];
        bool varies = false;
        for (std::size_t i = 1; i * static_cast<std::size_t>(dim) < u.size(); ++i) {
            if (u[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)] != first) {
                varies = true;
                break;
            }
        }
        if (!varies) throw numeric_error("fit_mle: degenerate data (constant column)");
    }
}

}  // namespace

ParametricCopula fit_mle(CopulaFamily family, std::span<const double> pseudo_obs_rowmajor) {
    if (pseudo_obs_rowmajor.size() < 4 || pseudo_obs_rowmajor.size() % 2 != 0) {
        throw std::invalid_argument("fit_mle: need bivariate pseudo-observations");
    }
    check_not_degenerate(pseudo_obs_rowmajor, 2);
    const std::size_t n = pseudo_obs_rowmajor.size() / 2;

    ParametricCopula out;
    out.family = family;

    if (family == CopulaFamily::Gaussian || family == CopulaFamily::StudentT) {
        // normal scores for the starting correlation
        std::vector<double> zx(n), zy(n);
        for (std::size_t i = 0; i < n; ++i) {
            zx[i] = inverse_normal_cdf(pseudo_obs_rowmajor[2 * i]);
            zy[i] = inverse_normal_cdf(pseudo_obs_rowmajor[2 * i + 1]);
        }
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += zx[i];
            sy += zy[i];
            sxx += zx[i] * zx[i];
            syy += zy[i] * zy[i];
            sxy += zx[i] * zy[i];
        }
        const double dn = static_cast<double>(n);
        const double cov = sxy / dn - sx / dn * sy / dn;
        const double vx = sxx / dn - sx / dn * sx / dn;
        const double vy = syy / dn - sy / dn * sy / dn;
        const double r0 = std::clamp(cov / std::sqrt(vx * vy), -0.99, 0.99);

        auto refine_rho = [&](const auto& loglik, double start) {
            double lo = std::max(-0.995, start - 0.15);
            double hi = std::min(0.995, start + 0.15);
            for (int expand = 0; expand < 6; ++expand) {
                const double best = golden_max(loglik, lo, hi);
                const double width = hi - lo;
                if (best - lo < 0.02 * width && lo > -0.99) {
                    lo = std::max(-0.995, lo - width);
                } else if (hi - best < 0.02 * width && hi < 0.99) {
                    hi = std::min(0.995, hi + width);
                } else {
                    return best;
                }
            }
            return golden_max(loglik, lo, hi);
        };

        if (family == CopulaFamily::Gaussian) {
            auto loglik = [&](double rho) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += std::log(std::max(gaussian_density(rho, zx[i], zy[i]), 1e-300));
                }
                return acc;
            };
            out.rho = refine_rho(loglik, r0);
            return out;
        }

        // student_t: integer nu grid, rho search per nu
        double best_ll = -1e300;
        for (int nu = 3; nu <= 30; ++nu) {
            const StudentTConstants k = student_constants(static_cast<double>(nu));
            std::vector<double> tx(n), ty(n);
            for (std::size_t i = 0; i < n; ++i) {
                tx[i] = student_t_quantile(static_cast<double>(nu), pseudo_obs_rowmajor[2 * i]);
                ty[i] = student_t_quantile(static_cast<double>(nu), pseudo_obs_rowmajor[2 * i + 1]);
            }
            auto loglik = [&](double rho) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += std::log(std::max(student_t_density_ratio(k, rho, tx[i], ty[i]), 1e-300));
                }
                return acc;
            };
            const double rho = refine_rho(loglik, r0);
            const double ll = loglik(rho);
            if (ll > best_ll) {
                best_ll = ll;
                out.rho = rho;
                out.nu = static_cast<double>(nu);
            }
        }
        return out;
    }

    // frank: coarse grid then golden-section refinement
    auto loglik = [&](double theta) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += std::log(std::max(frank_density(theta, pseudo_obs_rowmajor[2 * i],
                                                   pseudo_obs_rowmajor[2 * i + 1]), 1e-300));
        }
        return acc;
    };
    double best_theta = 1e-3, best_ll = -1e300;
    for (double th = -30.0; th <= 30.0 + 1e-12; th += 0.25) {
        if (std::abs(th) < 1e-3) continue;
        const double ll = loglik(th);
        if (ll > best_ll) {
            best_ll = ll;
            best_theta = th;
        }
    }
    const double lo = std::max(-30.0, best_theta - 0.25);
    const double hi = std::min(30.0, best_theta + 0.25);
    double theta = golden_max(loglik, lo, hi);
    if (std::abs(theta) < 1e-3) theta = theta < 0.0 ? -1e-3 : 1e-3;  // 0 excluded; this is independence
    out.theta = theta;
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    // rational approximation (central / tail split), then one Halley polish
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e / normal_pdf(x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace copulafit
