#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace copulafit {

enum class CopulaFamily { Gaussian, Frank, StudentT };

std::string family_name(CopulaFamily f);
CopulaFamily family_from_name(const std::string& name);

// Classical bivariate parametric copulas fit by maximum likelihood on
// pseudo-observations. rho in (-1,1) for gaussian/student_t, theta in R\{0}
// for frank (|theta| <= 1e-3 is reported as independence), nu > 2 for student_t.
struct ParametricCopula {
    CopulaFamily family = CopulaFamily::Gaussian;
    double rho = 0.0;
    double theta = 0.0;
    double nu = 0.0;

    nlohmann::json to_json() const;
    static ParametricCopula from_json(const nlohmann::json& j);
};

// Rank transform: u = rank / (n+1) per dimension, average ranks on ties.
// Input and output are row-major with `dim` columns.
std::vector<double> pseudo_observations(std::span<const double> data_rowmajor, int dim);

// Density and CDF at a bivariate point strictly inside the unit square.
// The CDF is implemented for gaussian (tetrachoric integral) and frank
// (closed form); the student_t CDF is not provided.
double copula_density(const ParametricCopula& c, double u, double v);
double copula_cdf(const ParametricCopula& c, double u, double v);

double mean_log_density(const ParametricCopula& c, std::span<const double> u_rowmajor);

// Maximum-likelihood fit on bivariate pseudo-observations. gaussian: normal-score
// correlation start plus 1D refinement; frank: grid + golden-section over
// [-30, 30] excluding 0; student_t: integer nu grid 3..30 with a rho search per nu.
ParametricCopula fit_mle(CopulaFamily family, std::span<const double> pseudo_obs_rowmajor);

// Standard normal helpers. The inverse is a rational approximation polished by
// one Halley step, absolute error well under 1.5e-7 on (1e-10, 1-1e-10).
double inverse_normal_cdf(double p);
double normal_cdf(double x);

}  // namespace copulafit
