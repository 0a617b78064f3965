#ifndef FLEETAGG_COPULA_HPP
#define FLEETAGG_COPULA_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fleetagg/gaussian.hpp"
#include "fleetagg/panel.hpp"

namespace fleetagg {

struct FitDiagnostics {
    Eigen::Index t_used = 0;
    double clamp_rate = 0.0;
    bool psd_repair_applied = false;
    double min_eigenvalue_before_repair = 1.0;
    /// Per-site mean of the probit scores; drifts from 0 when a site's
    /// marginals are biased.
    Eigen::VectorXd z_mean;
};

/// Gaussian copula over a fixed, ordered set of sites.
struct CopulaModel {
    std::vector<std::string> sites;
    Eigen::MatrixXd sigma;
    CholeskyFactor<double> factor;
    double clamp_eps = 0.005;
    FitDiagnostics diagnostics;

    Eigen::Index n_sites() const { return static_cast<Eigen::Index>(sites.size()); }

    /// The independence copula.
    static CopulaModel identity(std::vector<std::string> sites);
    /// Model around a given correlation matrix (factorized here).
    static CopulaModel from_sigma(std::vector<std::string> sites, Eigen::MatrixXd sigma, double clamp_eps = 0.005);
};

struct PitMatrix {
    Eigen::MatrixXd y;                                         // N x T, NaN where masked
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;  // N x T
};

/// PIT of every actual under its own marginal forecast. Panels must share
/// site and time ordering.
PitMatrix pit_matrix(const ActualsPanel& actuals, const ForecastPanel& forecasts);

struct ProbitMatrix {
    Eigen::MatrixXd z;
    double clamp_rate = 0.0;
};

/// Clamps PIT values to [clamp_eps, 1 - clamp_eps] and maps them to normal
/// scores.
ProbitMatrix probit_matrix(const Eigen::MatrixXd& y, double clamp_eps = 0.005);

/// Nearest-ish correlation matrix: eigenvalues clipped at `floor`, then the
/// diagonal rescaled to one. `min_eigenvalue` receives the smallest
/// eigenvalue of the input. Returns the input unchanged when it is already
/// above the floor.
Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& m, double floor, double* min_eigenvalue = nullptr,
                                   bool* repaired = nullptr);

struct FitOptions {
    double clamp_eps = 0.005;
    double eigenvalue_floor = 1e-8;
    /// Accept fewer fully observed columns than sites + 1; the estimate is
    /// then rank deficient and relies on the eigenvalue repair.
    bool allow_rank_deficient = false;
};

/// Sigma = (1/T') Z Z^T over the fully observed columns, rescaled to unit
/// diagonal and PSD-repaired.
CopulaModel fit_copula(const ActualsPanel& actuals, const ForecastPanel& forecasts, const FitOptions& options = {});

}  // namespace fleetagg

#endif  // FLEETAGG_COPULA_HPP
