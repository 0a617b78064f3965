#include "fleetagg/copula.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace fleetagg {

CopulaModel CopulaModel::identity(std::vector<std::string> sites) {
    const auto n = static_cast<Eigen::Index>(sites.size());
    CopulaModel model;
    model.sites = std::move(sites);
    model.sigma = Eigen::MatrixXd::Identity(n, n);
    model.factor = CholeskyFactor<double>::identity(n);
    model.diagnostics.z_mean = Eigen::VectorXd::Zero(n);
    return model;
}

CopulaModel CopulaModel::from_sigma(std::vector<std::string> sites, Eigen::MatrixXd sigma, double clamp_eps) {
    if (sigma.rows() != static_cast<Eigen::Index>(sites.size()) || sigma.cols() != sigma.rows()) {
        throw std::invalid_argument("copula model: sigma dimension does not match the site list");
    }
    CopulaModel model;
    model.factor = cholesky(sigma);
    model.sites = std::move(sites);
    model.sigma = std::move(sigma);
    model.clamp_eps = clamp_eps;
    model.diagnostics.z_mean = Eigen::VectorXd::Zero(model.sigma.rows());
    return model;
}

PitMatrix pit_matrix(const ActualsPanel& actuals, const ForecastPanel& forecasts) {
    if (actuals.sites != forecasts.sites() || actuals.times != forecasts.times()) {
        throw std::invalid_argument("pit_matrix: actuals and forecasts are not aligned on sites and times");
    }
    const Eigen::Index n = actuals.n_sites();
    const Eigen::Index t_count = actuals.n_times();
    PitMatrix out{Eigen::MatrixXd::Constant(n, t_count, std::numeric_limits<double>::quiet_NaN()),
                  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, t_count, false)};
    Eigen::Index cells = 0;
    for (Eigen::Index t = 0; t < t_count; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) {
            auto f = forecasts.view(i, t);
            if (!f || !actuals.present(i, t)) {
                continue;
            }
            out.y(i, t) = cdf_eval(*f, actuals.x(i, t));
            out.valid(i, t) = true;
            ++cells;
        }
    }
    if (cells == 0) {
        throw std::invalid_argument("pit_matrix: no cell has both an actual and a forecast");
    }
    return out;
}

ProbitMatrix probit_matrix(const Eigen::MatrixXd& y, double clamp_eps) {
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) {
        throw std::invalid_argument("probit_matrix: clamp_eps must lie in (0, 0.5)");
    }
    ProbitMatrix out{Eigen::MatrixXd(y.rows(), y.cols()), 0.0};
    Eigen::Index clamped = 0;
    for (Eigen::Index t = 0; t < y.cols(); ++t) {
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            double u = y(i, t);
            if (std::isnan(u)) {
                throw std::invalid_argument("probit_matrix: NaN PIT value");
            }
            if (u < clamp_eps || u > 1.0 - clamp_eps) {
                u = std::clamp(u, clamp_eps, 1.0 - clamp_eps);
                ++clamped;
            }
            out.z(i, t) = std_normal_inv(u);
        }
    }
    if (y.size() > 0) {
        out.clamp_rate = double(clamped) / double(y.size());
    }
    return out;
}

namespace {

void rescale_unit_diagonal(Eigen::MatrixXd& m) {
    const Eigen::VectorXd d = m.diagonal().cwiseSqrt().cwiseInverse();
    m = d.asDiagonal() * m * d.asDiagonal();
    m = (0.5 * (m + m.transpose())).eval();
    m.diagonal().setOnes();
    m = m.cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace

Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& m, double floor, double* min_eigenvalue, bool* repaired) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("repair_correlation: eigendecomposition failed");
    }
    const double lowest = eig.eigenvalues().minCoeff();
    if (min_eigenvalue) {
        *min_eigenvalue = lowest;
    }
    if (repaired) {
        *repaired = lowest < floor;
    }
    if (lowest >= floor) {
        return m;
    }
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(floor);
    Eigen::MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    rescale_unit_diagonal(out);
    return out;
}

CopulaModel fit_copula(const ActualsPanel& actuals, const ForecastPanel& forecasts, const FitOptions& options) {
    const PitMatrix pit = pit_matrix(actuals, forecasts);
    const Eigen::Index n = actuals.n_sites();

    std::vector<Eigen::Index> complete;
    for (Eigen::Index t = 0; t < actuals.n_times(); ++t) {
        if (pit.valid.col(t).all()) {
            complete.push_back(t);
        }
    }
    const auto t_used = static_cast<Eigen::Index>(complete.size());
    const Eigen::Index required = options.allow_rank_deficient ? 2 : n + 1;
    if (t_used < required) {
        throw std::invalid_argument("fit_copula: " + std::to_string(t_used) + " fully observed time columns, need at least " +
                                    std::to_string(required));
    }

    Eigen::MatrixXd y(n, t_used);
    for (Eigen::Index c = 0; c < t_used; ++c) {
        y.col(c) = pit.y.col(complete[static_cast<std::size_t>(c)]);
    }
    const ProbitMatrix probit = probit_matrix(y, options.clamp_eps);
    const Eigen::MatrixXd& z = probit.z;

    for (Eigen::Index i = 0; i < n; ++i) {
        if (z.row(i).maxCoeff() == z.row(i).minCoeff()) {
            throw std::invalid_argument("fit_copula: site '" + actuals.sites[static_cast<std::size_t>(i)] +
                                        "' has zero variance in its normal scores");
        }
    }

    // Entry-wise dot products keep each entry independent of site order.
    Eigen::MatrixXd raw(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            raw(i, j) = raw(j, i) = z.row(i).dot(z.row(j)) / double(t_used);
        }
    }
    rescale_unit_diagonal(raw);

    CopulaModel model;
    model.sites = actuals.sites;
    model.clamp_eps = options.clamp_eps;
    model.diagnostics.t_used = t_used;
    model.diagnostics.clamp_rate = probit.clamp_rate;
    model.diagnostics.z_mean = z.rowwise().mean();
    model.sigma = repair_correlation(raw, options.eigenvalue_floor, &model.diagnostics.min_eigenvalue_before_repair,
                                     &model.diagnostics.psd_repair_applied);
    model.factor = cholesky(model.sigma);
    return model;
}

}  // namespace fleetagg
