#ifndef FLEETAGG_SYNTH_HPP
#define FLEETAGG_SYNTH_HPP

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fleetagg/panel.hpp"

namespace fleetagg {

struct Equicorrelated {
    double rho = 0.0;
};

/// Consecutive blocks of `block_size` sites; `within` inside a block,
/// `between` across blocks.
struct BlockCorrelation {
    Eigen::Index block_size = 1;
    double within = 0.0;
    double between = 0.0;
};

struct ExplicitCorrelation {
    Eigen::MatrixXd matrix;
};

using CorrelationSpec = std::variant<Equicorrelated, BlockCorrelation, ExplicitCorrelation>;

/// Forecast distortion: spread about the median scaled by width_scale,
/// then every value shifted by bias * capacity.
struct Miscalibration {
    double width_scale = 1.0;
    double bias = 0.0;
};

/// Bell-shaped profile over UTC hours 6..18, zero at night.
std::array<double, 24> default_diurnal_profile();

/// Synthetic fleet with a known Gaussian copula. Site i at time t produces
/// capacity_i * diurnal[hour] * weather[day] * BetaInv(U_it; a_i, b_i) with
/// U_t = Phi(Z_t), Z_t ~ MVN(0, sigma). Empty per-site lists are drawn from
/// the seed: capacities in [20, 200] MW, shapes a, b in [2, 5].
struct SynthConfig {
    Eigen::Index n_sites = 20;
    Eigen::Index n_times = 24 * 30;
    CorrelationSpec correlation = Equicorrelated{0.5};
    std::vector<double> capacities;
    std::vector<double> beta_a;
    std::vector<double> beta_b;
    std::array<double, 24> diurnal = default_diurnal_profile();
    /// Per-day multiplier in [0.6, 1], shared by all sites and known to the
    /// forecaster.
    bool daily_weather = true;
    Miscalibration miscalibration;
    std::uint64_t seed = 0;
    Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2019} / 1 / 1}};

    void validate() const;
    Eigen::MatrixXd correlation_matrix() const;
};

struct SiteParameters {
    std::vector<std::string> ids;
    Eigen::VectorXd capacity;
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

SiteParameters resolve_sites(const SynthConfig& cfg);

std::vector<Timestamp> synth_times(const SynthConfig& cfg);

/// Deterministic scale capacity * diurnal * weather for column t.
double cell_scale(const SynthConfig& cfg, const SiteParameters& sites, Eigen::Index i, Eigen::Index t);

struct SynthTruth {
    ActualsPanel actuals;  // capacity populated
    Eigen::MatrixXd true_sigma;
    Eigen::MatrixXd latent_u;  // N x T uniforms behind the actuals
};

SynthTruth generate_truth(const SynthConfig& cfg);

/// Exact quantiles of each cell's generating distribution (distorted by
/// cfg.miscalibration). Restrict to `times` (a subset of synth_times) to
/// keep memory proportional to what is used.
ForecastPanel generate_forecasts(const SynthConfig& cfg, const QuantileGrid& grid,
                                 std::span<const Timestamp> times = {});

}  // namespace fleetagg

#endif  // FLEETAGG_SYNTH_HPP
