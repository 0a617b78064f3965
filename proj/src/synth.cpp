#include "fleetagg/synth.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "fleetagg/beta.hpp"
#include "fleetagg/gaussian.hpp"
#include "fleetagg/random.hpp"

namespace fleetagg {

namespace {

// Substream families; each family is further split by index.
constexpr std::uint64_t kSiteStream = 0x5173;
constexpr std::uint64_t kWeatherStream = 0x3ea7;
constexpr std::uint64_t kLatentStream = 0x1a7e;

std::uint64_t family_seed(std::uint64_t seed, std::uint64_t family, std::uint64_t index) {
    return substream_seed(substream_seed(seed, family), index);
}

Eigen::Index column_day(Eigen::Index t) { return t / 24; }

}  // namespace

std::array<double, 24> default_diurnal_profile() {
    std::array<double, 24> profile{};
    for (int h = 6; h < 19; ++h) {
        profile[static_cast<std::size_t>(h)] = std::sin(std::numbers::pi * (h + 0.5 - 6.0) / 13.0);
    }
    return profile;
}

void SynthConfig::validate() const {
    if (n_sites < 1 || n_times < 1) {
        throw std::invalid_argument("synth: n_sites and n_times must be positive");
    }
    auto check_rho = [](double r, const char* what) {
        if (!(r >= 0.0 && r < 1.0)) {
            throw std::invalid_argument(std::string("synth: ") + what + " must lie in [0,1)");
        }
    };
    if (const auto* eq = std::get_if<Equicorrelated>(&correlation)) {
        check_rho(eq->rho, "rho");
    } else if (const auto* block = std::get_if<BlockCorrelation>(&correlation)) {
        check_rho(block->within, "within-block correlation");
        check_rho(block->between, "between-block correlation");
        if (block->block_size < 1) {
            throw std::invalid_argument("synth: block size must be positive");
        }
    } else {
        const auto& m = std::get<ExplicitCorrelation>(correlation).matrix;
        if (m.rows() != n_sites || m.cols() != n_sites) {
            throw std::invalid_argument("synth: explicit correlation matrix has the wrong size");
        }
    }
    auto check_list = [this](const std::vector<double>& v, const char* what) {
        if (!v.empty() && static_cast<Eigen::Index>(v.size()) != n_sites) {
            throw std::invalid_argument(std::string("synth: ") + what + " list must have one entry per site");
        }
        for (double x : v) {
            if (!(x > 0.0)) {
                throw std::invalid_argument(std::string("synth: ") + what + " values must be positive");
            }
        }
    };
    check_list(capacities, "capacity");
    check_list(beta_a, "beta a");
    check_list(beta_b, "beta b");
    for (double d : diurnal) {
        if (!(d >= 0.0)) {
            throw std::invalid_argument("synth: diurnal multipliers must be non-negative");
        }
    }
    if (!(miscalibration.width_scale > 0.0) || !std::isfinite(miscalibration.bias)) {
        throw std::invalid_argument("synth: width scale must be positive and bias finite");
    }
}

Eigen::MatrixXd SynthConfig::correlation_matrix() const {
    const Eigen::Index n = n_sites;
    if (const auto* eq = std::get_if<Equicorrelated>(&correlation)) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, eq->rho);
        m.diagonal().setOnes();
        return m;
    }
    if (const auto* block = std::get_if<BlockCorrelation>(&correlation)) {
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                m(i, j) = i == j ? 1.0 : (i / block->block_size == j / block->block_size ? block->within : block->between);
            }
        }
        return m;
    }
    return std::get<ExplicitCorrelation>(correlation).matrix;
}

SiteParameters resolve_sites(const SynthConfig& cfg) {
    const Eigen::Index n = cfg.n_sites;
    SiteParameters p{{}, Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    const std::size_t width = std::max<std::size_t>(3, std::to_string(n - 1).size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::string digits = std::to_string(i);
        p.ids.push_back("site_" + std::string(width - digits.size(), '0') + digits);
        Xoshiro256 rng(family_seed(cfg.seed, kSiteStream, static_cast<std::uint64_t>(i)));
        const double cap = 20.0 + 180.0 * rng.uniform();
        const double a = 2.0 + 3.0 * rng.uniform();
        const double b = 2.0 + 3.0 * rng.uniform();
        const auto idx = static_cast<std::size_t>(i);
        p.capacity(i) = cfg.capacities.empty() ? cap : cfg.capacities[idx];
        p.a(i) = cfg.beta_a.empty() ? a : cfg.beta_a[idx];
        p.b(i) = cfg.beta_b.empty() ? b : cfg.beta_b[idx];
    }
    return p;
}

std::vector<Timestamp> synth_times(const SynthConfig& cfg) {
    std::vector<Timestamp> times(static_cast<std::size_t>(cfg.n_times));
    for (Eigen::Index t = 0; t < cfg.n_times; ++t) {
        times[static_cast<std::size_t>(t)] = cfg.start + std::chrono::hours(t);
    }
    return times;
}

double cell_scale(const SynthConfig& cfg, const SiteParameters& sites, Eigen::Index i, Eigen::Index t) {
    const Timestamp time = cfg.start + std::chrono::hours(t);
    double weather = 1.0;
    if (cfg.daily_weather) {
        Xoshiro256 rng(family_seed(cfg.seed, kWeatherStream, static_cast<std::uint64_t>(column_day(t))));
        weather = 0.6 + 0.4 * rng.uniform();
    }
    return sites.capacity(i) * cfg.diurnal[static_cast<std::size_t>(hour_of_day(time))] * weather;
}

SynthTruth generate_truth(const SynthConfig& cfg) {
    cfg.validate();
    const SiteParameters sites = resolve_sites(cfg);
    const Eigen::Index n = cfg.n_sites;
    SynthTruth truth;
    truth.true_sigma = cfg.correlation_matrix();
    const auto factor = cholesky(truth.true_sigma);

    truth.actuals.sites = sites.ids;
    truth.actuals.times = synth_times(cfg);
    truth.actuals.capacity = sites.capacity;
    truth.actuals.x.resize(n, cfg.n_times);
    truth.latent_u.resize(n, cfg.n_times);
    for (Eigen::Index t = 0; t < cfg.n_times; ++t) {
        const Eigen::VectorXd z =
            sample_mvn(factor, 1, family_seed(cfg.seed, kLatentStream, static_cast<std::uint64_t>(t))).col(0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = std_normal_cdf(z(i));
            truth.latent_u(i, t) = u;
            const double scale = cell_scale(cfg, sites, i, t);
            truth.actuals.x(i, t) = scale > 0.0 ? scale * beta_quantile(u, sites.a(i), sites.b(i)) : 0.0;
        }
    }
    return truth;
}

ForecastPanel generate_forecasts(const SynthConfig& cfg, const QuantileGrid& grid, std::span<const Timestamp> times) {
    cfg.validate();
    const SiteParameters sites = resolve_sites(cfg);
    const Eigen::Index n = cfg.n_sites;
    const std::size_t k = grid.size();
    const auto& mis = cfg.miscalibration;

    std::vector<Timestamp> columns = times.empty() ? synth_times(cfg) : std::vector<Timestamp>(times.begin(), times.end());
    std::vector<Eigen::Index> source(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto offset = std::chrono::duration_cast<std::chrono::hours>(columns[c] - cfg.start).count();
        if (columns[c] != cfg.start + std::chrono::hours(offset) || offset < 0 || offset >= cfg.n_times) {
            throw std::invalid_argument("generate_forecasts: " + format_timestamp(columns[c]) +
                                        " is not on the synthetic clock");
        }
        source[c] = static_cast<Eigen::Index>(offset);
    }

    // Standard Beta quantiles per site; cells only rescale them.
    std::vector<std::vector<double>> base(static_cast<std::size_t>(n), std::vector<double>(k));
    std::vector<double> median(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        for (std::size_t q = 0; q < k; ++q) {
            base[ii][q] = beta_quantile(grid[q], sites.a(i), sites.b(i));
        }
        median[ii] = beta_quantile(0.5, sites.a(i), sites.b(i));
    }

    ForecastPanel panel(sites.ids, columns, grid);
    std::vector<double> values(k);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double scale = cell_scale(cfg, sites, i, source[c]);
            for (std::size_t q = 0; q < k; ++q) {
                const double centred = mis.width_scale == 1.0
                                           ? base[ii][q]
                                           : median[ii] + mis.width_scale * (base[ii][q] - median[ii]);
                values[q] = scale * centred;
                if (mis.bias != 0.0) {
                    values[q] += mis.bias * sites.capacity(i);
                }
            }
            const double lo = std::min(0.0, values.front());
            const double hi = std::max(scale, values.back());
            panel.set(i, static_cast<Eigen::Index>(c), QuantileForecast(grid, values, lo, hi));
        }
    }
    return panel;
}

}  // namespace fleetagg
