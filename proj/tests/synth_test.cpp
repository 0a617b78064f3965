#include "doctest.h"

#include <algorithm>

#include "fleetagg/beta.hpp"
#include "fleetagg/synth.hpp"
#include "oracles.hpp"

using namespace fleetagg;

namespace {

// Beta density written out directly, for quadrature.
double beta_density(double x, double a, double b) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double lb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp((a - 1) * std::log(x) + (b - 1) * std::log(1 - x) - lb);
}

double beta_cdf_quadrature(double x, double a, double b) {
    return oracle::simpson([&](double s) { return beta_density(s, a, b); }, 0.0, x, 40000);
}

std::vector<double> row(const Eigen::MatrixXd& m, Eigen::Index i) {
    return std::vector<double>(m.row(i).begin(), m.row(i).end());
}

}  // namespace

TEST_CASE("beta functions against independent references") {
    // frozen scipy.stats.beta values
    CHECK(std::abs(beta_cdf(0.3, 2.5, 3.7) - 0.31900317528430866) <= 1e-12);
    CHECK(std::abs(beta_quantile(0.9, 2.5, 3.7) - 0.6553621483074009) <= 1e-12);
    CHECK(std::abs(beta_cdf(0.95, 4.2, 2.1) - 0.9803442823843879) <= 1e-12);

    for (double a : {2.0, 2.7, 4.9}) {
        for (double b : {2.0, 3.3, 5.0}) {
            for (double x = 0.05; x < 1.0; x += 0.1) {
                CHECK(std::abs(beta_cdf(x, a, b) - beta_cdf_quadrature(x, a, b)) <= 1e-9);
                CHECK(std::abs(beta_pdf(x, a, b) - beta_density(x, a, b)) <= 1e-12 * (1 + beta_density(x, a, b)));
            }
            for (double p = 0.001; p < 1.0; p += 0.0371) {
                CHECK(std::abs(beta_cdf(beta_quantile(p, a, b), a, b) - p) <= 1e-12);
            }
        }
    }
    CHECK(beta_quantile(0.0, 2.0, 3.0) == 0.0);
    CHECK(beta_quantile(1.0, 2.0, 3.0) == 1.0);
    CHECK_THROWS_AS(beta_cdf(0.5, -1.0, 2.0), std::invalid_argument);
}

TEST_CASE("independent sites have uncorrelated PITs") {
    SynthConfig cfg;
    cfg.n_sites = 2;
    cfg.n_times = 5000;
    cfg.correlation = Equicorrelated{0.0};
    const auto truth = generate_truth(cfg);
    CHECK(std::abs(oracle::pearson(row(truth.latent_u, 0), row(truth.latent_u, 1))) <= 0.05);
}

TEST_CASE("near-comonotone sites are rank-identical") {
    SynthConfig cfg;
    cfg.n_sites = 2;
    cfg.n_times = 24 * 200;
    cfg.correlation = Equicorrelated{0.999};
    const auto truth = generate_truth(cfg);
    std::vector<double> cf0, cf1;
    const auto sites = resolve_sites(cfg);
    for (Eigen::Index t = 0; t < cfg.n_times; ++t) {
        const double s0 = cell_scale(cfg, sites, 0, t);
        if (s0 == 0.0) continue;
        cf0.push_back(truth.actuals.x(0, t) / s0);
        cf1.push_back(truth.actuals.x(1, t) / cell_scale(cfg, sites, 1, t));
    }
    CHECK(oracle::spearman(cf0, cf1) >= 0.99);
}

TEST_CASE("zero diurnal multiplier gives zero generation") {
    SynthConfig cfg;
    cfg.n_sites = 4;
    cfg.n_times = 24 * 5;
    const auto truth = generate_truth(cfg);
    for (Eigen::Index t = 0; t < cfg.n_times; ++t) {
        const int h = hour_of_day(truth.actuals.times[std::size_t(t)]);
        if (cfg.diurnal[std::size_t(h)] == 0.0) {
            CHECK(truth.actuals.x.col(t).isZero(0.0));
        } else {
            CHECK((truth.actuals.x.col(t).array() > 0.0).all());
        }
    }
    CHECK(truth.actuals.capacity->size() == 4);
    CHECK((truth.actuals.x.array() <= truth.actuals.capacity->replicate(1, cfg.n_times).array()).all());
}

TEST_CASE("calibrated forecasts: uniform PITs that reproduce the latent uniforms") {
    SynthConfig cfg;
    cfg.n_sites = 5;
    cfg.n_times = 24 * 120;
    cfg.seed = 3;
    const auto truth = generate_truth(cfg);
    const auto forecasts = generate_forecasts(cfg, QuantileGrid::percentiles());
    for (Eigen::Index i = 0; i < cfg.n_sites; ++i) {
        std::vector<double> pit;
        double worst = 0.0;
        for (Eigen::Index t = 0; t < cfg.n_times; ++t) {
            const auto view = *forecasts.view(i, t);
            if (view.values.back() == 0.0) continue;  // night
            const double y = cdf_eval(view, truth.actuals.x(i, t));
            pit.push_back(y);
            worst = std::max(worst, std::abs(y - truth.latent_u(i, t)));
        }
        CHECK(oracle::ks_uniform(pit) < oracle::ks_critical_001(pit.size()));
        CHECK(worst <= 0.01);
    }
}

TEST_CASE("narrowed forecasts under-cover by the amount the true marginal predicts") {
    SynthConfig cfg;
    cfg.n_sites = 6;
    cfg.n_times = 24 * 400;
    cfg.miscalibration.width_scale = 0.5;
    cfg.seed = 12;
    const auto grid = QuantileGrid::percentiles();
    const auto truth = generate_truth(cfg);
    const auto forecasts = generate_forecasts(cfg, grid);
    const auto sites = resolve_sites(cfg);

    for (Eigen::Index i = 0; i < cfg.n_sites; ++i) {
        const double a = sites.a(i), b = sites.b(i);
        // exact coverage of [med - c(med - q05), med + c(q95 - med)] under Beta(a, b), by quadrature
        const double med = beta_quantile(0.5, a, b);
        const double lo = med - 0.5 * (med - beta_quantile(0.05, a, b));
        const double hi = med + 0.5 * (beta_quantile(0.95, a, b) - med);
        const double expected = beta_cdf_quadrature(hi, a, b) - beta_cdf_quadrature(lo, a, b);

        long long n = 0, covered = 0;
        for (Eigen::Index t = 0; t < cfg.n_times; ++t) {
            const auto view = *forecasts.view(i, t);
            if (view.values.back() == 0.0) continue;
            const double x = truth.actuals.x(i, t);
            ++n;
            covered += (view.values[4] <= x && x <= view.values[94]) ? 1 : 0;
        }
        const double observed = double(covered) / double(n);
        const double se = std::sqrt(expected * (1 - expected) / double(n));
        CHECK(std::abs(observed - expected) <= 4.0 * se);
        CHECK(expected < 0.7);
    }
}

TEST_CASE("identity miscalibration and determinism") {
    SynthConfig cfg;
    cfg.n_sites = 4;
    cfg.n_times = 48;
    const auto grid = QuantileGrid::percentiles();
    SynthConfig same = cfg;
    same.miscalibration = {1.0, 0.0};
    const auto f1 = generate_forecasts(cfg, grid);
    const auto f2 = generate_forecasts(same, grid);
    for (Eigen::Index t = 0; t < 48; ++t) {
        for (Eigen::Index i = 0; i < 4; ++i) {
            CHECK(std::ranges::equal(f1.forecast(i, t).values(), f2.forecast(i, t).values()));
        }
    }
    const auto t1 = generate_truth(cfg);
    const auto t2 = generate_truth(cfg);
    CHECK(t1.actuals.x == t2.actuals.x);
    cfg.seed = 1;
    CHECK(generate_truth(cfg).actuals.x != t1.actuals.x);

    SynthConfig biased = same;
    biased.miscalibration.bias = 0.1;
    const auto fb = generate_forecasts(biased, grid);
    const auto caps = resolve_sites(biased).capacity;
    CHECK(fb.forecast(2, 12).values()[50] == doctest::Approx(f1.forecast(2, 12).values()[50] + 0.1 * caps(2)));
}

TEST_CASE("forecast subsets match the full panel") {
    SynthConfig cfg;
    cfg.n_sites = 3;
    cfg.n_times = 72;
    const auto grid = QuantileGrid::percentiles();
    const auto full = generate_forecasts(cfg, grid);
    const auto times = synth_times(cfg);
    const std::vector<Timestamp> pick{times[13], times[40]};
    const auto part = generate_forecasts(cfg, grid, pick);
    CHECK(std::ranges::equal(part.forecast(1, 1).values(), full.forecast(1, 40).values()));
    const std::vector<Timestamp> off{times[0] + std::chrono::minutes(30)};
    CHECK_THROWS_AS(generate_forecasts(cfg, grid, off), std::invalid_argument);
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.correlation = Equicorrelated{1.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.correlation = Equicorrelated{0.3};
    cfg.capacities = {1.0, 2.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.capacities.clear();
    cfg.diurnal[3] = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    SynthConfig block;
    block.n_sites = 4;
    block.correlation = BlockCorrelation{2, 0.6, 0.1};
    const auto m = block.correlation_matrix();
    CHECK(m(0, 1) == 0.6);
    CHECK(m(1, 2) == 0.1);
    CHECK(m(3, 3) == 1.0);
    CHECK(resolve_sites(block).ids[3] == "site_003");
}
