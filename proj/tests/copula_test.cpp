#include "doctest.h"

#include <sstream>

#include "fleetagg/copula.hpp"
#include "fleetagg/model_io.hpp"
#include "fleetagg/synth.hpp"
#include "oracles.hpp"

using namespace fleetagg;

namespace {

// Panels over the synthetic clock restricted to hours with sunlight.
struct SynthPanels {
    ActualsPanel actuals;
    ForecastPanel forecasts;
    Eigen::MatrixXd sigma;
};

SynthPanels daylight_panels(const SynthConfig& cfg) {
    SynthTruth truth = generate_truth(cfg);
    std::vector<Timestamp> day;
    for (Eigen::Index t = 0; t < truth.actuals.n_times(); ++t) {
        if (cfg.diurnal[std::size_t(hour_of_day(truth.actuals.times[std::size_t(t)]))] > 0.0) {
            day.push_back(truth.actuals.times[std::size_t(t)]);
        }
    }
    ActualsPanel actuals = truth.actuals.select_times(day);
    ForecastPanel forecasts = generate_forecasts(cfg, QuantileGrid::percentiles(), day);
    return {std::move(actuals), std::move(forecasts), truth.true_sigma};
}

ActualsPanel permute_sites(const ActualsPanel& p, const std::vector<Eigen::Index>& perm) {
    ActualsPanel out = p;
    for (std::size_t k = 0; k < perm.size(); ++k) {
        out.sites[k] = p.sites[std::size_t(perm[k])];
        out.x.row(Eigen::Index(k)) = p.x.row(perm[k]);
    }
    out.capacity.reset();
    return out;
}

ForecastPanel permute_sites(const ForecastPanel& p, const std::vector<Eigen::Index>& perm) {
    std::vector<std::string> sites;
    for (auto i : perm) sites.push_back(p.sites()[std::size_t(i)]);
    return p.reindex(sites, p.times());
}

}  // namespace

TEST_CASE("pit_matrix boundary cells") {
    const QuantileGrid grid({0.25, 0.5, 0.75});
    ActualsPanel a;
    a.sites = {"a", "b"};
    a.times = {parse_timestamp("2019-05-01T12:00:00Z"), parse_timestamp("2019-05-01T13:00:00Z")};
    a.x.resize(2, 2);
    a.x << 20, 0, std::nan(""), 12;
    ForecastPanel f(a.sites, a.times, grid);
    f.set(0, 0, QuantileForecast(grid, std::vector<double>{10, 20, 30}, 0.0, 40.0));
    f.set(0, 1, QuantileForecast(grid, std::vector<double>{10, 20, 30}, 0.0, 40.0));
    f.set(1, 0, QuantileForecast(grid, std::vector<double>{10, 20, 30}, 0.0, 40.0));
    const auto pit = pit_matrix(a, f);
    CHECK(pit.y(0, 0) == 0.5);
    CHECK(pit.y(0, 1) == 0.0);
    CHECK(!pit.valid(1, 0));  // actual missing
    CHECK(!pit.valid(1, 1));  // forecast missing
    CHECK(pit.valid(0, 1));

    ForecastPanel empty(a.sites, a.times, grid);
    CHECK_THROWS_AS(pit_matrix(a, empty), std::invalid_argument);
}

TEST_CASE("probit_matrix clamps and transforms") {
    Eigen::MatrixXd y(1, 4);
    y << 0.5, 1.0, 0.975, 0.0;
    const auto p = probit_matrix(y, 0.005);
    CHECK(p.z(0, 0) == 0.0);
    CHECK(std::abs(p.z(0, 1) - 2.5758293035489004) <= 1e-8);
    CHECK(std::abs(p.z(0, 2) - 1.959963984540054) <= 1e-8);
    CHECK(std::abs(p.z(0, 3) + 2.5758293035489004) <= 1e-8);
    CHECK(p.clamp_rate == 0.5);
}

TEST_CASE("single-site model is the trivial copula") {
    SynthConfig cfg;
    cfg.n_sites = 1;
    cfg.n_times = 24 * 20;
    const auto panels = daylight_panels(cfg);
    const auto model = fit_copula(panels.actuals, panels.forecasts);
    CHECK(model.sigma.rows() == 1);
    CHECK(model.sigma(0, 0) == 1.0);
}

TEST_CASE("fit recovers an equicorrelated copula") {
    SynthConfig cfg;
    cfg.n_sites = 20;
    cfg.n_times = 24 * 400;
    cfg.correlation = Equicorrelated{0.5};
    cfg.seed = 17;
    auto panels = daylight_panels(cfg);
    // first 5000 daylight hours
    std::vector<Timestamp> keep(panels.actuals.times.begin(), panels.actuals.times.begin() + 5000);
    const auto actuals = panels.actuals.select_times(keep);
    const auto forecasts = panels.forecasts.reindex(actuals.sites, keep);
    const auto model = fit_copula(actuals, forecasts);
    CHECK(model.diagnostics.t_used == 5000);
    CHECK(!model.diagnostics.psd_repair_applied);
    CHECK((model.sigma - panels.sigma).cwiseAbs().maxCoeff() <= 0.05);
    CHECK(model.sigma.diagonal().isOnes(1e-12));
    CHECK(model.sigma.isApprox(model.sigma.transpose(), 0.0));

    SUBCASE("deterministic") {
        const auto again = fit_copula(actuals, forecasts);
        CHECK(again.sigma == model.sigma);
        CHECK(again.factor.lower == model.factor.lower);
    }
    SUBCASE("site permutation conjugates sigma") {
        const std::vector<Eigen::Index> perm{3, 0, 19, 7, 1, 2, 4, 5, 6, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18};
        const auto pm = fit_copula(permute_sites(actuals, perm), permute_sites(forecasts, perm));
        for (std::size_t i = 0; i < perm.size(); ++i) {
            for (std::size_t j = 0; j < perm.size(); ++j) {
                CHECK(pm.sigma(Eigen::Index(i), Eigen::Index(j)) == model.sigma(perm[i], perm[j]));
            }
        }
    }
}

TEST_CASE("independent sites give small off-diagonal estimates") {
    SynthConfig cfg;
    cfg.n_sites = 15;
    cfg.n_times = 24 * 250;
    cfg.correlation = Equicorrelated{0.0};
    cfg.seed = 99;
    const auto panels = daylight_panels(cfg);
    const auto model = fit_copula(panels.actuals, panels.forecasts);
    const double bound = 4.0 / std::sqrt(double(model.diagnostics.t_used));
    int pairs = 0, within = 0;
    for (Eigen::Index i = 0; i < 15; ++i) {
        for (Eigen::Index j = i + 1; j < 15; ++j) {
            ++pairs;
            within += std::abs(model.sigma(i, j)) <= bound ? 1 : 0;
        }
    }
    CHECK(double(within) >= 0.99 * pairs);
    CHECK(model.diagnostics.z_mean.cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("duplicated sites: perfect dependence still factorizes") {
    SynthConfig cfg;
    cfg.n_sites = 3;
    cfg.n_times = 24 * 30;
    cfg.seed = 4;
    auto panels = daylight_panels(cfg);
    // copy site 0 into site 1 in both panels
    panels.actuals.x.row(1) = panels.actuals.x.row(0);
    for (Eigen::Index t = 0; t < panels.forecasts.n_times(); ++t) {
        panels.forecasts.set(1, t, panels.forecasts.forecast(0, t));
    }
    const auto model = fit_copula(panels.actuals, panels.forecasts);
    CHECK(model.sigma(0, 1) >= 0.99);
    CHECK(model.diagnostics.psd_repair_applied);
    CHECK(model.diagnostics.min_eigenvalue_before_repair < 1e-8);
    const Eigen::MatrixXd target = model.sigma + model.factor.jitter_used * Eigen::MatrixXd::Identity(3, 3);
    CHECK((model.factor.lower * model.factor.lower.transpose() - target).cwiseAbs().maxCoeff() <= 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.sigma);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("fit errors") {
    SynthConfig cfg;
    cfg.n_sites = 20;
    cfg.n_times = 24;
    auto panels = daylight_panels(cfg);
    CHECK(panels.actuals.n_times() < 21);
    CHECK_THROWS_AS(fit_copula(panels.actuals, panels.forecasts), std::invalid_argument);

    FitOptions loose;
    loose.allow_rank_deficient = true;
    const auto model = fit_copula(panels.actuals, panels.forecasts, loose);
    CHECK(model.diagnostics.psd_repair_applied);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.sigma);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

    SUBCASE("constant site is named") {
        cfg.n_times = 24 * 10;
        auto p = daylight_panels(cfg);
        for (Eigen::Index t = 0; t < p.actuals.n_times(); ++t) {
            p.actuals.x(2, t) = quantile_eval(*p.forecasts.view(2, t), 0.5);
        }
        try {
            fit_copula(p.actuals, p.forecasts);
            FAIL("expected an error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(p.actuals.sites[2]) != std::string::npos);
        }
    }
}

TEST_CASE("repair_correlation clips negative eigenvalues") {
    Eigen::Matrix3d m;
    m << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
    double lowest = 0;
    bool repaired = false;
    const Eigen::MatrixXd r = repair_correlation(m, 1e-8, &lowest, &repaired);
    CHECK(lowest < 0.0);
    CHECK(repaired);
    CHECK(r.diagonal().isOnes(1e-12));
    CHECK(r.isApprox(r.transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    CHECK(r.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("model file roundtrip is exact") {
    SynthConfig cfg;
    cfg.n_sites = 6;
    cfg.n_times = 24 * 40;
    cfg.correlation = BlockCorrelation{3, 0.7, 0.2};
    const auto panels = daylight_panels(cfg);
    const auto model = fit_copula(panels.actuals, panels.forecasts);

    std::stringstream ss;
    write_model(ss, model);
    const std::string text = ss.str();
    const auto back = read_model(ss);
    CHECK(back.sites == model.sites);
    CHECK(back.sigma == model.sigma);
    CHECK(back.clamp_eps == model.clamp_eps);
    CHECK(back.diagnostics.t_used == model.diagnostics.t_used);
    CHECK(back.diagnostics.clamp_rate == model.diagnostics.clamp_rate);
    CHECK(back.diagnostics.psd_repair_applied == model.diagnostics.psd_repair_applied);
    CHECK(back.diagnostics.min_eigenvalue_before_repair == model.diagnostics.min_eigenvalue_before_repair);
    CHECK(back.diagnostics.z_mean == model.diagnostics.z_mean);
    CHECK(back.factor.lower == model.factor.lower);

    std::stringstream again;
    write_model(again, back);
    CHECK(again.str() == text);

    std::stringstream bad("fleetagg-copula-model\nformat_version 99\n");
    CHECK_THROWS_AS(read_model(bad), std::runtime_error);
}
