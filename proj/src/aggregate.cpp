#include "fleetagg/aggregate.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fleetagg {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::copula:
            return "copula";
        case Method::indep:
            return "indep";
        case Method::qsum:
            return "qsum";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "copula") return Method::copula;
    if (name == "indep") return Method::indep;
    if (name == "qsum") return Method::qsum;
    throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected copula, indep or qsum)");
}

std::vector<std::optional<QuantileView>> views_of(std::span<const QuantileForecast> forecasts) {
    std::vector<std::optional<QuantileView>> out;
    out.reserve(forecasts.size());
    for (const auto& f : forecasts) {
        out.emplace_back(f.view());
    }
    return out;
}

namespace {

std::string site_label(std::span<const std::string> names, std::size_t i) {
    return i < names.size() ? names[i] : "#" + std::to_string(i);
}

void require_complete(SiteForecasts forecasts, std::span<const std::string> names) {
    std::string missing;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        if (!forecasts[i]) {
            missing += (missing.empty() ? "" : ", ") + site_label(names, i);
        }
    }
    if (!missing.empty()) {
        throw std::invalid_argument("missing forecasts for modeled sites: " + missing);
    }
}

FleetSampleSet sample_fleet(SiteForecasts forecasts, const CholeskyFactor<double>& factor, Eigen::Index s_count,
                            std::uint64_t seed, Timestamp time, Method method) {
    const Eigen::MatrixXd z = sample_mvn(factor, s_count, seed);
    std::vector<double> totals(static_cast<std::size_t>(s_count), 0.0);
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const QuantileView& f = *forecasts[i];
        const auto row = static_cast<Eigen::Index>(i);
        for (Eigen::Index s = 0; s < s_count; ++s) {
            totals[static_cast<std::size_t>(s)] += quantile_eval(f, std_normal_cdf(z(row, s)));
        }
    }
    std::sort(totals.begin(), totals.end());
    return {time, std::move(totals), method, seed};
}

}  // namespace

FleetSampleSet copula_aggregate(SiteForecasts forecasts, const CopulaModel& model, Eigen::Index s_count,
                                std::uint64_t seed, Timestamp time) {
    if (forecasts.size() != model.sites.size()) {
        throw std::invalid_argument("copula_aggregate: " + std::to_string(forecasts.size()) +
                                    " forecasts for a model of " + std::to_string(model.sites.size()) + " sites");
    }
    require_complete(forecasts, model.sites);
    return sample_fleet(forecasts, model.factor, s_count, seed, time, Method::copula);
}

FleetSampleSet copula_aggregate(std::span<const QuantileForecast> forecasts, const CopulaModel& model,
                                Eigen::Index s_count, std::uint64_t seed, Timestamp time) {
    const auto views = views_of(forecasts);
    return copula_aggregate(views, model, s_count, seed, time);
}

FleetSampleSet indep_aggregate(SiteForecasts forecasts, Eigen::Index s_count, std::uint64_t seed, Timestamp time,
                               std::span<const std::string> site_names) {
    if (forecasts.empty()) {
        throw std::invalid_argument("indep_aggregate: no forecasts");
    }
    require_complete(forecasts, site_names);
    const auto identity = CholeskyFactor<double>::identity(static_cast<Eigen::Index>(forecasts.size()));
    return sample_fleet(forecasts, identity, s_count, seed, time, Method::indep);
}

FleetSampleSet indep_aggregate(std::span<const QuantileForecast> forecasts, Eigen::Index s_count,
                               std::uint64_t seed, Timestamp time) {
    const auto views = views_of(forecasts);
    return indep_aggregate(views, s_count, seed, time);
}

QuantileAggregate qsum_aggregate(SiteForecasts forecasts, Timestamp time) {
    if (forecasts.empty()) {
        throw std::invalid_argument("qsum_aggregate: no forecasts");
    }
    require_complete(forecasts, {});
    const QuantileGrid& grid = *forecasts[0]->grid;
    std::vector<double> values(grid.size(), 0.0);
    for (const auto& f : forecasts) {
        if (!(*f->grid == grid)) {
            throw std::invalid_argument("qsum_aggregate: forecasts use different quantile grids");
        }
        for (std::size_t k = 0; k < values.size(); ++k) {
            values[k] += f->values[k];
        }
    }
    return {time, grid, std::move(values)};
}

QuantileAggregate qsum_aggregate(std::span<const QuantileForecast> forecasts, Timestamp time) {
    const auto views = views_of(forecasts);
    return qsum_aggregate(views, time);
}

double empirical_quantile(std::span<const double> sorted, double u) {
    if (sorted.empty()) {
        throw std::invalid_argument("empirical_quantile: empty sample set");
    }
    if (!(u >= 0.0 && u <= 1.0)) {
        throw std::invalid_argument("empirical_quantile: probability outside [0,1]");
    }
    const double pos = u * double(sorted.size() - 1);
    const auto below = static_cast<std::size_t>(pos);
    if (below + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = pos - double(below);
    if (frac == 0.0) {
        return sorted[below];
    }
    return sorted[below] + frac * (sorted[below + 1] - sorted[below]);
}

double empirical_quantile(const FleetSampleSet& samples, double u) { return empirical_quantile(samples.samples, u); }

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("prediction_interval: alpha must lie in (0,1)");
    }
}

double grid_quantile(const QuantileAggregate& dist, double u) {
    constexpr double snap = 1e-12;
    const auto& grid = dist.grid;
    if (u < grid.front() - snap || u > grid.back() + snap) {
        throw std::invalid_argument("confidence level not representable on grid");
    }
    u = std::clamp(u, grid.front(), grid.back());
    const std::size_t k = grid.segment(u);
    if (std::abs(u - grid[k]) <= snap) {
        return dist.values[k];
    }
    if (std::abs(u - grid[k + 1]) <= snap) {
        return dist.values[k + 1];
    }
    const double w = (u - grid[k]) / (grid[k + 1] - grid[k]);
    return dist.values[k] + w * (dist.values[k + 1] - dist.values[k]);
}

}  // namespace

Interval prediction_interval(const FleetSampleSet& dist, double alpha) {
    check_alpha(alpha);
    return {empirical_quantile(dist, alpha / 2.0), empirical_quantile(dist, 1.0 - alpha / 2.0)};
}

Interval prediction_interval(const QuantileAggregate& dist, double alpha) {
    check_alpha(alpha);
    return {grid_quantile(dist, alpha / 2.0), grid_quantile(dist, 1.0 - alpha / 2.0)};
}

}  // namespace fleetagg
