#ifndef FLEETAGG_AGGREGATE_HPP
#define FLEETAGG_AGGREGATE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fleetagg/copula.hpp"
#include "fleetagg/marginals.hpp"
#include "fleetagg/panel.hpp"

namespace fleetagg {

enum class Method { copula, indep, qsum };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

inline constexpr Eigen::Index kDefaultSampleCount = 5000;

/// Monte-Carlo fleet totals for one target time, sorted ascending.
struct FleetSampleSet {
    Timestamp time{};
    std::vector<double> samples;
    Method method = Method::copula;
    std::uint64_t seed = 0;

    std::size_t s_count() const noexcept { return samples.size(); }
};

/// Level-by-level sum of site quantiles.
struct QuantileAggregate {
    Timestamp time{};
    QuantileGrid grid;
    std::vector<double> values;
};

/// Site forecasts for one target time, in model site order; nullopt marks
/// a missing site.
using SiteForecasts = std::span<const std::optional<QuantileView>>;

std::vector<std::optional<QuantileView>> views_of(std::span<const QuantileForecast> forecasts);

/// Copula chain: Z ~ MVN(0, sigma), Y = Phi(Z), X_i = F_i^-1(Y_i), total = sum_i X_i.
FleetSampleSet copula_aggregate(SiteForecasts forecasts, const CopulaModel& model, Eigen::Index s_count,
                                std::uint64_t seed, Timestamp time = {});
FleetSampleSet copula_aggregate(std::span<const QuantileForecast> forecasts, const CopulaModel& model,
                                Eigen::Index s_count, std::uint64_t seed, Timestamp time = {});

/// The copula chain under the independence copula.
FleetSampleSet indep_aggregate(SiteForecasts forecasts, Eigen::Index s_count, std::uint64_t seed,
                               Timestamp time = {}, std::span<const std::string> site_names = {});
FleetSampleSet indep_aggregate(std::span<const QuantileForecast> forecasts, Eigen::Index s_count,
                               std::uint64_t seed, Timestamp time = {});

QuantileAggregate qsum_aggregate(SiteForecasts forecasts, Timestamp time = {});
QuantileAggregate qsum_aggregate(std::span<const QuantileForecast> forecasts, Timestamp time = {});

/// Type-7 quantile of sorted samples: linear between order statistics at
/// position u * (S - 1).
double empirical_quantile(std::span<const double> sorted, double u);
double empirical_quantile(const FleetSampleSet& samples, double u);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const noexcept { return hi - lo; }
};

/// Central interval [q(alpha/2), q(1 - alpha/2)].
Interval prediction_interval(const FleetSampleSet& dist, double alpha);
/// Interpolated on the grid; levels outside the grid are rejected.
Interval prediction_interval(const QuantileAggregate& dist, double alpha);

}  // namespace fleetagg

#endif  // FLEETAGG_AGGREGATE_HPP
