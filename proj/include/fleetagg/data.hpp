#ifndef FLEETAGG_DATA_HPP
#define FLEETAGG_DATA_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fleetagg/panel.hpp"

namespace fleetagg {

/// Fleet: total generation against total capacity. Site: every observed
/// site must clear the threshold against its own capacity.
enum class FilterScope { fleet, site };

/// How sub-hourly actuals become hourly values: mean over the hour
/// starting at the label, or the reading exactly on the hour.
enum class HourlyAlignment { mean, on_the_hour };

FilterScope parse_filter_scope(std::string_view name);
HourlyAlignment parse_hourly_alignment(std::string_view name);

struct DatasetConfig {
    std::filesystem::path actuals_path;
    std::filesystem::path forecasts_path;
    std::optional<std::filesystem::path> capacity_path;
    double low_gen_threshold = 0.04;
    int train_months = 11;
    QuantileGrid quantile_grid = QuantileGrid::percentiles();
    FilterScope filter_scope = FilterScope::fleet;
    HourlyAlignment hourly_alignment = HourlyAlignment::mean;

    void validate() const;
};

/// Whole file as text; ".gz" files are decompressed.
std::string read_text_file(const std::filesystem::path& path);

struct ActualsLoad {
    ActualsPanel panel;
    std::vector<std::string> warnings;
};

/// Long CSV: site_id,timestamp_utc,mw. Sites sorted byte-wise, hours
/// chronologically.
ActualsLoad parse_actuals(std::string_view text, HourlyAlignment alignment = HourlyAlignment::mean);
ActualsLoad load_actuals(const std::filesystem::path& path, HourlyAlignment alignment = HourlyAlignment::mean);

using CapacityMap = std::map<std::string, double>;

/// CSV: site_id,capacity_mw.
CapacityMap parse_capacities(std::string_view text);
CapacityMap load_capacities(const std::filesystem::path& path);
void apply_capacities(ActualsPanel& panel, const CapacityMap& capacities);

struct ForecastLoad {
    ForecastPanel panel;
    std::size_t repaired_rows = 0;
};

/// Wide CSV: site_id,target_time,q01..qK with K = grid size. Support is
/// [0, capacity] when the site's capacity is known.
ForecastLoad parse_forecasts(std::string_view text, const QuantileGrid& grid, const CapacityMap* capacities = nullptr);
ForecastLoad load_forecasts(const std::filesystem::path& path, const QuantileGrid& grid,
                            const CapacityMap* capacities = nullptr);

/// Forecasts re-indexed onto the actuals' sites and times. The two site
/// sets must be identical.
ForecastPanel align_forecasts(const ForecastPanel& forecasts, const ActualsPanel& actuals);

/// Timestamps kept by the low-generation filter (inclusive threshold).
std::vector<Timestamp> filter_daylight(const ActualsPanel& actuals, double threshold,
                                       FilterScope scope = FilterScope::fleet);

struct TrainTestSplit {
    std::vector<Timestamp> train;
    std::vector<Timestamp> test;
};

/// First train_months calendar months (UTC) train, the rest test.
TrainTestSplit split_train_test(std::span<const Timestamp> times, int train_months);

struct Dataset {
    ActualsPanel actuals;
    ForecastPanel forecasts;
    std::vector<std::string> warnings;
    std::size_t repaired_rows = 0;
};

/// Loads, applies capacities and aligns both panels.
Dataset load_dataset(const DatasetConfig& config);

void write_actuals_csv(std::ostream& out, const ActualsPanel& panel);
void write_forecasts_csv(std::ostream& out, const ForecastPanel& panel);
void write_capacity_csv(std::ostream& out, std::span<const std::string> sites, const Eigen::VectorXd& capacity);
void write_matrix_csv(std::ostream& out, std::span<const std::string> labels, const Eigen::MatrixXd& m);

}  // namespace fleetagg

#endif  // FLEETAGG_DATA_HPP
