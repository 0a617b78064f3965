#ifndef FLEETAGG_PANEL_HPP
#define FLEETAGG_PANEL_HPP

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fleetagg/marginals.hpp"

namespace fleetagg {

using Timestamp = std::chrono::sys_seconds;

/// Parses an RFC-3339 UTC timestamp ("2019-01-01T13:00:00Z", offsets and
/// fractional seconds accepted, fractions truncated).
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);
int hour_of_day(Timestamp t);

/// N x T actual generation in MW. Missing cells are NaN.
struct ActualsPanel {
    std::vector<std::string> sites;
    std::vector<Timestamp> times;
    Eigen::MatrixXd x;
    std::optional<Eigen::VectorXd> capacity;

    Eigen::Index n_sites() const { return static_cast<Eigen::Index>(sites.size()); }
    Eigen::Index n_times() const { return static_cast<Eigen::Index>(times.size()); }
    bool present(Eigen::Index i, Eigen::Index t) const { return !std::isnan(x(i, t)); }

    /// Declared capacity, or the per-site maximum observed actual.
    Eigen::VectorXd effective_capacity() const;

    /// Keeps the given columns (in the given order); the capacity is resolved
    /// against the full panel first so repeated selections agree.
    ActualsPanel select_times(std::span<const Timestamp> keep) const;

    /// Fleet total at column t over the present cells.
    double fleet_total(Eigen::Index t) const;
};

/// N x T grid of quantile forecasts on one shared grid. Values are stored
/// contiguously, K per cell; absent cells are masked.
class ForecastPanel {
public:
    ForecastPanel(std::vector<std::string> sites, std::vector<Timestamp> times, QuantileGrid grid);

    const std::vector<std::string>& sites() const noexcept { return sites_; }
    const std::vector<Timestamp>& times() const noexcept { return times_; }
    const QuantileGrid& grid() const noexcept { return grid_; }
    Eigen::Index n_sites() const noexcept { return static_cast<Eigen::Index>(sites_.size()); }
    Eigen::Index n_times() const noexcept { return static_cast<Eigen::Index>(times_.size()); }

    bool present(Eigen::Index i, Eigen::Index t) const { return present_[cell(i, t)] != 0; }
    std::optional<QuantileView> view(Eigen::Index i, Eigen::Index t) const;
    QuantileForecast forecast(Eigen::Index i, Eigen::Index t) const;

    /// Stores a forecast; its grid must equal the panel grid.
    void set(Eigen::Index i, Eigen::Index t, const QuantileForecast& f);
    void clear(Eigen::Index i, Eigen::Index t);

    /// Panel re-indexed onto the given sites and times; cells absent here
    /// are masked in the result.
    ForecastPanel reindex(std::span<const std::string> sites, std::span<const Timestamp> times) const;

private:
    std::size_t cell(Eigen::Index i, Eigen::Index t) const {
        return static_cast<std::size_t>(t) * sites_.size() + static_cast<std::size_t>(i);
    }

    std::vector<std::string> sites_;
    std::vector<Timestamp> times_;
    QuantileGrid grid_;
    std::vector<double> values_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<unsigned char> present_;
};

}  // namespace fleetagg

#endif  // FLEETAGG_PANEL_HPP
