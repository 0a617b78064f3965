#ifndef FLEETAGG_MARGINALS_HPP
#define FLEETAGG_MARGINALS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fleetagg {

/// Strictly increasing probability levels in (0,1) shared by a family of
/// quantile forecasts. Copies share storage, so a panel of forecasts on one
/// grid holds the levels once.
template <class Scalar>
class BasicQuantileGrid {
public:
    explicit BasicQuantileGrid(std::vector<Scalar> levels) {
        if (levels.size() < 2) {
            throw std::invalid_argument("quantile grid needs at least two levels");
        }
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const Scalar l = levels[k];
            if (!(l > Scalar(0) && l < Scalar(1))) {
                throw std::invalid_argument("quantile level outside (0,1): " + std::to_string(double(l)));
            }
            if (k > 0 && !(l > levels[k - 1])) {
                throw std::invalid_argument("quantile levels must be strictly increasing");
            }
        }
        const std::size_t last = levels.size() - 1;
        const Scalar step = (levels[last] - levels[0]) / Scalar(last);
        bool uniform = true;
        for (std::size_t k = 0; k < levels.size() && uniform; ++k) {
            uniform = std::abs(levels[k] - (levels[0] + Scalar(k) * step)) <= Scalar(1e-12);
        }
        step_ = uniform ? step : Scalar(0);
        levels_ = std::make_shared<const std::vector<Scalar>>(std::move(levels));
    }

    /// The grid k/(count+1), k = 1..count; count = 99 gives the percentiles.
    static BasicQuantileGrid percentiles(std::size_t count = 99) {
        std::vector<Scalar> levels(count);
        for (std::size_t k = 0; k < count; ++k) {
            levels[k] = Scalar(k + 1) / Scalar(count + 1);
        }
        return BasicQuantileGrid(std::move(levels));
    }

    std::span<const Scalar> levels() const noexcept { return *levels_; }
    std::size_t size() const noexcept { return levels_->size(); }
    Scalar operator[](std::size_t k) const noexcept { return (*levels_)[k]; }
    Scalar front() const noexcept { return levels_->front(); }
    Scalar back() const noexcept { return levels_->back(); }

    /// Index k of the segment [levels[k], levels[k+1]] holding u, for
    /// front() <= u <= back(). Constant time on evenly spaced grids.
    std::size_t segment(Scalar u) const noexcept {
        const auto& l = *levels_;
        const std::size_t last = l.size() - 2;
        std::size_t k;
        if (step_ > Scalar(0)) {
            const Scalar pos = std::floor((u - l[0]) / step_);
            k = pos <= Scalar(0) ? 0 : std::min<std::size_t>(static_cast<std::size_t>(pos), last);
            while (k > 0 && l[k] > u) {
                --k;
            }
            while (k < last && l[k + 1] <= u) {
                ++k;
            }
        } else {
            auto it = std::upper_bound(l.begin(), l.end(), u);
            const auto idx = static_cast<std::size_t>(it - l.begin());
            k = idx == 0 ? 0 : std::min(idx - 1, last);
        }
        return k;
    }

    friend bool operator==(const BasicQuantileGrid& a, const BasicQuantileGrid& b) {
        return a.levels_ == b.levels_ || *a.levels_ == *b.levels_;
    }

private:
    std::shared_ptr<const std::vector<Scalar>> levels_;
    Scalar step_ = 0;
};

/// Running maximum; the smallest monotone vector dominating the input.
template <class Scalar>
std::vector<Scalar> repair_monotone(std::span<const Scalar> values) {
    if (values.empty()) {
        throw std::invalid_argument("repair_monotone: empty value list");
    }
    std::vector<Scalar> out(values.begin(), values.end());
    for (std::size_t k = 1; k < out.size(); ++k) {
        out[k] = std::max(out[k], out[k - 1]);
    }
    return out;
}

/// Non-owning view of one marginal forecast: the grid, K non-decreasing
/// values and the support endpoints. All evaluation goes through this type.
template <class Scalar>
struct BasicQuantileView {
    const BasicQuantileGrid<Scalar>* grid = nullptr;
    std::span<const Scalar> values;
    Scalar support_lo = 0;
    Scalar support_hi = std::numeric_limits<Scalar>::infinity();
};

template <class Scalar>
Scalar default_support_hi(std::span<const Scalar> values) {
    return values.back() + (values.back() - values.front()) * Scalar(0.05);
}

/// One site at one timestamp: the marginal CDF as a quantile set.
///
/// Values are repaired to be non-decreasing on construction. The support
/// defaults to [0, top + 5% of the quantile spread] when no capacity is known.
template <class Scalar>
class BasicQuantileForecast {
public:
    BasicQuantileForecast(BasicQuantileGrid<Scalar> grid, std::span<const Scalar> values,
                          Scalar support_lo = Scalar(0), std::optional<Scalar> support_hi = std::nullopt)
        : grid_(std::move(grid)) {
        if (values.size() != grid_.size()) {
            throw std::invalid_argument("quantile forecast has " + std::to_string(values.size()) +
                                        " values for a grid of " + std::to_string(grid_.size()));
        }
        for (Scalar v : values) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("quantile forecast values must be finite");
            }
        }
        values_ = repair_monotone(values);
        lo_ = support_lo;
        hi_ = support_hi ? *support_hi : default_support_hi<Scalar>(values_);
        if (std::isnan(lo_) || std::isnan(hi_) || lo_ > values_.front() || hi_ < values_.back()) {
            throw std::invalid_argument("quantile forecast values fall outside the declared support");
        }
    }

    BasicQuantileForecast(BasicQuantileGrid<Scalar> grid, const std::vector<Scalar>& values,
                          Scalar support_lo = Scalar(0), std::optional<Scalar> support_hi = std::nullopt)
        : BasicQuantileForecast(std::move(grid), std::span<const Scalar>(values), support_lo, support_hi) {}

    const BasicQuantileGrid<Scalar>& grid() const noexcept { return grid_; }
    std::span<const Scalar> values() const noexcept { return values_; }
    Scalar support_lo() const noexcept { return lo_; }
    Scalar support_hi() const noexcept { return hi_; }

    BasicQuantileView<Scalar> view() const noexcept { return {&grid_, values_, lo_, hi_}; }

private:
    BasicQuantileGrid<Scalar> grid_;
    std::vector<Scalar> values_;
    Scalar lo_;
    Scalar hi_;
};

/// Piecewise-linear CDF through (values[k], levels[k]), with linear tails
/// to (support_lo, 0) and (support_hi, 1). At a jump (repeated values, or a
/// value sitting on a support endpoint) the result is the midpoint of the
/// left and right limits.
template <class Scalar>
Scalar cdf_eval(const BasicQuantileView<Scalar>& f, Scalar x) {
    if (std::isnan(x)) {
        throw std::invalid_argument("cdf_eval: NaN input");
    }
    const auto v = f.values;
    const auto& grid = *f.grid;
    const std::size_t last = v.size() - 1;
    const Scalar lo = f.support_lo;
    const Scalar hi = f.support_hi;

    if (x < v[0]) {
        if (!std::isfinite(lo) || x < lo) {
            return Scalar(0);
        }
        // lo < v[0] here, since lo <= v[0] and lo <= x < v[0]
        return std::clamp(grid[0] * (x - lo) / (v[0] - lo), Scalar(0), Scalar(1));
    }
    if (x > v[last]) {
        if (!std::isfinite(hi) || x >= hi) {
            return Scalar(1);
        }
        const Scalar top = grid[last];
        return std::clamp(top + (Scalar(1) - top) * (x - v[last]) / (hi - v[last]), Scalar(0), Scalar(1));
    }

    const auto first_ge = std::lower_bound(v.begin(), v.end(), x);
    const auto first_gt = std::upper_bound(first_ge, v.end(), x);
    if (first_ge != first_gt) {
        // x coincides with knots j..k
        const auto j = static_cast<std::size_t>(first_ge - v.begin());
        const auto k = static_cast<std::size_t>(first_gt - v.begin()) - 1;
        Scalar left = grid[j];
        if (j == 0 && (!std::isfinite(lo) || lo == v[0])) {
            left = Scalar(0);
        }
        Scalar right = grid[k];
        if (k == last && (!std::isfinite(hi) || hi == v[last])) {
            right = Scalar(1);
        }
        return std::clamp((left + right) / Scalar(2), Scalar(0), Scalar(1));
    }
    const auto k = static_cast<std::size_t>(first_ge - v.begin());  // v[k-1] < x < v[k]
    const Scalar w = (x - v[k - 1]) / (v[k] - v[k - 1]);
    return std::clamp(grid[k - 1] + w * (grid[k] - grid[k - 1]), Scalar(0), Scalar(1));
}

/// Inverse of cdf_eval: linear in the value between grid levels, linear
/// toward the support endpoints outside the grid.
template <class Scalar>
Scalar quantile_eval(const BasicQuantileView<Scalar>& f, Scalar u) {
    if (!(u >= Scalar(0) && u <= Scalar(1))) {
        throw std::invalid_argument("quantile_eval: probability outside [0,1]");
    }
    const auto v = f.values;
    const auto& grid = *f.grid;
    const std::size_t last = v.size() - 1;
    if (u < grid.front()) {
        if (!std::isfinite(f.support_lo)) {
            return v[0];
        }
        return std::max(f.support_lo, f.support_lo + (v[0] - f.support_lo) * (u / grid.front()));
    }
    if (u > grid.back()) {
        if (!std::isfinite(f.support_hi)) {
            return v[last];
        }
        const Scalar w = (u - grid.back()) / (Scalar(1) - grid.back());
        return std::min(f.support_hi, v[last] + (f.support_hi - v[last]) * w);
    }
    const std::size_t k = grid.segment(u);
    const Scalar l0 = grid[k];
    const Scalar l1 = grid[k + 1];
    if (u == l0) {
        return v[k];
    }
    if (u == l1) {
        return v[k + 1];
    }
    return v[k] + (v[k + 1] - v[k]) * ((u - l0) / (l1 - l0));
}

template <class Scalar>
Scalar cdf_eval(const BasicQuantileForecast<Scalar>& f, Scalar x) {
    return cdf_eval(f.view(), x);
}

template <class Scalar>
Scalar quantile_eval(const BasicQuantileForecast<Scalar>& f, Scalar u) {
    return quantile_eval(f.view(), u);
}

using QuantileGrid = BasicQuantileGrid<double>;
using QuantileForecast = BasicQuantileForecast<double>;
using QuantileView = BasicQuantileView<double>;

}  // namespace fleetagg

#endif  // FLEETAGG_MARGINALS_HPP
