#ifndef FLEETAGG_METRICS_HPP
#define FLEETAGG_METRICS_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fleetagg/aggregate.hpp"

namespace fleetagg {

/// One issued interval and the fleet total it was scored against.
struct IntervalRecord {
    Timestamp time{};
    Method method = Method::copula;
    double alpha = 0.1;
    double lo = 0.0;
    double hi = 0.0;
    double actual_total = 0.0;

    bool covered() const noexcept { return lo <= actual_total && actual_total <= hi; }
};

/// Percentage of records whose interval contains the actual (bounds inclusive).
double picp(std::span<const IntervalRecord> records);
/// Mean interval width in MW.
double aiw(std::span<const IntervalRecord> records);

struct EvalRow {
    Method method = Method::copula;
    double alpha = 0.1;
    std::optional<int> hour;  // nullopt: pooled over all hours
    double picp = 0.0;
    double aiw = 0.0;
    long long n = 0;
    long long covered = 0;
};

struct EvalReport {
    std::vector<EvalRow> overall;
    std::vector<EvalRow> hourly;
};

/// Groups by (method, alpha) and by (method, alpha, UTC hour). Rows are
/// ordered by method, then alpha, then hour; empty groups are omitted.
EvalReport hourly_report(std::span<const IntervalRecord> records);

inline constexpr std::array<double, 4> kDefaultAlphas{0.1, 0.2, 0.3, 0.4};

/// CSV with header method,alpha,hour,picp,aiw,n; pooled rows carry hour "all".
void write_report_csv(std::ostream& out, std::span<const EvalRow> rows);
/// Fixed-width table for terminals.
void print_report_table(std::ostream& out, std::span<const EvalRow> rows);

void write_intervals_csv(std::ostream& out, std::span<const IntervalRecord> records);

}  // namespace fleetagg

#endif  // FLEETAGG_METRICS_HPP
