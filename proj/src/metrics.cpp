#include "fleetagg/metrics.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "fleetagg/model_io.hpp"

namespace fleetagg {

double picp(std::span<const IntervalRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("picp: no interval records");
    }
    long long covered = 0;
    for (const auto& r : records) {
        covered += r.covered() ? 1 : 0;
    }
    return 100.0 * double(covered) / double(records.size());
}

double aiw(std::span<const IntervalRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("aiw: no interval records");
    }
    double total = 0.0;
    for (const auto& r : records) {
        total += r.hi - r.lo;
    }
    return total / double(records.size());
}

namespace {

struct Accumulator {
    long long n = 0;
    long long covered = 0;
    double width = 0.0;

    void add(const IntervalRecord& r) {
        ++n;
        covered += r.covered() ? 1 : 0;
        width += r.hi - r.lo;
    }

    EvalRow row(Method method, double alpha, std::optional<int> hour) const {
        return {method, alpha, hour, 100.0 * double(covered) / double(n), width / double(n), n, covered};
    }
};

}  // namespace

EvalReport hourly_report(std::span<const IntervalRecord> records) {
    std::map<std::tuple<Method, double>, Accumulator> pooled;
    std::map<std::tuple<Method, double, int>, Accumulator> by_hour;
    for (const auto& r : records) {
        if (r.lo > r.hi) {
            throw std::invalid_argument("interval record with lo > hi");
        }
        pooled[{r.method, r.alpha}].add(r);
        by_hour[{r.method, r.alpha, hour_of_day(r.time)}].add(r);
    }
    EvalReport report;
    for (const auto& [key, acc] : pooled) {
        report.overall.push_back(acc.row(std::get<0>(key), std::get<1>(key), std::nullopt));
    }
    for (const auto& [key, acc] : by_hour) {
        report.hourly.push_back(acc.row(std::get<0>(key), std::get<1>(key), std::get<2>(key)));
    }
    return report;
}

void write_report_csv(std::ostream& out, std::span<const EvalRow> rows) {
    out << "method,alpha,hour,picp,aiw,n\n";
    for (const auto& row : rows) {
        out << to_string(row.method) << ',' << format_real(row.alpha) << ','
            << (row.hour ? std::to_string(*row.hour) : std::string("all")) << ',' << format_real(row.picp) << ','
            << format_real(row.aiw) << ',' << row.n << '\n';
    }
}

void print_report_table(std::ostream& out, std::span<const EvalRow> rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %6s %6s %8s %14s %8s\n", "method", "alpha", "hour", "picp", "aiw", "n");
    out << line;
    for (const auto& row : rows) {
        const std::string hour = row.hour ? std::to_string(*row.hour) : std::string("all");
        std::snprintf(line, sizeof line, "%-8s %6.2f %6s %8.1f %14.1f %8lld\n", std::string(to_string(row.method)).c_str(),
                      row.alpha, hour.c_str(), row.picp, row.aiw, row.n);
        out << line;
    }
}

void write_intervals_csv(std::ostream& out, std::span<const IntervalRecord> records) {
    out << "timestamp,method,alpha,lo,hi,actual_total,covered\n";
    for (const auto& r : records) {
        out << format_timestamp(r.time) << ',' << to_string(r.method) << ',' << format_real(r.alpha) << ','
            << format_real(r.lo) << ',' << format_real(r.hi) << ',' << format_real(r.actual_total) << ','
            << (r.covered() ? 1 : 0) << '\n';
    }
}

}  // namespace fleetagg
