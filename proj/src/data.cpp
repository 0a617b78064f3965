#include "fleetagg/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <zlib.h>

#include "fleetagg/model_io.hpp"

namespace fleetagg {

FilterScope parse_filter_scope(std::string_view name) {
    if (name == "fleet") return FilterScope::fleet;
    if (name == "site") return FilterScope::site;
    throw std::invalid_argument("unknown filter scope '" + std::string(name) + "' (expected fleet or site)");
}

HourlyAlignment parse_hourly_alignment(std::string_view name) {
    if (name == "mean") return HourlyAlignment::mean;
    if (name == "on-the-hour") return HourlyAlignment::on_the_hour;
    throw std::invalid_argument("unknown hourly alignment '" + std::string(name) + "' (expected mean or on-the-hour)");
}

void DatasetConfig::validate() const {
    if (!(low_gen_threshold >= 0.0 && low_gen_threshold < 1.0)) {
        throw std::invalid_argument("low-generation threshold must lie in [0,1)");
    }
    if (train_months < 1) {
        throw std::invalid_argument("train_months must be at least 1");
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    if (path.extension() == ".gz") {
        gzFile file = gzopen(path.string().c_str(), "rb");
        if (!file) {
            throw std::runtime_error("cannot open " + path.string());
        }
        std::string text;
        char buf[1 << 16];
        int got = 0;
        while ((got = gzread(file, buf, sizeof buf)) > 0) {
            text.append(buf, static_cast<std::size_t>(got));
        }
        const bool failed = got < 0;
        gzclose(file);
        if (failed) {
            throw std::runtime_error("gzip read error in " + path.string());
        }
        return text;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Iterates non-empty lines with 1-based line numbers.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t start = 0;
    int number = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++number;
        const std::string_view line = trim(text.substr(start, end - start));
        if (!line.empty()) {
            fn(line, number);
        }
        start = end + 1;
    }
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view field, int line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
        fail(line, "invalid number '" + std::string(field) + "'");
    }
    return v;
}

Timestamp parse_time_field(std::string_view field, int line) {
    try {
        return parse_timestamp(field);
    } catch (const std::invalid_argument& e) {
        fail(line, e.what());
    }
}

void expect_header(std::string_view line, std::initializer_list<std::string_view> names, int number) {
    const auto fields = split_fields(line);
    if (fields.size() < names.size()) {
        fail(number, "header has too few columns");
    }
    std::size_t k = 0;
    for (auto name : names) {
        if (fields[k] != name) {
            fail(number, "expected header column '" + std::string(name) + "', found '" + std::string(fields[k]) + "'");
        }
        ++k;
    }
}

std::string quantile_column(std::size_t k, std::size_t count) {
    const std::size_t width = std::max<std::size_t>(2, std::to_string(count).size());
    std::string digits = std::to_string(k + 1);
    return "q" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

ActualsLoad parse_actuals(std::string_view text, HourlyAlignment alignment) {
    struct Bucket {
        double sum = 0.0;
        int count = 0;
    };
    std::map<std::string, std::map<Timestamp, Bucket>> by_site;
    std::set<std::pair<std::string, Timestamp::rep>> seen;
    std::set<Timestamp> hours;
    std::vector<std::string> warnings;
    bool header = true;

    for_each_line(text, [&](std::string_view line, int number) {
        if (header) {
            expect_header(line, {"site_id", "timestamp_utc", "mw"}, number);
            header = false;
            return;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 3) {
            fail(number, "expected 3 columns, found " + std::to_string(fields.size()));
        }
        std::string site(fields[0]);
        if (site.empty()) {
            fail(number, "empty site_id");
        }
        const Timestamp t = parse_time_field(fields[1], number);
        double mw = parse_number(fields[2], number);
        if (!seen.emplace(site, t.time_since_epoch().count()).second) {
            fail(number, "duplicate record for (" + site + ", " + format_timestamp(t) + ")");
        }
        if (mw < 0.0) {
            warnings.push_back("line " + std::to_string(number) + ": negative generation " + std::string(fields[2]) +
                               " at (" + site + ", " + format_timestamp(t) + ") clamped to 0");
            mw = 0.0;
        }
        const Timestamp hour = std::chrono::floor<std::chrono::hours>(t);
        if (alignment == HourlyAlignment::on_the_hour && hour != t) {
            return;
        }
        auto& bucket = by_site[site][hour];
        bucket.sum += mw;
        ++bucket.count;
        hours.insert(hour);
    });
    if (header) {
        throw std::runtime_error("actuals file is empty");
    }

    ActualsLoad out;
    auto& panel = out.panel;
    for (const auto& [site, _] : by_site) {
        panel.sites.push_back(site);
    }
    panel.times.assign(hours.begin(), hours.end());
    std::unordered_map<Timestamp::rep, Eigen::Index> column;
    for (std::size_t t = 0; t < panel.times.size(); ++t) {
        column.emplace(panel.times[t].time_since_epoch().count(), static_cast<Eigen::Index>(t));
    }
    panel.x = Eigen::MatrixXd::Constant(panel.n_sites(), panel.n_times(), std::numeric_limits<double>::quiet_NaN());
    Eigen::Index i = 0;
    for (const auto& [site, buckets] : by_site) {
        for (const auto& [hour, bucket] : buckets) {
            panel.x(i, column.at(hour.time_since_epoch().count())) = bucket.sum / double(bucket.count);
        }
        ++i;
    }
    out.warnings = std::move(warnings);
    return out;
}

ActualsLoad load_actuals(const std::filesystem::path& path, HourlyAlignment alignment) {
    try {
        return parse_actuals(read_text_file(path), alignment);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

CapacityMap parse_capacities(std::string_view text) {
    CapacityMap out;
    bool header = true;
    for_each_line(text, [&](std::string_view line, int number) {
        if (header) {
            expect_header(line, {"site_id", "capacity_mw"}, number);
            header = false;
            return;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            fail(number, "expected 2 columns");
        }
        const double cap = parse_number(fields[1], number);
        if (!(cap > 0.0)) {
            fail(number, "capacity must be positive");
        }
        if (!out.emplace(std::string(fields[0]), cap).second) {
            fail(number, "duplicate capacity for site " + std::string(fields[0]));
        }
    });
    return out;
}

CapacityMap load_capacities(const std::filesystem::path& path) {
    try {
        return parse_capacities(read_text_file(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void apply_capacities(ActualsPanel& panel, const CapacityMap& capacities) {
    Eigen::VectorXd cap(panel.n_sites());
    for (Eigen::Index i = 0; i < panel.n_sites(); ++i) {
        auto it = capacities.find(panel.sites[static_cast<std::size_t>(i)]);
        if (it == capacities.end()) {
            throw std::invalid_argument("no capacity given for site " + panel.sites[static_cast<std::size_t>(i)]);
        }
        cap(i) = it->second;
    }
    panel.capacity = std::move(cap);
}

ForecastLoad parse_forecasts(std::string_view text, const QuantileGrid& grid, const CapacityMap* capacities) {
    struct Row {
        std::string site;
        Timestamp time;
        std::vector<double> values;
        int line;
    };
    std::vector<Row> rows;
    bool header = true;
    const std::size_t k = grid.size();
    for_each_line(text, [&](std::string_view line, int number) {
        const auto fields = split_fields(line);
        if (fields.size() != k + 2) {
            fail(number, "found " + std::to_string(fields.size() - 2) + " quantile columns, grid has " +
                             std::to_string(k));
        }
        if (header) {
            expect_header(line, {"site_id", "target_time"}, number);
            header = false;
            return;
        }
        Row row{std::string(fields[0]), parse_time_field(fields[1], number), std::vector<double>(k), number};
        for (std::size_t q = 0; q < k; ++q) {
            row.values[q] = parse_number(fields[q + 2], number);
        }
        rows.push_back(std::move(row));
    });
    if (header) {
        throw std::runtime_error("forecast file is empty");
    }

    std::set<std::string> site_set;
    std::set<Timestamp> time_set;
    for (const auto& r : rows) {
        site_set.insert(r.site);
        time_set.insert(r.time);
    }
    std::vector<std::string> sites(site_set.begin(), site_set.end());
    std::vector<Timestamp> times(time_set.begin(), time_set.end());
    std::unordered_map<std::string, Eigen::Index> site_index;
    for (std::size_t i = 0; i < sites.size(); ++i) site_index.emplace(sites[i], static_cast<Eigen::Index>(i));
    std::unordered_map<Timestamp::rep, Eigen::Index> time_index;
    for (std::size_t t = 0; t < times.size(); ++t)
        time_index.emplace(times[t].time_since_epoch().count(), static_cast<Eigen::Index>(t));

    ForecastLoad out{ForecastPanel(std::move(sites), std::move(times), grid), 0};
    for (const auto& r : rows) {
        const Eigen::Index i = site_index.at(r.site);
        const Eigen::Index t = time_index.at(r.time.time_since_epoch().count());
        if (out.panel.present(i, t)) {
            fail(r.line, "duplicate forecast for (" + r.site + ", " + format_timestamp(r.time) + ")");
        }
        if (!std::is_sorted(r.values.begin(), r.values.end())) {
            ++out.repaired_rows;
        }
        const double lo = std::min(0.0, r.values.front());
        std::optional<double> hi;
        if (capacities) {
            if (auto it = capacities->find(r.site); it != capacities->end()) {
                hi = std::max(it->second, *std::max_element(r.values.begin(), r.values.end()));
            }
        }
        try {
            out.panel.set(i, t, QuantileForecast(grid, r.values, lo, hi));
        } catch (const std::invalid_argument& e) {
            fail(r.line, e.what());
        }
    }
    return out;
}

ForecastLoad load_forecasts(const std::filesystem::path& path, const QuantileGrid& grid,
                            const CapacityMap* capacities) {
    try {
        return parse_forecasts(read_text_file(path), grid, capacities);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

ForecastPanel align_forecasts(const ForecastPanel& forecasts, const ActualsPanel& actuals) {
    const std::set<std::string> have(forecasts.sites().begin(), forecasts.sites().end());
    const std::set<std::string> want(actuals.sites.begin(), actuals.sites.end());
    std::string problems;
    for (const auto& s : want) {
        if (!have.count(s)) problems += " site '" + s + "' has actuals but no forecasts;";
    }
    for (const auto& s : have) {
        if (!want.count(s)) problems += " site '" + s + "' has forecasts but no actuals;";
    }
    if (!problems.empty()) {
        problems.pop_back();
        throw std::invalid_argument("actuals and forecasts do not cover the same sites:" + problems);
    }
    return forecasts.reindex(actuals.sites, actuals.times);
}

std::vector<Timestamp> filter_daylight(const ActualsPanel& actuals, double threshold, FilterScope scope) {
    if (!(threshold >= 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("filter_daylight: threshold must lie in [0,1)");
    }
    const Eigen::VectorXd cap = actuals.effective_capacity();
    if (!(cap.sum() > 0.0)) {
        throw std::invalid_argument("filter_daylight: fleet capacity is zero");
    }
    std::vector<Timestamp> kept;
    for (Eigen::Index t = 0; t < actuals.n_times(); ++t) {
        bool keep = true;
        if (scope == FilterScope::fleet) {
            keep = actuals.fleet_total(t) >= threshold * cap.sum();
        } else {
            bool any = false;
            for (Eigen::Index i = 0; i < actuals.n_sites() && keep; ++i) {
                if (actuals.present(i, t)) {
                    any = true;
                    keep = actuals.x(i, t) >= threshold * cap(i);
                }
            }
            keep = keep && any;
        }
        if (keep) {
            kept.push_back(actuals.times[static_cast<std::size_t>(t)]);
        }
    }
    return kept;
}

TrainTestSplit split_train_test(std::span<const Timestamp> times, int train_months) {
    using namespace std::chrono;
    if (train_months < 1) {
        throw std::invalid_argument("split_train_test: train_months must be at least 1");
    }
    std::vector<Timestamp> sorted(times.begin(), times.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<year_month> months;
    for (Timestamp t : sorted) {
        const year_month_day ymd{floor<days>(t)};
        const year_month ym{ymd.year(), ymd.month()};
        if (months.empty() || months.back() != ym) {
            months.push_back(ym);
        }
    }
    if (months.size() < static_cast<std::size_t>(train_months) + 1) {
        throw std::invalid_argument("split_train_test: data spans " + std::to_string(months.size()) +
                                    " calendar months, need at least " + std::to_string(train_months + 1));
    }
    const year_month boundary = months[static_cast<std::size_t>(train_months)];
    TrainTestSplit out;
    for (Timestamp t : sorted) {
        const year_month_day ymd{floor<days>(t)};
        (year_month{ymd.year(), ymd.month()} < boundary ? out.train : out.test).push_back(t);
    }
    return out;
}

Dataset load_dataset(const DatasetConfig& config) {
    config.validate();
    ActualsLoad actuals = load_actuals(config.actuals_path, config.hourly_alignment);
    CapacityMap capacities;
    if (config.capacity_path) {
        capacities = load_capacities(*config.capacity_path);
        apply_capacities(actuals.panel, capacities);
    }
    ForecastLoad forecasts =
        load_forecasts(config.forecasts_path, config.quantile_grid, config.capacity_path ? &capacities : nullptr);
    ForecastPanel aligned = align_forecasts(forecasts.panel, actuals.panel);
    return {std::move(actuals.panel), std::move(aligned), std::move(actuals.warnings), forecasts.repaired_rows};
}

void write_actuals_csv(std::ostream& out, const ActualsPanel& panel) {
    out << "site_id,timestamp_utc,mw\n";
    for (Eigen::Index i = 0; i < panel.n_sites(); ++i) {
        for (Eigen::Index t = 0; t < panel.n_times(); ++t) {
            if (panel.present(i, t)) {
                out << panel.sites[static_cast<std::size_t>(i)] << ',' << format_timestamp(panel.times[static_cast<std::size_t>(t)])
                    << ',' << format_real(panel.x(i, t)) << '\n';
            }
        }
    }
}

void write_forecasts_csv(std::ostream& out, const ForecastPanel& panel) {
    const std::size_t k = panel.grid().size();
    out << "site_id,target_time";
    for (std::size_t q = 0; q < k; ++q) {
        out << ',' << quantile_column(q, k);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < panel.n_sites(); ++i) {
        for (Eigen::Index t = 0; t < panel.n_times(); ++t) {
            auto v = panel.view(i, t);
            if (!v) continue;
            out << panel.sites()[static_cast<std::size_t>(i)] << ','
                << format_timestamp(panel.times()[static_cast<std::size_t>(t)]);
            for (double value : v->values) {
                out << ',' << format_real(value);
            }
            out << '\n';
        }
    }
}

void write_capacity_csv(std::ostream& out, std::span<const std::string> sites, const Eigen::VectorXd& capacity) {
    out << "site_id,capacity_mw\n";
    for (std::size_t i = 0; i < sites.size(); ++i) {
        out << sites[i] << ',' << format_real(capacity(static_cast<Eigen::Index>(i))) << '\n';
    }
}

void write_matrix_csv(std::ostream& out, std::span<const std::string> labels, const Eigen::MatrixXd& m) {
    out << "site_id";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_real(m(i, j));
        out << '\n';
    }
}

}  // namespace fleetagg
