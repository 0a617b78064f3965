#include "fleetagg/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace fleetagg {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
    if (pos + count > text.size()) {
        throw std::invalid_argument("truncated timestamp");
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
    if (ec != std::errc() || ptr != text.data() + pos + count) {
        throw std::invalid_argument("bad digits");
    }
    return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || (text[pos] != c && !(c == 'T' && (text[pos] == 't' || text[pos] == ' ')))) {
        throw std::invalid_argument("unexpected character");
    }
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    try {
        const int y = parse_digits(text, 0, 4);
        expect(text, 4, '-');
        const int mo = parse_digits(text, 5, 2);
        expect(text, 7, '-');
        const int d = parse_digits(text, 8, 2);
        expect(text, 10, 'T');
        const int hh = parse_digits(text, 11, 2);
        expect(text, 13, ':');
        const int mm = parse_digits(text, 14, 2);
        expect(text, 16, ':');
        const int ss = parse_digits(text, 17, 2);
        std::size_t pos = 19;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                ++pos;
            }
        }
        int offset_minutes = 0;
        if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
            ++pos;
        } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            const int sign = text[pos] == '-' ? -1 : 1;
            const int oh = parse_digits(text, pos + 1, 2);
            expect(text, pos + 3, ':');
            const int om = parse_digits(text, pos + 4, 2);
            offset_minutes = sign * (oh * 60 + om);
            pos += 6;
        } else {
            throw std::invalid_argument("missing UTC offset");
        }
        if (pos != text.size()) {
            throw std::invalid_argument("trailing characters");
        }
        const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
        if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
            throw std::invalid_argument("field out of range");
        }
        return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("invalid RFC-3339 timestamp '" + std::string(text) + "': " + e.what());
    }
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_start = floor<days>(t);
    const year_month_day ymd{day_start};
    const hh_mm_ss hms{t - day_start};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()), int(hms.hours().count()), int(hms.minutes().count()),
                  int(hms.seconds().count()));
    return buf;
}

int hour_of_day(Timestamp t) {
    using namespace std::chrono;
    return static_cast<int>(floor<hours>(t - floor<days>(t)).count());
}

Eigen::VectorXd ActualsPanel::effective_capacity() const {
    if (capacity) {
        return *capacity;
    }
    Eigen::VectorXd cap = Eigen::VectorXd::Zero(n_sites());
    for (Eigen::Index i = 0; i < n_sites(); ++i) {
        for (Eigen::Index t = 0; t < n_times(); ++t) {
            if (present(i, t)) {
                cap(i) = std::max(cap(i), x(i, t));
            }
        }
    }
    return cap;
}

ActualsPanel ActualsPanel::select_times(std::span<const Timestamp> keep) const {
    std::unordered_map<Timestamp::rep, Eigen::Index> index;
    for (Eigen::Index t = 0; t < n_times(); ++t) {
        index.emplace(times[t].time_since_epoch().count(), t);
    }
    ActualsPanel out;
    out.sites = sites;
    out.times.assign(keep.begin(), keep.end());
    out.x.resize(n_sites(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        auto it = index.find(keep[c].time_since_epoch().count());
        if (it == index.end()) {
            throw std::invalid_argument("select_times: timestamp " + format_timestamp(keep[c]) + " not in panel");
        }
        out.x.col(static_cast<Eigen::Index>(c)) = x.col(it->second);
    }
    out.capacity = effective_capacity();
    return out;
}

double ActualsPanel::fleet_total(Eigen::Index t) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n_sites(); ++i) {
        if (present(i, t)) {
            total += x(i, t);
        }
    }
    return total;
}

ForecastPanel::ForecastPanel(std::vector<std::string> sites, std::vector<Timestamp> times, QuantileGrid grid)
    : sites_(std::move(sites)), times_(std::move(times)), grid_(std::move(grid)) {
    const std::size_t cells = sites_.size() * times_.size();
    values_.assign(cells * grid_.size(), 0.0);
    lo_.assign(cells, 0.0);
    hi_.assign(cells, 0.0);
    present_.assign(cells, 0);
}

std::optional<QuantileView> ForecastPanel::view(Eigen::Index i, Eigen::Index t) const {
    const std::size_t c = cell(i, t);
    if (!present_[c]) {
        return std::nullopt;
    }
    const std::size_t k = grid_.size();
    return QuantileView{&grid_, std::span<const double>(values_.data() + c * k, k), lo_[c], hi_[c]};
}

QuantileForecast ForecastPanel::forecast(Eigen::Index i, Eigen::Index t) const {
    auto v = view(i, t);
    if (!v) {
        throw std::out_of_range("forecast cell (" + sites_[static_cast<std::size_t>(i)] + ", " +
                                format_timestamp(times_[static_cast<std::size_t>(t)]) + ") is missing");
    }
    return QuantileForecast(grid_, v->values, v->support_lo, v->support_hi);
}

void ForecastPanel::set(Eigen::Index i, Eigen::Index t, const QuantileForecast& f) {
    if (!(f.grid() == grid_)) {
        throw std::invalid_argument("forecast grid differs from the panel grid");
    }
    const std::size_t c = cell(i, t);
    std::copy(f.values().begin(), f.values().end(), values_.begin() + static_cast<std::ptrdiff_t>(c * grid_.size()));
    lo_[c] = f.support_lo();
    hi_[c] = f.support_hi();
    present_[c] = 1;
}

void ForecastPanel::clear(Eigen::Index i, Eigen::Index t) { present_[cell(i, t)] = 0; }

ForecastPanel ForecastPanel::reindex(std::span<const std::string> sites, std::span<const Timestamp> times) const {
    std::unordered_map<std::string, Eigen::Index> site_index;
    for (Eigen::Index i = 0; i < n_sites(); ++i) {
        site_index.emplace(sites_[static_cast<std::size_t>(i)], i);
    }
    std::unordered_map<Timestamp::rep, Eigen::Index> time_index;
    for (Eigen::Index t = 0; t < n_times(); ++t) {
        time_index.emplace(times_[static_cast<std::size_t>(t)].time_since_epoch().count(), t);
    }
    ForecastPanel out({sites.begin(), sites.end()}, {times.begin(), times.end()}, grid_);
    const std::size_t k = grid_.size();
    for (std::size_t tt = 0; tt < times.size(); ++tt) {
        auto ti = time_index.find(times[tt].time_since_epoch().count());
        if (ti == time_index.end()) {
            continue;
        }
        for (std::size_t ii = 0; ii < sites.size(); ++ii) {
            auto si = site_index.find(sites[ii]);
            if (si == site_index.end()) {
                continue;
            }
            const std::size_t src = cell(si->second, ti->second);
            if (!present_[src]) {
                continue;
            }
            const std::size_t dst = out.cell(static_cast<Eigen::Index>(ii), static_cast<Eigen::Index>(tt));
            std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(src * k), k,
                        out.values_.begin() + static_cast<std::ptrdiff_t>(dst * k));
            out.lo_[dst] = lo_[src];
            out.hi_[dst] = hi_[src];
            out.present_[dst] = 1;
        }
    }
    return out;
}

}  // namespace fleetagg
