#include "fleetagg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fleetagg/model_io.hpp"

namespace fleetagg {

std::uint64_t time_stream_seed(std::uint64_t seed, Timestamp time) {
    return substream_seed(seed, static_cast<std::uint64_t>(time.time_since_epoch().count()));
}

namespace {

struct TimeResult {
    bool skipped = false;
    std::vector<IntervalRecord> records;
    std::vector<FleetSampleSet> samples;
};

TimeResult evaluate_time(const CopulaModel& model, const ActualsPanel& actuals, const ForecastPanel& forecasts,
                         Eigen::Index t, const EvaluationOptions& options) {
    TimeResult out;
    const Eigen::Index n = model.n_sites();
    std::vector<std::optional<QuantileView>> views(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!actuals.present(i, t)) {
            out.skipped = true;
            return out;
        }
        views[static_cast<std::size_t>(i)] = forecasts.view(i, t);
        if (!views[static_cast<std::size_t>(i)]) {
            out.skipped = true;
            return out;
        }
    }
    const Timestamp time = actuals.times[static_cast<std::size_t>(t)];
    const double total = actuals.fleet_total(t);
    const std::uint64_t stream = time_stream_seed(options.seed, time);

    for (Method method : options.methods) {
        std::vector<Interval> intervals;
        if (method == Method::qsum) {
            const QuantileAggregate agg = qsum_aggregate(views, time);
            for (double alpha : options.alphas) intervals.push_back(prediction_interval(agg, alpha));
        } else {
            FleetSampleSet set = method == Method::copula
                                     ? copula_aggregate(views, model, options.s_count, stream, time)
                                     : indep_aggregate(views, options.s_count, stream, time, model.sites);
            for (double alpha : options.alphas) intervals.push_back(prediction_interval(set, alpha));
            if (options.keep_samples) out.samples.push_back(std::move(set));
        }
        for (std::size_t a = 0; a < options.alphas.size(); ++a) {
            out.records.push_back({time, method, options.alphas[a], intervals[a].lo, intervals[a].hi, total});
        }
    }
    return out;
}

}  // namespace

EvaluationResult evaluate_methods(const CopulaModel& model, const ActualsPanel& actuals,
                                  const ForecastPanel& forecasts, const EvaluationOptions& options) {
    if (actuals.sites != model.sites || forecasts.sites() != model.sites) {
        throw std::invalid_argument("evaluate: panels and model must list the same sites in the same order");
    }
    if (actuals.times != forecasts.times()) {
        throw std::invalid_argument("evaluate: actuals and forecasts are not aligned in time");
    }
    if (options.methods.empty() || options.alphas.empty()) {
        throw std::invalid_argument("evaluate: need at least one method and one alpha");
    }
    for (double alpha : options.alphas) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("evaluate: alpha must lie in (0,1)");
        }
    }
    if (options.s_count < 1) {
        throw std::invalid_argument("evaluate: sample count must be at least 1");
    }

    const auto t_count = static_cast<std::size_t>(actuals.n_times());
    std::vector<TimeResult> per_time(t_count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < t_count; t = next++) {
            try {
                per_time[t] = evaluate_time(model, actuals, forecasts, static_cast<Eigen::Index>(t), options);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = t_count;
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(t_count)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    // Output order follows the chronological column order.
    std::vector<std::size_t> order(t_count);
    for (std::size_t t = 0; t < t_count; ++t) order[t] = t;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return actuals.times[a] < actuals.times[b]; });

    EvaluationResult result;
    for (std::size_t t : order) {
        auto& r = per_time[t];
        if (r.skipped) {
            ++result.skipped_times;
            continue;
        }
        result.records.insert(result.records.end(), r.records.begin(), r.records.end());
        for (auto& s : r.samples) result.samples.push_back(std::move(s));
    }
    return result;
}

void write_samples_csv(std::ostream& out, const std::vector<FleetSampleSet>& samples) {
    out << "timestamp,method,seed,sample_index,mw\n";
    for (const auto& set : samples) {
        const std::string time = format_timestamp(set.time);
        for (std::size_t s = 0; s < set.samples.size(); ++s) {
            out << time << ',' << to_string(set.method) << ',' << set.seed << ',' << s << ','
                << format_real(set.samples[s]) << '\n';
        }
    }
}

}  // namespace fleetagg
