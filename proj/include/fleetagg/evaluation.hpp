#ifndef FLEETAGG_EVALUATION_HPP
#define FLEETAGG_EVALUATION_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fleetagg/aggregate.hpp"
#include "fleetagg/metrics.hpp"

namespace fleetagg {

struct EvaluationOptions {
    std::vector<Method> methods{Method::copula, Method::indep, Method::qsum};
    std::vector<double> alphas{kDefaultAlphas.begin(), kDefaultAlphas.end()};
    Eigen::Index s_count = kDefaultSampleCount;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool keep_samples = false;
};

struct EvaluationResult {
    /// Sorted by time, then method order as requested, then alpha.
    std::vector<IntervalRecord> records;
    std::vector<FleetSampleSet> samples;  // only with keep_samples
    Eigen::Index skipped_times = 0;       // incomplete actuals or forecasts
};

/// Stream seed for one target time: every time draws from its own
/// substream, so results do not depend on the thread count. Copula and
/// indep share the stream (common random numbers).
std::uint64_t time_stream_seed(std::uint64_t seed, Timestamp time);

/// Issues intervals for every requested method and alpha at each column of
/// the panels and scores them against the fleet total. Columns with any
/// missing actual or forecast are skipped and counted.
EvaluationResult evaluate_methods(const CopulaModel& model, const ActualsPanel& actuals,
                                  const ForecastPanel& forecasts, const EvaluationOptions& options);

/// CSV with header timestamp,method,seed,sample_index,mw.
void write_samples_csv(std::ostream& out, const std::vector<FleetSampleSet>& samples);

}  // namespace fleetagg

#endif  // FLEETAGG_EVALUATION_HPP
