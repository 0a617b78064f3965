#include "fleetagg/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fleetagg/copula.hpp"
#include "fleetagg/data.hpp"
#include "fleetagg/evaluation.hpp"
#include "fleetagg/manifest.hpp"
#include "fleetagg/metrics.hpp"
#include "fleetagg/model_io.hpp"
#include "fleetagg/synth.hpp"
#include "fleetagg/version.hpp"

namespace fleetagg::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthArgs {
    long long sites = 20;
    long long days = 30;
    double rho = 0.5;
    long long block_size = 0;
    double rho_between = 0.0;
    double width_scale = 1.0;
    double bias = 0.0;
    std::uint64_t seed = 0;
    std::size_t quantiles = 99;
    bool no_weather = false;
    std::string start = "2019-01-01T00:00:00Z";
    std::string out = ".";
};

struct DataArgs {
    std::string actuals;
    std::string forecasts;
    std::string capacity;
    double threshold = 0.04;
    int train_months = 11;
    std::string filter_scope = "fleet";
    std::string hourly_alignment = "mean";
    std::size_t quantiles = 99;
};

struct FitArgs {
    DataArgs data;
    std::string out;
    double clamp_eps = 0.005;
    bool allow_rank_deficient = false;
};

struct EvaluateArgs {
    DataArgs data;
    std::string model;
    std::string out_dir = ".";
    std::vector<std::string> methods{"copula", "indep", "qsum"};
    std::vector<double> alphas{kDefaultAlphas.begin(), kDefaultAlphas.end()};
    long long samples = kDefaultSampleCount;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool export_samples = false;
    bool all_times = false;
};

const CLI::Validator kOpenUnit = CLI::Validator(
    [](std::string& s) -> std::string {
        const double v = std::stod(s);
        return (v > 0.0 && v < 1.0) ? std::string() : "value must lie strictly between 0 and 1";
    },
    "(0,1)");

const CLI::Validator kHalfOpenUnit = CLI::Validator(
    [](std::string& s) -> std::string {
        const double v = std::stod(s);
        return (v >= 0.0 && v < 1.0) ? std::string() : "value must lie in [0,1)";
    },
    "[0,1)");

void add_data_options(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("--actuals", a.actuals, "Actuals CSV (site_id,timestamp_utc,mw), .gz accepted")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--forecasts", a.forecasts, "Quantile forecasts CSV (site_id,target_time,q01..qK)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--capacity", a.capacity, "Site capacities CSV (site_id,capacity_mw)")->check(CLI::ExistingFile);
    cmd->add_option("--threshold", a.threshold, "Low-generation filter, fraction of capacity")
        ->capture_default_str()
        ->check(kHalfOpenUnit);
    cmd->add_option("--train-months", a.train_months, "Calendar months used for fitting")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--filter-scope", a.filter_scope, "Low-generation filter scope")
        ->capture_default_str()
        ->check(CLI::IsMember({"fleet", "site"}));
    cmd->add_option("--hourly-alignment", a.hourly_alignment, "Sub-hourly actuals: hourly mean or on-the-hour reading")
        ->capture_default_str()
        ->check(CLI::IsMember({"mean", "on-the-hour"}));
    cmd->add_option("--quantiles", a.quantiles, "Number of evenly spaced quantile levels per forecast")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{10000}));
}

DatasetConfig dataset_config(const DataArgs& a) {
    DatasetConfig cfg;
    cfg.actuals_path = a.actuals;
    cfg.forecasts_path = a.forecasts;
    if (!a.capacity.empty()) cfg.capacity_path = a.capacity;
    cfg.low_gen_threshold = a.threshold;
    cfg.train_months = a.train_months;
    cfg.quantile_grid = QuantileGrid::percentiles(a.quantiles);
    cfg.filter_scope = parse_filter_scope(a.filter_scope);
    cfg.hourly_alignment = parse_hourly_alignment(a.hourly_alignment);
    return cfg;
}

std::vector<fs::path> input_paths(const DataArgs& a) {
    std::vector<fs::path> out{a.actuals, a.forecasts};
    if (!a.capacity.empty()) out.emplace_back(a.capacity);
    return out;
}

struct Period {
    ActualsPanel actuals;
    ForecastPanel forecasts;
};

// Filtered train or test period of a dataset.
Period select_period(const Dataset& data, const DatasetConfig& cfg, bool train, bool all_times, std::ostream& err) {
    for (const auto& w : data.warnings) err << "warning: " << w << '\n';
    if (data.repaired_rows > 0) {
        err << "notice: repaired quantile crossing in " << data.repaired_rows << " forecast rows\n";
    }
    const auto kept = filter_daylight(data.actuals, cfg.low_gen_threshold, cfg.filter_scope);
    std::vector<Timestamp> times;
    if (all_times) {
        times = kept;
    } else {
        auto split = split_train_test(kept, cfg.train_months);
        times = train ? std::move(split.train) : std::move(split.test);
    }
    ActualsPanel actuals = data.actuals.select_times(times);
    ForecastPanel forecasts = data.forecasts.reindex(actuals.sites, actuals.times);
    return {std::move(actuals), std::move(forecasts)};
}

void ensure_dir(const fs::path& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_synth(const SynthArgs& a, const std::string& config, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    SynthConfig cfg;
    cfg.n_sites = a.sites;
    cfg.n_times = a.days * 24;
    if (a.block_size > 0) {
        cfg.correlation = BlockCorrelation{a.block_size, a.rho, a.rho_between};
    } else {
        cfg.correlation = Equicorrelated{a.rho};
    }
    cfg.daily_weather = !a.no_weather;
    cfg.miscalibration = {a.width_scale, a.bias};
    cfg.seed = a.seed;
    cfg.start = parse_timestamp(a.start);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const fs::path dir(a.out);
    ensure_dir(dir);
    const SynthTruth truth = generate_truth(cfg);
    const ForecastPanel forecasts = generate_forecasts(cfg, QuantileGrid::percentiles(a.quantiles));
    const std::vector<fs::path> outputs{dir / "actuals.csv", dir / "forecasts.csv", dir / "truth_sigma.csv",
                                        dir / "capacity.csv"};
    write_file(outputs[0], [&](std::ostream& os) { write_actuals_csv(os, truth.actuals); });
    write_file(outputs[1], [&](std::ostream& os) { write_forecasts_csv(os, forecasts); });
    write_file(outputs[2], [&](std::ostream& os) { write_matrix_csv(os, truth.actuals.sites, truth.true_sigma); });
    write_file(outputs[3], [&](std::ostream& os) { write_capacity_csv(os, truth.actuals.sites, *truth.actuals.capacity); });

    RunManifest manifest{"synth", config, a.seed, {}, outputs, seconds_since(start), std::string(kVersion)};
    manifest.write(dir / "manifest-synth.json");
    out << "wrote " << cfg.n_sites << " sites x " << cfg.n_times << " hours to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_fit(const FitArgs& a, const std::string& config, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const DatasetConfig cfg = dataset_config(a.data);
    const Dataset data = load_dataset(cfg);
    const Period train = select_period(data, cfg, true, false, err);

    FitOptions options;
    options.clamp_eps = a.clamp_eps;
    options.allow_rank_deficient = a.allow_rank_deficient;
    const CopulaModel model = fit_copula(train.actuals, train.forecasts, options);

    const fs::path model_path(a.out);
    ensure_dir(model_path.parent_path());
    write_model(model_path, model);

    const auto& d = model.diagnostics;
    out << "sites: " << model.n_sites() << '\n'
        << "t_used: " << d.t_used << '\n'
        << "clamp_rate: " << d.clamp_rate << '\n'
        << "psd_repair_applied: " << (d.psd_repair_applied ? "true" : "false") << '\n'
        << "min_eigenvalue_before_repair: " << d.min_eigenvalue_before_repair << '\n'
        << "jitter_used: " << model.factor.jitter_used << '\n'
        << "max_abs_z_mean: " << (d.z_mean.size() ? d.z_mean.cwiseAbs().maxCoeff() : 0.0) << '\n';

    RunManifest manifest{"fit", config, std::nullopt, input_paths(a.data), {model_path}, seconds_since(start), std::string(kVersion)};
    const fs::path dir = model_path.parent_path().empty() ? fs::path(".") : model_path.parent_path();
    manifest.write(dir / "manifest-fit.json");
    return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, bool seed_given, const std::string& config, std::ostream& out,
                 std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    EvaluationOptions options;
    options.methods.clear();
    for (const auto& name : a.methods) {
        try {
            options.methods.push_back(parse_method(name));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    options.alphas = a.alphas;
    options.s_count = a.samples;
    options.seed = a.seed;
    options.threads = a.threads;
    options.keep_samples = a.export_samples;
    const bool samples_needed = std::any_of(options.methods.begin(), options.methods.end(),
                                            [](Method m) { return m != Method::qsum; });
    if (!samples_needed && seed_given) {
        err << "notice: --seed ignored, qsum draws no random numbers\n";
    }

    const CopulaModel model = read_model(fs::path(a.model));
    const DatasetConfig cfg = dataset_config(a.data);
    const Dataset data = load_dataset(cfg);
    if (data.actuals.sites != model.sites) {
        throw std::runtime_error("model sites do not match the sites in the data files");
    }
    const Period test = select_period(data, cfg, false, a.all_times, err);
    const EvaluationResult result = evaluate_methods(model, test.actuals, test.forecasts, options);
    if (result.skipped_times > 0) {
        err << "notice: skipped " << result.skipped_times << " timestamps with incomplete actuals or forecasts\n";
    }
    if (result.records.empty()) {
        throw std::runtime_error("no timestamps left to evaluate");
    }
    const EvalReport report = hourly_report(result.records);

    const fs::path dir(a.out_dir);
    ensure_dir(dir);
    std::vector<fs::path> outputs{dir / "intervals.csv", dir / "report.csv", dir / "hourly_report.csv"};
    write_file(outputs[0], [&](std::ostream& os) { write_intervals_csv(os, result.records); });
    write_file(outputs[1], [&](std::ostream& os) { write_report_csv(os, report.overall); });
    write_file(outputs[2], [&](std::ostream& os) {
        std::vector<EvalRow> rows = report.hourly;
        rows.insert(rows.end(), report.overall.begin(), report.overall.end());
        write_report_csv(os, rows);
    });
    if (a.export_samples) {
        outputs.push_back(dir / "samples.csv");
        write_file(outputs.back(), [&](std::ostream& os) { write_samples_csv(os, result.samples); });
    }
    print_report_table(out, report.overall);

    std::vector<fs::path> inputs = input_paths(a.data);
    inputs.emplace_back(a.model);
    RunManifest manifest{"evaluate",
                         config,
                         samples_needed ? std::optional<std::uint64_t>(a.seed) : std::nullopt,
                         inputs,
                         outputs,
                         seconds_since(start),
                         std::string(kVersion)};
    manifest.write(dir / "manifest-evaluate.json");
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fleet-level probabilistic forecasts from site quantile forecasts via a Gaussian copula",
                 "fleetagg"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "Read options from a TOML/INI file (flags take precedence)");
    bool print_config = false;
    app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
    app.require_subcommand(0, 1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic fleet with a known Gaussian copula");
    synth_cmd->add_option("--sites", synth.sites, "Number of sites")->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--days", synth.days, "Number of days (24 hourly steps each)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--rho", synth.rho, "Latent correlation (within-block with --block-size)")
        ->capture_default_str()
        ->check(kHalfOpenUnit);
    synth_cmd->add_option("--block-size", synth.block_size, "Sites per correlation block (0: equicorrelated)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--rho-between", synth.rho_between, "Correlation across blocks")
        ->capture_default_str()
        ->check(kHalfOpenUnit);
    synth_cmd->add_option("--width-scale", synth.width_scale, "Scale forecast spread about the median")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--bias", synth.bias, "Shift forecasts by this fraction of capacity")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--quantiles", synth.quantiles, "Number of evenly spaced quantile levels")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{10000}));
    synth_cmd->add_flag("--no-weather", synth.no_weather, "Disable the per-day weather multiplier");
    synth_cmd->add_option("--start", synth.start, "First timestamp (RFC-3339, UTC)")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output directory")->capture_default_str();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the Gaussian copula on the training period");
    add_data_options(fit_cmd, fit.data);
    fit_cmd->add_option("--out", fit.out, "Model file to write")->required();
    fit_cmd->add_option("--clamp-eps", fit.clamp_eps, "PIT clamp before the probit")
        ->capture_default_str()
        ->check(CLI::Range(1e-12, 0.49));
    fit_cmd->add_flag("--allow-rank-deficient", fit.allow_rank_deficient,
                      "Fit even with fewer complete hours than sites + 1");

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score copula, indep and qsum intervals on the test period");
    add_data_options(eval_cmd, eval.data);
    eval_cmd->add_option("--model", eval.model, "Model file from fit")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out-dir", eval.out_dir, "Directory for reports")->capture_default_str();
    eval_cmd->add_option("--methods", eval.methods, "Comma-separated methods: copula,indep,qsum")
        ->delimiter(',')
        ->capture_default_str();
    eval_cmd->add_option("--alphas", eval.alphas, "Comma-separated miscoverage levels")
        ->delimiter(',')
        ->capture_default_str()
        ->check(kOpenUnit);
    eval_cmd->add_option("--samples", eval.samples, "Monte-Carlo samples per timestamp")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    auto* seed_opt = eval_cmd->add_option("--seed", eval.seed, "Random seed")->capture_default_str();
    eval_cmd->add_option("--threads", eval.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
    eval_cmd->add_flag("--export-samples", eval.export_samples, "Also write samples.csv");
    eval_cmd->add_flag("--all-times", eval.all_times, "Evaluate every filtered hour instead of the test period");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string config = app.config_to_str(true, false);
    if (print_config) {
        out << config;
        return kExitOk;
    }
    try {
        if (synth_cmd->parsed()) return cmd_synth(synth, config, out);
        if (fit_cmd->parsed()) return cmd_fit(fit, config, out, err);
        if (eval_cmd->parsed()) return cmd_evaluate(eval, seed_opt->count() > 0, config, out, err);
        err << app.help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace fleetagg::cli
