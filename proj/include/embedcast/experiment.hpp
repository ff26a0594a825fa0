#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embedcast/baselines.hpp"
#include "embedcast/dynamics.hpp"
#include "embedcast/ensemble.hpp"

namespace embedcast {

// Everything a run depends on. Loaded from a flat YAML mapping; keys are
// listed in README.md and echoed back into every report.
struct ExperimentConfig {
    // data source: a generator, or a CSV file when csv is set
    DatasetSpec dataset;
    std::optional<std::filesystem::path> csv;
    std::string target = "x0";
    std::string train_rows;  // row ranges; override train_length/test_length when set
    std::string test_rows;

    std::size_t lags = 4;
    std::size_t horizons = 10;
    std::size_t splits = 10;
    std::size_t per_split = 3;
    std::size_t theta = 3;
    std::vector<double> rhos{0.0, -0.2, -0.4, -0.6, -0.8, -1.0};
    EsConfig es;
    AnalogueConfig analogue;

    std::vector<std::string> baselines{"sbe", "mve"};
    BaselineConfig baseline;

    std::vector<std::uint64_t> seeds{1};
    std::size_t workers = 1;
    std::filesystem::path out = "out";

    // sweep only
    std::string sweep_axis;
    std::vector<double> sweep_values;

    // Throws ValidationError.
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& yaml_text);
// Flat YAML that load_config reads back into an identical config.
std::string dump_config(const ExperimentConfig& cfg);
nlohmann::json config_json(const ExperimentConfig& cfg);

// Dataset for one seed: generated (seeded) or ingested, with train/test set.
TimeSeriesSet make_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

struct MethodResult {
    std::string method;
    ForecastPanel test;                  // combined forecasts at every test origin
    std::vector<double> rmse;            // per horizon, NaN when no origin has truth
    std::vector<std::size_t> counts;     // forecasts combined per horizon (k_hat for proposed)
    std::vector<std::vector<double>> err_curve;  // in-sample Err(k) per horizon
    double runtime_seconds = 0.0;
};

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<MethodResult> methods;   // proposed first
    Profile profile;                      // proposed framework
    std::vector<Member> pool;
    std::size_t pool_requested = 0;
    std::vector<std::string> variable_names;
    std::vector<double> truth;            // target column
    std::vector<TimeIndex> test;
};

// Full two-step framework plus enabled baselines on one seed.
RunResult run_forecast(const ExperimentConfig& cfg, std::uint64_t seed);
RunResult run_forecast(const ExperimentConfig& cfg, std::shared_ptr<const TimeSeriesSet> series, std::uint64_t seed);

// RMSE per horizon over origins t in the test set with t + p also in it.
std::vector<double> test_rmse(const ForecastPanel& panel, const TimeSeriesSet& series);

// method,seed,origin,horizon,forecast,truth (truth empty when t + p is not a test index)
void write_forecasts_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs);
// horizon,variable,proportion plus per-horizon mean rho / E / count rows
void write_profile_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs);
nlohmann::json report_json(const ExperimentConfig& cfg, const std::vector<RunResult>& runs);

struct Quartiles {
    double q1 = 0.0, median = 0.0, q3 = 0.0;
};
// Linear interpolation between order statistics (type 7).
Quartiles quartiles(std::vector<double> values);

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    std::string method;
    std::size_t horizon = 0;
    double rmse = 0.0;
};

// Applies one sweep value to a config: data-length sets the training length,
// noise-scale the noise, variable-count the Lorenz'96 size with half the
// variables replaced by random walks.
ExperimentConfig apply_sweep_value(ExperimentConfig cfg, const std::string& axis, double value);

// Runs every (value, seed) replicate on up to cfg.workers threads, appending
// rows to sweep.csv as replicates finish, then writes sweep_summary.csv and
// report.json. Returns every row.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

}  // namespace embedcast
