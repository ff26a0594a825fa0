#include "embedcast/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "embedcast/error.hpp"
#include "embedcast/io.hpp"
#include "embedcast/parallel.hpp"

namespace embedcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kAxes{"data-length", "noise-scale", "variable-count"};

std::string weighting_name(Weighting w) {
    switch (w) {
        case Weighting::InverseSquare: return "inverse-square";
        case Weighting::LiteralSquare: return "literal-square";
        case Weighting::Uniform: return "uniform";
    }
    return "inverse-square";
}

Weighting parse_weighting(const std::string& s) {
    if (s == "inverse-square") return Weighting::InverseSquare;
    if (s == "literal-square") return Weighting::LiteralSquare;
    if (s == "uniform") return Weighting::Uniform;
    throw ValidationError("weighting must be inverse-square, literal-square or uniform, got '" + s + "'");
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ValidationError("config key '" + key + "' has an invalid value");
    }
}

template <typename T>
std::vector<T> list(const YAML::Node& node, const std::string& key) {
    if (node.IsScalar()) return {scalar<T>(node, key)};
    if (!node.IsSequence()) throw ValidationError("config key '" + key + "' must be a list");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(scalar<T>(item, key));
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& msg) { throw ValidationError(msg); };
    if (lags < 1) bad("lags must be >= 1");
    if (horizons < 1) bad("horizons must be >= 1");
    if (splits < 1 || per_split < 1) bad("splits and per_split must be >= 1");
    if (rhos.empty()) bad("rhos must list at least one filter coefficient");
    if (seeds.empty()) bad("seeds must list at least one seed");
    if (workers < 1) bad("workers must be >= 1");
    for (const auto& b : baselines)
        if (b != "sbe" && b != "mve" && b != "rde") bad("unknown baseline '" + b + "' (sbe, mve, rde)");
    try {
        es.validate();
        baseline.validate();
        if (!csv) dataset.sim.validate();
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
    if (!csv && train_rows.empty() && dataset.train_length == 0) bad("train_length or train_rows is required");
    if (!csv && train_rows.empty() && dataset.test_length == 0) bad("test_length or test_rows is required");
    if (csv && train_rows.empty()) bad("CSV sources need train_rows and test_rows");
    if (!sweep_axis.empty() && std::find(kAxes.begin(), kAxes.end(), sweep_axis) == kAxes.end())
        bad("sweep_axis must be data-length, noise-scale or variable-count");
    if (!sweep_axis.empty() && csv) bad("sweeps need a generated dataset");
}

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("config is not valid YAML: ") + e.what());
    }
    ExperimentConfig cfg;
    if (!root || root.IsNull()) return cfg;
    if (!root.IsMap()) throw ValidationError("config must be a key-value mapping");

    // The system decides the defaults every other data key overrides.
    if (auto node = root["system"]) {
        const auto name = scalar<std::string>(node, "system");
        const auto system = parse_system(name);
        if (!system) throw ValidationError("unknown system '" + name + "'");
        cfg.dataset.sim = default_sim(*system);
    } else {
        cfg.dataset.sim = default_sim(System::Lorenz96);
    }
    if (cfg.dataset.sim.system == System::FloodSurrogate) cfg.target = cfg.dataset.target = "Q";

    auto& sim = cfg.dataset.sim;
    for (const auto& kv : root) {
        const auto key = scalar<std::string>(kv.first, "key");
        const YAML::Node& v = kv.second;
        if (key == "system") continue;
        else if (key == "parameters") {
            if (!v.IsMap()) throw ValidationError("parameters must be a mapping");
            for (const auto& p : v) sim.parameters[scalar<std::string>(p.first, key)] = scalar<double>(p.second, key);
        }
        else if (key == "dt") sim.dt = scalar<double>(v, key);
        else if (key == "record_stride") sim.record_stride = scalar<std::size_t>(v, key);
        else if (key == "transient") sim.transient_discard = scalar<std::size_t>(v, key);
        else if (key == "dimension") sim.dimension = scalar<std::size_t>(v, key);
        else if (key == "observed") cfg.dataset.observed = scalar<std::size_t>(v, key);
        else if (key == "random_walks") cfg.dataset.random_walks = scalar<std::size_t>(v, key);
        else if (key == "noise") cfg.dataset.noise = scalar<double>(v, key);
        else if (key == "noise_mode") {
            const auto m = scalar<std::string>(v, key);
            if (m == "per-variable") cfg.dataset.noise_mode = NoiseMode::PerVariable;
            else if (m == "target-only") cfg.dataset.noise_mode = NoiseMode::TargetOnly;
            else throw ValidationError("noise_mode must be per-variable or target-only");
        }
        else if (key == "train_length") cfg.dataset.train_length = scalar<std::size_t>(v, key);
        else if (key == "test_length") cfg.dataset.test_length = scalar<std::size_t>(v, key);
        else if (key == "csv") cfg.csv = scalar<std::string>(v, key);
        else if (key == "sample_period") sim.dt = scalar<double>(v, key), sim.record_stride = 1;
        else if (key == "target") cfg.target = scalar<std::string>(v, key);
        else if (key == "train_rows") cfg.train_rows = scalar<std::string>(v, key);
        else if (key == "test_rows") cfg.test_rows = scalar<std::string>(v, key);
        else if (key == "lags") cfg.lags = scalar<std::size_t>(v, key);
        else if (key == "horizons") cfg.horizons = scalar<std::size_t>(v, key);
        else if (key == "splits") cfg.splits = scalar<std::size_t>(v, key);
        else if (key == "per_split") cfg.per_split = scalar<std::size_t>(v, key);
        else if (key == "theta") cfg.theta = scalar<std::size_t>(v, key);
        else if (key == "rhos") cfg.rhos = list<double>(v, key);
        else if (key == "es_mu") cfg.es.mu = scalar<std::size_t>(v, key);
        else if (key == "es_lambda") cfg.es.lambda = scalar<std::size_t>(v, key);
        else if (key == "es_generations") cfg.es.generations = scalar<std::size_t>(v, key);
        else if (key == "es_population") cfg.es.population_size = scalar<std::size_t>(v, key);
        else if (key == "es_bitflip_prob") cfg.es.bitflip_prob = scalar<double>(v, key);
        else if (key == "es_crossover_prob") cfg.es.crossover_prob = scalar<double>(v, key);
        else if (key == "es_init_density") cfg.es.init_density = scalar<double>(v, key);
        else if (key == "neighbors") cfg.analogue.neighbors = scalar<std::size_t>(v, key);
        else if (key == "weighting") cfg.analogue.weighting = parse_weighting(scalar<std::string>(v, key));
        else if (key == "theiler_window") cfg.analogue.theiler_window = scalar<std::size_t>(v, key);
        else if (key == "baselines") cfg.baselines = v.IsNull() ? std::vector<std::string>{} : list<std::string>(v, key);
        else if (key == "baseline_dimension") cfg.baseline.dimension = scalar<std::size_t>(v, key);
        else if (key == "baseline_candidates") cfg.baseline.candidates = scalar<std::size_t>(v, key);
        else if (key == "rde_combine") cfg.baseline.combine = scalar<std::size_t>(v, key);
        else if (key == "seeds") cfg.seeds = list<std::uint64_t>(v, key);
        else if (key == "workers") cfg.workers = scalar<std::size_t>(v, key);
        else if (key == "out") cfg.out = scalar<std::string>(v, key);
        else if (key == "sweep_axis") cfg.sweep_axis = scalar<std::string>(v, key);
        else if (key == "sweep_values") cfg.sweep_values = list<double>(v, key);
        else throw ValidationError("unknown config key '" + key + "'");
    }
    cfg.dataset.target = cfg.target;
    cfg.baseline.lags = cfg.lags;
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = parse_config(ss.str());
    // Relative CSV paths resolve against the config file's directory.
    if (cfg.csv && cfg.csv->is_relative() && !std::filesystem::exists(*cfg.csv))
        cfg.csv = path.parent_path() / *cfg.csv;
    return cfg;
}

std::string dump_config(const ExperimentConfig& cfg) {
    YAML::Emitter y;
    y.SetDoublePrecision(17);
    y << YAML::BeginMap;
    const auto& sim = cfg.dataset.sim;
    if (cfg.csv) {
        y << YAML::Key << "csv" << YAML::Value << cfg.csv->string();
        y << YAML::Key << "sample_period" << YAML::Value << sim.dt * static_cast<double>(sim.record_stride);
    } else {
        y << YAML::Key << "system" << YAML::Value << to_string(sim.system);
        y << YAML::Key << "parameters" << YAML::Value << YAML::Flow << YAML::BeginMap;
        for (const auto& [k, v] : sim.parameters) y << YAML::Key << k << YAML::Value << v;
        y << YAML::EndMap;
        y << YAML::Key << "dt" << YAML::Value << sim.dt;
        y << YAML::Key << "record_stride" << YAML::Value << sim.record_stride;
        y << YAML::Key << "transient" << YAML::Value << sim.transient_discard;
        y << YAML::Key << "dimension" << YAML::Value << sim.dimension;
        y << YAML::Key << "observed" << YAML::Value << cfg.dataset.observed;
        y << YAML::Key << "random_walks" << YAML::Value << cfg.dataset.random_walks;
        y << YAML::Key << "noise" << YAML::Value << cfg.dataset.noise;
        y << YAML::Key << "noise_mode" << YAML::Value
          << (cfg.dataset.noise_mode == NoiseMode::TargetOnly ? "target-only" : "per-variable");
        y << YAML::Key << "train_length" << YAML::Value << cfg.dataset.train_length;
        y << YAML::Key << "test_length" << YAML::Value << cfg.dataset.test_length;
    }
    y << YAML::Key << "target" << YAML::Value << cfg.target;
    if (!cfg.train_rows.empty()) y << YAML::Key << "train_rows" << YAML::Value << cfg.train_rows;
    if (!cfg.test_rows.empty()) y << YAML::Key << "test_rows" << YAML::Value << cfg.test_rows;
    y << YAML::Key << "lags" << YAML::Value << cfg.lags;
    y << YAML::Key << "horizons" << YAML::Value << cfg.horizons;
    y << YAML::Key << "splits" << YAML::Value << cfg.splits;
    y << YAML::Key << "per_split" << YAML::Value << cfg.per_split;
    y << YAML::Key << "theta" << YAML::Value << cfg.theta;
    y << YAML::Key << "rhos" << YAML::Value << YAML::Flow << cfg.rhos;
    y << YAML::Key << "es_mu" << YAML::Value << cfg.es.mu;
    y << YAML::Key << "es_lambda" << YAML::Value << cfg.es.lambda;
    y << YAML::Key << "es_generations" << YAML::Value << cfg.es.generations;
    y << YAML::Key << "es_population" << YAML::Value << cfg.es.population_size;
    y << YAML::Key << "es_bitflip_prob" << YAML::Value << cfg.es.bitflip_prob;
    y << YAML::Key << "es_crossover_prob" << YAML::Value << cfg.es.crossover_prob;
    y << YAML::Key << "es_init_density" << YAML::Value << cfg.es.init_density;
    y << YAML::Key << "neighbors" << YAML::Value << cfg.analogue.neighbors;
    y << YAML::Key << "weighting" << YAML::Value << weighting_name(cfg.analogue.weighting);
    y << YAML::Key << "theiler_window" << YAML::Value << cfg.analogue.theiler_window;
    y << YAML::Key << "baselines" << YAML::Value << YAML::Flow << cfg.baselines;
    y << YAML::Key << "baseline_dimension" << YAML::Value << cfg.baseline.dimension;
    y << YAML::Key << "baseline_candidates" << YAML::Value << cfg.baseline.candidates;
    y << YAML::Key << "rde_combine" << YAML::Value << cfg.baseline.combine;
    y << YAML::Key << "seeds" << YAML::Value << YAML::Flow << cfg.seeds;
    y << YAML::Key << "workers" << YAML::Value << cfg.workers;
    y << YAML::Key << "out" << YAML::Value << cfg.out.string();
    if (!cfg.sweep_axis.empty()) {
        y << YAML::Key << "sweep_axis" << YAML::Value << cfg.sweep_axis;
        y << YAML::Key << "sweep_values" << YAML::Value << YAML::Flow << cfg.sweep_values;
    }
    y << YAML::EndMap;
    return std::string(y.c_str()) + "\n";
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    const YAML::Node node = YAML::Load(dump_config(cfg));
    std::function<nlohmann::json(const YAML::Node&)> convert = [&](const YAML::Node& n) -> nlohmann::json {
        if (n.IsMap()) {
            nlohmann::json out = nlohmann::json::object();
            for (const auto& kv : n) out[kv.first.as<std::string>()] = convert(kv.second);
            return out;
        }
        if (n.IsSequence()) {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& item : n) out.push_back(convert(item));
            return out;
        }
        if (n.IsNull()) return nullptr;
        const auto s = n.as<std::string>();
        // Keep numbers numeric in the echo.
        double d = 0.0;
        if (YAML::convert<double>::decode(n, d) && s.find_first_not_of("0123456789.eE+-") == std::string::npos) {
            long long i = 0;
            if (s.find_first_of(".eE") == std::string::npos && YAML::convert<long long>::decode(n, i)) return i;
            return d;
        }
        return s;
    };
    return convert(node);
}

TimeSeriesSet make_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
    TimeSeriesSet series;
    if (cfg.csv) {
        CsvSchema schema;
        schema.target = cfg.target;
        schema.sample_period = cfg.dataset.sim.dt * static_cast<double>(cfg.dataset.sim.record_stride);
        series = ingest_csv(*cfg.csv, schema);
    } else {
        DatasetSpec spec = cfg.dataset;
        spec.sim.seed = seed;
        if (!cfg.train_rows.empty()) {
            const auto train = parse_row_ranges(cfg.train_rows);
            const auto test = parse_row_ranges(cfg.test_rows);
            const std::size_t total = std::max(train.empty() ? 0 : train.back() + 1, test.empty() ? 0 : test.back() + 1);
            spec.train_length = total;
            spec.test_length = 0;
        }
        series = generate_dataset(spec);
    }
    if (!cfg.train_rows.empty()) {
        series.train = parse_row_ranges(cfg.train_rows);
        series.test = parse_row_ranges(cfg.test_rows);
        if ((!series.train.empty() && series.train.back() >= series.length()) ||
            (!series.test.empty() && series.test.back() >= series.length()))
            throw ValidationError(fmt::format("row ranges exceed the {} samples available", series.length()));
    }
    try {
        series.validate(cfg.lags, cfg.horizons);
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
    return series;
}

std::vector<double> test_rmse(const ForecastPanel& panel, const TimeSeriesSet& series) {
    std::vector<char> in_test(series.length(), 0);
    for (TimeIndex t : series.test) in_test[t] = 1;
    const auto y = series.target_column();
    std::vector<double> out(panel.horizons, kNaN);
    for (std::size_t p = 1; p <= panel.horizons; ++p) {
        double se = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < panel.origins.size(); ++r) {
            const TimeIndex t = panel.origins[r] + p;
            if (t >= series.length() || !in_test[t]) continue;
            const double d = panel.at(r, p) - y[t];
            se += d * d;
            ++n;
        }
        if (n > 0) out[p - 1] = std::sqrt(se / static_cast<double>(n));
    }
    return out;
}

namespace {

MethodResult summarize(const std::string& name, MemberForecaster& forecaster, const FittedEnsemble& fit,
                       std::span<const TimeIndex> origins, const TimeSeriesSet& series, double seconds) {
    MethodResult out;
    out.method = name;
    out.test = forecast_test_panel(forecaster, fit.selection, origins);
    out.rmse = test_rmse(out.test, series);
    for (const auto& h : fit.selection.per_horizon) {
        out.counts.push_back(h.count);
        out.err_curve.push_back(h.err_curve);
    }
    out.runtime_seconds = seconds;
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

RunResult run_forecast(const ExperimentConfig& cfg, std::shared_ptr<const TimeSeriesSet> series, std::uint64_t seed) {
    RunResult out;
    out.seed = seed;
    out.variable_names = series->names;
    out.truth.assign(series->target_column().begin(), series->target_column().end());
    out.test = series->test;

    // Origins need the longest possible delay (lags - 1) plus one filter tap.
    std::vector<TimeIndex> origins;
    for (TimeIndex t : series->test)
        if (t >= cfg.lags) origins.push_back(t);

    PoolSettings settings;
    settings.splits = cfg.splits;
    settings.per_split = cfg.per_split;
    settings.theta = cfg.theta;
    settings.rhos = cfg.rhos;
    settings.lags = cfg.lags;
    settings.horizons = cfg.horizons;
    settings.es = cfg.es;
    settings.es.seed = seed;
    settings.es.workers = cfg.workers;
    settings.analogue = cfg.analogue;

    auto start = std::chrono::steady_clock::now();
    auto proposed = fit_proposed(series, settings);
    out.methods.push_back(summarize("proposed", *proposed.forecaster, proposed.fit, origins, *series,
                                    seconds_since(start)));
    out.profile = profile(proposed.forecaster->members(), proposed.fit.selection, series->variables());
    out.pool = proposed.build.pool.members;
    out.pool_requested = proposed.build.pool.requested;

    for (const auto& name : cfg.baselines) {
        start = std::chrono::steady_clock::now();
        BaselineConfig bc = cfg.baseline;
        bc.lags = cfg.lags;
        bc.seed = seed;
        BaselineFit fit;
        if (name == "sbe") fit = fit_sbe(series, settings.es, cfg.lags, cfg.horizons, cfg.analogue);
        else if (name == "mve") fit = fit_mve(series, bc, cfg.horizons, cfg.analogue, cfg.workers);
        else fit = fit_rde(series, bc, cfg.horizons, cfg.analogue, cfg.workers);
        out.methods.push_back(summarize(name, *fit.forecaster, fit.fit, origins, *series, seconds_since(start)));
    }
    return out;
}

RunResult run_forecast(const ExperimentConfig& cfg, std::uint64_t seed) {
    return run_forecast(cfg, std::make_shared<const TimeSeriesSet>(make_dataset(cfg, seed)), seed);
}

void write_forecasts_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << "method,seed,origin,horizon,forecast,truth\n";
    for (const auto& run : runs) {
        std::vector<char> in_test(run.truth.size(), 0);
        for (TimeIndex t : run.test) in_test[t] = 1;
        for (const auto& m : run.methods)
            for (std::size_t r = 0; r < m.test.origins.size(); ++r)
                for (std::size_t p = 1; p <= m.test.horizons; ++p) {
                    const TimeIndex t = m.test.origins[r];
                    out << fmt::format("{},{},{},{},{:.17g},", m.method, run.seed, t, p, m.test.at(r, p));
                    if (t + p < run.truth.size() && in_test[t + p]) out << fmt::format("{:.17g}", run.truth[t + p]);
                    out << '\n';
                }
    }
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

void write_profile_csv(const std::filesystem::path& path, const std::vector<RunResult>& runs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << "seed,horizon,variable,proportion,mean_rho,mean_dimension,count\n";
    for (const auto& run : runs) {
        const auto& pr = run.profile;
        for (std::size_t p = 1; p <= pr.proportion.size(); ++p)
            for (std::size_t v = 0; v < run.variable_names.size(); ++v)
                out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{}\n", run.seed, p, run.variable_names[v],
                                   pr.proportion[p - 1][v], pr.mean_rho[p - 1], pr.mean_dimension[p - 1],
                                   pr.counts[p - 1]);
    }
}

Quartiles quartiles(std::vector<double> values) {
    std::erase_if(values, [](double v) { return std::isnan(v); });
    if (values.empty()) return {kNaN, kNaN, kNaN};
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double h = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {at(0.25), at(0.5), at(0.75)};
}

namespace {

nlohmann::json number(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json numbers(std::span<const double> v) {
    auto out = nlohmann::json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

}  // namespace

nlohmann::json report_json(const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
    nlohmann::json report;
    report["config"] = config_json(cfg);
    report["seeds"] = nlohmann::json::array();
    report["runs"] = nlohmann::json::array();
    std::map<std::string, std::vector<std::vector<double>>> by_method;  // method -> horizon -> per-seed rmse
    for (const auto& run : runs) {
        report["seeds"].push_back(run.seed);
        nlohmann::json r;
        r["seed"] = run.seed;
        for (const auto& m : run.methods) {
            nlohmann::json j;
            j["rmse"] = numbers(m.rmse);
            j["combined"] = m.counts;
            j["runtime_seconds"] = m.runtime_seconds;
            auto curves = nlohmann::json::array();
            for (const auto& c : m.err_curve) curves.push_back(numbers(c));
            j["in_sample_err_curve"] = curves;
            r["methods"][m.method] = j;
            auto& slot = by_method[m.method];
            slot.resize(m.rmse.size());
            for (std::size_t p = 0; p < m.rmse.size(); ++p) slot[p].push_back(m.rmse[p]);
        }
        r["k_hat"] = run.methods.front().counts;
        nlohmann::json pool;
        pool["size"] = run.pool.size();
        pool["requested"] = run.pool_requested;
        pool["underfull"] = run.pool.size() < run.pool_requested;
        pool["members"] = nlohmann::json::array();
        for (const auto& m : run.pool)
            pool["members"].push_back({{"code", m.code.to_string()},
                                       {"rho", m.filter.rho},
                                       {"split", m.split},
                                       {"rank", m.rank},
                                       {"dimension", m.code.dimension()}});
        r["pool"] = pool;
        nlohmann::json prof;
        prof["variables"] = run.variable_names;
        auto props = nlohmann::json::array();
        for (const auto& row : run.profile.proportion) props.push_back(numbers(row));
        prof["proportion"] = props;
        prof["mean_rho"] = numbers(run.profile.mean_rho);
        prof["mean_dimension"] = numbers(run.profile.mean_dimension);
        r["profile"] = prof;
        report["runs"].push_back(r);
    }
    for (const auto& [method, per_h] : by_method) {
        nlohmann::json s;
        for (const auto& values : per_h) {
            const auto q = quartiles(values);
            s["median"].push_back(number(q.median));
            s["q1"].push_back(number(q.q1));
            s["q3"].push_back(number(q.q3));
        }
        report["summary"][method] = s;
    }
    return report;
}

ExperimentConfig apply_sweep_value(ExperimentConfig cfg, const std::string& axis, double value) {
    if (axis == "data-length") {
        if (value < 1 || value != std::floor(value)) throw ValidationError("data-length values must be positive integers");
        cfg.dataset.train_length = static_cast<std::size_t>(value);
    } else if (axis == "noise-scale") {
        if (value < 0) throw ValidationError("noise-scale values must be >= 0");
        cfg.dataset.noise = value;
    } else if (axis == "variable-count") {
        if (value < 2 || value != std::floor(value)) throw ValidationError("variable-count values must be integers >= 2");
        const auto n = static_cast<std::size_t>(value);
        cfg.dataset.sim.dimension = n;
        cfg.dataset.observed = n / 2;
        cfg.dataset.random_walks = n - n / 2;
    } else {
        throw ValidationError("unknown sweep axis '" + axis + "'");
    }
    return cfg;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.sweep_axis.empty() || cfg.sweep_values.empty())
        throw ValidationError("sweep needs sweep_axis and sweep_values");
    std::vector<ExperimentConfig> configs;
    for (double v : cfg.sweep_values) {
        auto c = apply_sweep_value(cfg, cfg.sweep_axis, v);
        c.workers = 1;  // replicates are the unit of parallelism
        c.validate();
        configs.push_back(std::move(c));
    }

    std::filesystem::create_directories(cfg.out);
    const auto rows_path = cfg.out / "sweep.csv";
    std::ofstream rows_out(rows_path, std::ios::binary);
    if (!rows_out) fail(ErrorKind::Io, "cannot write " + rows_path.string());
    rows_out << "axis,value,seed,method,horizon,rmse\n";
    rows_out.flush();

    struct Job {
        std::size_t value;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t v = 0; v < configs.size(); ++v)
        for (auto seed : cfg.seeds) jobs.push_back({v, seed});

    std::mutex writer;
    std::vector<SweepRow> rows;
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
        const auto& job = jobs[j];
        const auto run = run_forecast(configs[job.value], job.seed);
        std::lock_guard lock(writer);
        for (const auto& m : run.methods)
            for (std::size_t p = 1; p <= m.rmse.size(); ++p) {
                SweepRow row{cfg.sweep_values[job.value], job.seed, m.method, p, m.rmse[p - 1]};
                rows_out << fmt::format("{},{:.17g},{},{},{},{:.17g}\n", cfg.sweep_axis, row.value, row.seed,
                                        row.method, row.horizon, row.rmse);
                rows.push_back(std::move(row));
            }
        rows_out.flush();
    });

    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.value, a.method, a.horizon, a.seed) < std::tie(b.value, b.method, b.horizon, b.seed);
    });

    std::ofstream summary(cfg.out / "sweep_summary.csv", std::ios::binary);
    summary << "axis,value,method,horizon,replicates,median,q1,q3\n";
    nlohmann::json report;
    report["config"] = config_json(cfg);
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        std::vector<double> values;
        while (j < rows.size() && rows[j].value == rows[i].value && rows[j].method == rows[i].method &&
               rows[j].horizon == rows[i].horizon)
            values.push_back(rows[j++].rmse);
        const auto q = quartiles(values);
        summary << fmt::format("{},{:.17g},{},{},{},{:.17g},{:.17g},{:.17g}\n", cfg.sweep_axis, rows[i].value,
                               rows[i].method, rows[i].horizon, values.size(), q.median, q.q1, q.q3);
        report["summary"].push_back({{"value", rows[i].value},
                                     {"method", rows[i].method},
                                     {"horizon", rows[i].horizon},
                                     {"median", number(q.median)},
                                     {"q1", number(q.q1)},
                                     {"q3", number(q.q3)},
                                     {"rmse", numbers(values)}});
        i = j;
    }
    std::ofstream(cfg.out / "report.json") << report.dump(2) << '\n';
    return rows;
}

}  // namespace embedcast
