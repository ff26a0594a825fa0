#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "embedcast/error.hpp"
#include "embedcast/experiment.hpp"
#include "embedcast/io.hpp"

using namespace embedcast;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "YAML experiment config");
    cmd->add_option("--seed", c.seed, "single seed, replaces the config's seed list");
    cmd->add_option("--workers", c.workers, "worker threads");
    cmd->add_option("--out", c.out, "output directory");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? parse_config("") : load_config(c.config);
    if (c.seed) cfg.seeds = {*c.seed};
    if (c.workers) cfg.workers = *c.workers;
    if (!c.out.empty()) cfg.out = c.out;
    cfg.validate();
    return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
}

std::vector<RunResult> run_all(const ExperimentConfig& cfg) {
    std::vector<RunResult> runs;
    for (auto seed : cfg.seeds) {
        spdlog::info("seed {}: fitting", seed);
        runs.push_back(run_forecast(cfg, seed));
        for (const auto& m : runs.back().methods) {
            const std::size_t p = std::min<std::size_t>(5, m.rmse.size());
            spdlog::info("seed {} {:>8}: rmse(p={}) = {:.6g}  [{:.1f} s]", seed, m.method, p, m.rmse[p - 1],
                         m.runtime_seconds);
        }
    }
    return runs;
}

int cmd_generate(const Common& c, const std::string& system, std::size_t length) {
    ExperimentConfig cfg = c.config.empty() ? parse_config(system.empty() ? "" : "system: " + system)
                                            : load_config(c.config);
    if (!system.empty()) {
        auto parsed = parse_system(system);
        if (!parsed) throw ValidationError("unknown system '" + system + "'");
        if (parsed != cfg.dataset.sim.system) cfg = parse_config("system: " + system);
    }
    if (c.seed) cfg.seeds = {*c.seed};
    if (!c.out.empty()) cfg.out = c.out;
    if (cfg.csv) throw ValidationError("generate needs a generator config, not a CSV source");
    if (length > 0) {
        cfg.dataset.train_length = length;
        cfg.dataset.test_length = 0;
        cfg.train_rows.clear();
        cfg.test_rows.clear();
    } else if (cfg.dataset.train_length + cfg.dataset.test_length == 0 && cfg.train_rows.empty()) {
        throw ValidationError("generate needs --length or train_length/test_length in the config");
    }
    if (cfg.dataset.sim.system == System::FloodSurrogate && cfg.target == "x0") cfg.target = "Q";
    cfg.dataset.target = cfg.target;

    std::filesystem::create_directories(cfg.out);
    const auto seed = cfg.seeds.front();
    auto series = make_dataset(cfg, seed);
    const auto path = cfg.out / "series.csv";
    write_series_csv(path, series);
    spdlog::info("wrote {} samples x {} variables to {}", series.length(), series.variables(), path.string());
    return 0;
}

int cmd_forecast(const Common& c) {
    auto cfg = resolve(c);
    std::filesystem::create_directories(cfg.out);
    write_text(cfg.out / "config.yaml", dump_config(cfg));
    const auto runs = run_all(cfg);
    write_forecasts_csv(cfg.out / "forecasts.csv", runs);
    write_profile_csv(cfg.out / "profile.csv", runs);
    write_text(cfg.out / "report.json", report_json(cfg, runs).dump(2) + "\n");
    spdlog::info("outputs in {}", cfg.out.string());
    return 0;
}

int cmd_profile(const Common& c) {
    auto cfg = resolve(c);
    cfg.baselines.clear();
    std::filesystem::create_directories(cfg.out);
    write_text(cfg.out / "config.yaml", dump_config(cfg));
    const auto runs = run_all(cfg);
    write_profile_csv(cfg.out / "profile.csv", runs);
    std::ofstream curve(cfg.out / "err_curve.csv", std::ios::binary);
    curve << "seed,horizon,k,in_sample_err,selected\n";
    for (const auto& run : runs) {
        const auto& m = run.methods.front();
        for (std::size_t p = 1; p <= m.err_curve.size(); ++p)
            for (std::size_t k = 1; k <= m.err_curve[p - 1].size(); ++k)
                curve << fmt::format("{},{},{},{:.17g},{}\n", run.seed, p, k, m.err_curve[p - 1][k - 1],
                                     k == m.counts[p - 1] ? 1 : 0);
    }
    write_text(cfg.out / "report.json", report_json(cfg, runs).dump(2) + "\n");
    spdlog::info("outputs in {}", cfg.out.string());
    return 0;
}

int cmd_sweep(const Common& c, const std::string& axis, const std::vector<double>& values) {
    ExperimentConfig cfg = c.config.empty() ? parse_config("") : load_config(c.config);
    if (!axis.empty()) cfg.sweep_axis = axis;
    if (!values.empty()) cfg.sweep_values = values;
    if (c.seed) cfg.seeds = {*c.seed};
    if (c.workers) cfg.workers = *c.workers;
    if (!c.out.empty()) cfg.out = c.out;
    std::filesystem::create_directories(cfg.out);
    write_text(cfg.out / "config.yaml", dump_config(cfg));
    const auto rows = run_sweep(cfg);
    spdlog::info("{} rows written to {}", rows.size(), (cfg.out / "sweep.csv").string());
    return 0;
}

bool is_validation(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError:
        case ErrorKind::MissingColumn:
        case ErrorKind::InvalidArgument:
        case ErrorKind::InsufficientVariables:
        case ErrorKind::SeriesTooShort: return true;
        default: return false;
    }
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("embedcast"));
    spdlog::set_pattern("[%H:%M:%S] %v");

    CLI::App app{"Ensemble forecasting with suboptimal delay embeddings"};
    app.require_subcommand(1);

    Common common;
    std::string system;
    std::size_t length = 0;
    auto* generate = app.add_subcommand("generate", "write a synthetic dataset to <out>/series.csv");
    add_common(generate, common);
    generate->add_option("--system", system, "lorenz63, rossler, lorenz96, kuramoto-sivashinsky, random-walk, flood-surrogate");
    generate->add_option("--length", length, "samples to write");

    auto* forecast = app.add_subcommand("forecast", "fit the framework and baselines, write forecasts and report");
    add_common(forecast, common);

    std::string axis;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "repeat forecast across one axis and seeds");
    add_common(sweep, common);
    sweep->add_option("--axis", axis, "data-length, noise-scale or variable-count");
    sweep->add_option("--values", values, "axis values");

    auto* prof = app.add_subcommand("profile", "embedding proportions, mean rho/E and Err(k) curves");
    add_common(prof, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(common, system, length);
        if (forecast->parsed()) return cmd_forecast(common);
        if (sweep->parsed()) return cmd_sweep(common, axis, values);
        if (prof->parsed()) return cmd_profile(common);
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return is_validation(e.kind()) ? 2 : 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
