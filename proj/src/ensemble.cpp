#include "embedcast/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "embedcast/error.hpp"
#include "embedcast/kernels.hpp"
#include "embedcast/parallel.hpp"

namespace embedcast {

std::vector<EmbeddingCode> EmbeddingPool::distinct_codes() const {
    std::vector<EmbeddingCode> out;
    for (const auto& m : members)
        if (std::find(out.begin(), out.end(), m.code) == out.end()) out.push_back(m.code);
    return out;
}

FilterSpec search_filter(std::size_t variables) { return FilterSpec::two_tap(variables, 0.0); }

PoolBuild build_pool(std::shared_ptr<const TimeSeriesSet> series, const PoolSettings& settings) {
    if (settings.splits == 0 || settings.per_split == 0 || settings.rhos.empty())
        fail(ErrorKind::InvalidArgument, "K, M and L must all be >= 1");
    const std::size_t n = series->variables();
    const auto search = PreparedSeries::prepare(series, search_filter(n));
    const auto usable = usable_train_times(search, settings.horizons);

    PoolBuild out;
    out.splits = make_splits(usable, settings.splits);
    out.pool.requested = settings.splits * settings.per_split * settings.rhos.size();
    const FitnessContext ctx{&search, settings.lags, settings.horizons, settings.analogue};

    std::vector<EmbeddingCode> selected;
    for (const auto& split : out.splits) {
        EsConfig es = settings.es;
        es.seed = derive_seed(settings.es.seed, split.id);
        auto run = run_es(split, es, ctx);
        const auto sorted = run.hall.sorted();
        const auto accepted = select_diverse(sorted, settings.per_split, settings.theta, selected);
        for (const auto& code : accepted) {
            std::size_t rank = 0;
            while (!(sorted[rank].code == code)) ++rank;
            selected.push_back(code);
            for (double rho : settings.rhos)
                out.pool.members.push_back({code, FilterSpec::two_tap(n, rho), split.id, rank + 1});
        }
        out.runs.push_back(std::move(run));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ranking and combination
// ---------------------------------------------------------------------------

std::vector<TimeIndex> intersect_grids(std::span<const ForecastPanel> panels) {
    if (panels.empty()) return {};
    std::vector<TimeIndex> grid = panels.front().origins;
    for (std::size_t i = 1; i < panels.size(); ++i) {
        std::vector<TimeIndex> next;
        std::set_intersection(grid.begin(), grid.end(), panels[i].origins.begin(), panels[i].origins.end(),
                              std::back_inserter(next));
        grid = std::move(next);
    }
    return grid;
}

ForecastPanel restrict_panel(const ForecastPanel& panel, std::span<const TimeIndex> origins) {
    ForecastPanel out;
    out.horizons = panel.horizons;
    out.origins.assign(origins.begin(), origins.end());
    out.values.reserve(origins.size() * panel.horizons);
    for (TimeIndex t : origins) {
        const auto r = panel.row_of(t);
        if (!r) fail(ErrorKind::EmptyGrid, "origin " + std::to_string(t) + " missing from panel");
        const auto row = panel.row(*r);
        out.values.insert(out.values.end(), row.begin(), row.end());
    }
    return out;
}

namespace {

std::vector<double> truth_at(const TimeSeriesSet& series, std::span<const TimeIndex> grid, std::size_t p) {
    const auto y = series.target_column();
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = y[grid[i] + p];
    return out;
}

std::vector<std::size_t> stable_order(std::span<const double> errors) {
    std::vector<std::size_t> order(errors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });
    return order;
}

}  // namespace

std::vector<std::size_t> rank_members(std::span<const ForecastPanel> panels, std::span<const double> truth,
                                      std::size_t p) {
    if (panels.empty() || panels.front().origins.empty()) fail(ErrorKind::EmptyGrid, "no in-sample grid to rank on");
    std::vector<double> mse(panels.size());
    for (std::size_t i = 0; i < panels.size(); ++i) {
        if (panels[i].origins != panels.front().origins)
            fail(ErrorKind::EmptyGrid, "member panels are not on a common grid");
        const auto f = panels[i].horizon(p);
        mse[i] = kernels::sum_squared_diff(f, truth) / static_cast<double>(f.size());
    }
    return stable_order(mse);
}

double combine_recursive(std::span<const double> sorted_forecasts, std::size_t k) {
    if (k == 0 || k > sorted_forecasts.size())
        fail(ErrorKind::InvalidArgument, "k must lie in [1, " + std::to_string(sorted_forecasts.size()) + "]");
    double y = sorted_forecasts[0];
    for (std::size_t i = 1; i < k; ++i) {
        const double kk = static_cast<double>(i);
        y = (kk * y + sorted_forecasts[i]) / (kk + 1.0);
    }
    return y;
}

std::vector<double> combine_curve(std::span<const double> sorted_forecasts) {
    std::vector<double> out;
    out.reserve(sorted_forecasts.size());
    if (sorted_forecasts.empty()) return out;
    double y = sorted_forecasts[0];
    out.push_back(y);
    for (std::size_t i = 1; i < sorted_forecasts.size(); ++i) {
        const double kk = static_cast<double>(i);
        y = (kk * y + sorted_forecasts[i]) / (kk + 1.0);
        out.push_back(y);
    }
    return out;
}

KSelection select_k_hat(std::span<const std::vector<double>> ranked, std::span<const double> truth) {
    if (ranked.empty() || truth.empty()) fail(ErrorKind::EmptyGrid, "nothing to combine");
    KSelection out;
    std::vector<double> combined = ranked.front();
    if (combined.size() != truth.size()) fail(ErrorKind::LengthMismatch, "forecast and truth lengths differ");
    out.err_curve.push_back(kernels::sum_squared_diff(combined, truth));
    for (std::size_t k = 1; k < ranked.size(); ++k) {
        if (ranked[k].size() != truth.size()) fail(ErrorKind::LengthMismatch, "forecast and truth lengths differ");
        kernels::running_mean_step(combined, ranked[k], static_cast<double>(k));
        out.err_curve.push_back(kernels::sum_squared_diff(combined, truth));
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < out.err_curve.size(); ++k)
        if (out.err_curve[k] < out.err_curve[best]) best = k;
    out.k_hat = best + 1;
    return out;
}

// ---------------------------------------------------------------------------
// MemberForecaster
// ---------------------------------------------------------------------------

MemberForecaster::MemberForecaster(std::shared_ptr<const TimeSeriesSet> series, std::vector<Member> members,
                                   std::size_t horizons, AnalogueConfig analogue)
    : series_(std::move(series)),
      members_(std::move(members)),
      horizons_(horizons),
      analogue_(std::move(analogue)),
      libraries_(members_.size()) {
    std::sort(analogue_.exclusion.begin(), analogue_.exclusion.end());
    for (const auto& m : members_) {
        std::size_t slot = 0;
        while (slot < distinct_filters_.size() && distinct_filters_[slot].taps != m.filter.taps) ++slot;
        if (slot == distinct_filters_.size()) distinct_filters_.push_back(m.filter);
        filter_slot_.push_back(slot);
    }
    prepared_.resize(distinct_filters_.size());
}

const PreparedSeries& MemberForecaster::prepared(std::size_t member) {
    const std::size_t slot = filter_slot_.at(member);
    if (!prepared_[slot])
        prepared_[slot] = std::make_unique<PreparedSeries>(PreparedSeries::prepare(series_, distinct_filters_[slot]));
    return *prepared_[slot];
}

const NeighborLibrary& MemberForecaster::library(std::size_t member) {
    if (!libraries_.at(member))
        libraries_[member] =
            std::make_unique<NeighborLibrary>(build_library(prepared(member), members_[member].code, horizons_));
    return *libraries_[member];
}

void MemberForecaster::warm(std::span<const std::size_t> members) {
    for (std::size_t m : members) library(m);
}

ForecastPanel MemberForecaster::in_sample(std::size_t member) {
    return in_sample_panel(prepared(member), members_.at(member).code, horizons_, analogue_);
}

ForecastPanel MemberForecaster::test_panel(std::size_t member, std::span<const TimeIndex> origins) {
    return forecast_panel(prepared(member), library(member), members_.at(member).code, analogue_, origins);
}

std::vector<double> MemberForecaster::forecast(std::size_t member, TimeIndex origin) {
    const TimeIndex one[] = {origin};
    return test_panel(member, one).values;
}

// ---------------------------------------------------------------------------
// Fitting and forecasting
// ---------------------------------------------------------------------------

FittedEnsemble fit_ensemble(MemberForecaster& forecaster, CountRule rule, std::size_t fixed_count,
                            std::size_t workers) {
    const std::size_t n = forecaster.size();
    if (n == 0) fail(ErrorKind::EmptyGrid, "ensemble has no members");
    for (std::size_t i = 0; i < n; ++i) forecaster.prepared(i);

    std::vector<ForecastPanel> panels(n);
    parallel_for(n, workers, [&](std::size_t i) { panels[i] = forecaster.in_sample(i); });

    FittedEnsemble out;
    out.selection.grid = intersect_grids(panels);
    if (out.selection.grid.empty()) fail(ErrorKind::EmptyGrid, "members share no in-sample origins");
    out.in_sample.reserve(n);
    for (const auto& panel : panels) out.in_sample.push_back(restrict_panel(panel, out.selection.grid));

    const double grid_size = static_cast<double>(out.selection.grid.size());
    for (std::size_t p = 1; p <= forecaster.horizons(); ++p) {
        const auto truth = truth_at(forecaster.series(), out.selection.grid, p);
        std::vector<std::vector<double>> forecasts(n);
        HorizonSelection h;
        h.member_mse.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            forecasts[i] = out.in_sample[i].horizon(p);
            h.member_mse[i] = kernels::sum_squared_diff(forecasts[i], truth) / grid_size;
        }
        h.ranking = stable_order(h.member_mse);
        std::vector<std::vector<double>> ranked;
        ranked.reserve(n);
        for (std::size_t id : h.ranking) ranked.push_back(std::move(forecasts[id]));
        auto ks = select_k_hat(ranked, truth);
        h.err_curve = std::move(ks.err_curve);
        h.count = rule == CountRule::Optimal ? ks.k_hat : std::clamp<std::size_t>(fixed_count, 1, n);
        out.selection.per_horizon.push_back(std::move(h));
    }
    return out;
}

double forecast_test(MemberForecaster& forecaster, const EnsembleSelection& selection, TimeIndex t,
                     std::size_t p) {
    const auto& h = selection.at(p);
    std::vector<double> forecasts;
    forecasts.reserve(h.count);
    for (std::size_t id : h.chosen()) forecasts.push_back(forecaster.forecast(id, t).at(p - 1));
    return combine_recursive(forecasts, h.count);
}

ForecastPanel forecast_test_panel(MemberForecaster& forecaster, const EnsembleSelection& selection,
                                  std::span<const TimeIndex> origins) {
    std::vector<std::size_t> needed;
    for (const auto& h : selection.per_horizon)
        for (std::size_t id : h.chosen())
            if (std::find(needed.begin(), needed.end(), id) == needed.end()) needed.push_back(id);
    std::vector<ForecastPanel> panels(forecaster.size());
    for (std::size_t id : needed) panels[id] = forecaster.test_panel(id, origins);

    ForecastPanel out;
    out.horizons = selection.horizons();
    out.origins.assign(origins.begin(), origins.end());
    out.values.resize(origins.size() * out.horizons);
    std::vector<double> forecasts;
    for (std::size_t r = 0; r < origins.size(); ++r) {
        for (std::size_t p = 1; p <= out.horizons; ++p) {
            const auto& h = selection.at(p);
            forecasts.clear();
            for (std::size_t id : h.chosen()) forecasts.push_back(panels[id].at(r, p));
            out.values[r * out.horizons + (p - 1)] = combine_recursive(forecasts, h.count);
        }
    }
    return out;
}

Profile profile(std::span<const Member> members, const EnsembleSelection& selection, std::size_t variables) {
    Profile out;
    for (const auto& h : selection.per_horizon) {
        std::vector<double> counts(variables, 0.0);
        double rho = 0.0;
        double dim = 0.0;
        for (std::size_t id : h.chosen()) {
            const auto& m = members[id];
            for (std::size_t v = 0; v < variables; ++v)
                if (m.code.uses_variable(v)) counts[v] += 1.0;
            rho += m.filter.rho;
            dim += static_cast<double>(m.code.dimension());
        }
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        for (double& c : counts) c /= total;
        const double k = static_cast<double>(h.count);
        out.proportion.push_back(std::move(counts));
        out.mean_rho.push_back(rho / k);
        out.mean_dimension.push_back(dim / k);
        out.counts.push_back(h.count);
    }
    return out;
}

ProposedFit fit_proposed(std::shared_ptr<const TimeSeriesSet> series, const PoolSettings& settings) {
    ProposedFit out;
    out.build = build_pool(series, settings);
    if (out.build.pool.members.empty()) fail(ErrorKind::EmptyGrid, "search produced no pool members");
    out.forecaster = std::make_unique<MemberForecaster>(series, out.build.pool.members, settings.horizons,
                                                        settings.analogue);
    out.fit = fit_ensemble(*out.forecaster, CountRule::Optimal, 1, settings.es.workers);
    return out;
}

}  // namespace embedcast
