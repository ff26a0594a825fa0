#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "embedcast/core.hpp"
#include "embedcast/evolve.hpp"
#include "embedcast/predictor.hpp"

namespace embedcast {

// One ensemble member: a code paired with an (unfitted) filter. split/rank
// record where the code came from (0 when not produced by a split search).
struct Member {
    EmbeddingCode code;
    FilterSpec filter;
    std::size_t split = 0;
    std::size_t rank = 0;
};

struct EmbeddingPool {
    std::vector<Member> members;
    std::size_t requested = 0;  // K * L * M

    bool underfull() const { return members.size() < requested; }
    // Codes in first-appearance order (each code appears once per filter in members).
    std::vector<EmbeddingCode> distinct_codes() const;
};

struct PoolSettings {
    std::size_t splits = 10;   // K
    std::size_t per_split = 3; // M
    std::size_t theta = 3;
    std::vector<double> rhos{0.0};  // one two-tap filter per value (L = rhos.size())
    std::size_t lags = 4;
    std::size_t horizons = 10;
    EsConfig es;
    AnalogueConfig analogue;
};

struct PoolBuild {
    EmbeddingPool pool;
    std::vector<TrainSplit> splits;
    std::vector<EsRun> runs;
};

// Filter used for the search step: (1, 0) taps with standardization.
FilterSpec search_filter(std::size_t variables);

// First step: one ES run per split on the search-filtered series, then
// Hamming-diverse selection threaded through the growing pool.
PoolBuild build_pool(std::shared_ptr<const TimeSeriesSet> series, const PoolSettings& settings);

// ---------------------------------------------------------------------------
// Second step
// ---------------------------------------------------------------------------

// Per-horizon outcome: members ranked by in-sample error, the number of
// top members combined, and Err(k) for k = 1..members.
struct HorizonSelection {
    std::vector<std::size_t> ranking;
    std::size_t count = 1;
    std::vector<double> err_curve;
    std::vector<double> member_mse;  // indexed by member id

    std::span<const std::size_t> chosen() const { return std::span(ranking).first(count); }
};

struct EnsembleSelection {
    std::vector<HorizonSelection> per_horizon;  // index p - 1
    std::vector<TimeIndex> grid;                // common in-sample origins

    const HorizonSelection& at(std::size_t p) const { return per_horizon.at(p - 1); }
    std::size_t horizons() const { return per_horizon.size(); }
};

// Origins shared by every panel, ascending.
std::vector<TimeIndex> intersect_grids(std::span<const ForecastPanel> panels);
ForecastPanel restrict_panel(const ForecastPanel& panel, std::span<const TimeIndex> origins);

// Member ids sorted by mean squared in-sample error at horizon p (stable).
// Panels must share one origin grid.
std::vector<std::size_t> rank_members(std::span<const ForecastPanel> panels, std::span<const double> truth,
                                      std::size_t p);

// Y_1 = first; Y_{k+1} = (k Y_k + next) / (k + 1).
double combine_recursive(std::span<const double> sorted_forecasts, std::size_t k);
// Y_1..Y_n at once.
std::vector<double> combine_curve(std::span<const double> sorted_forecasts);

struct KSelection {
    std::size_t k_hat = 1;
    std::vector<double> err_curve;
};

// ranked[i] holds the i-th ranked member's forecasts over the grid, truth
// the matching true values. Err(k) = sum_t (Y_k(t) - truth(t))^2; the
// smallest minimizing k wins.
KSelection select_k_hat(std::span<const std::vector<double>> ranked, std::span<const double> truth);

enum class CountRule {
    Optimal,  // k_hat minimizing Err(k)
    Fixed,    // a given count (clamped to the member count)
};

// Caches prepared series per filter and libraries per member.
class MemberForecaster {
public:
    MemberForecaster(std::shared_ptr<const TimeSeriesSet> series, std::vector<Member> members,
                     std::size_t horizons, AnalogueConfig analogue);

    std::size_t size() const { return members_.size(); }
    std::size_t horizons() const { return horizons_; }
    const Member& member(std::size_t i) const { return members_.at(i); }
    std::span<const Member> members() const { return members_; }
    const TimeSeriesSet& series() const { return *series_; }
    const AnalogueConfig& analogue() const { return analogue_; }

    const PreparedSeries& prepared(std::size_t member);
    const NeighborLibrary& library(std::size_t member);

    ForecastPanel in_sample(std::size_t member);
    ForecastPanel test_panel(std::size_t member, std::span<const TimeIndex> origins);
    // All horizons from one origin.
    std::vector<double> forecast(std::size_t member, TimeIndex origin);

    // Prepares every filter and library up front so later calls only read.
    void warm(std::span<const std::size_t> members);

private:
    std::shared_ptr<const TimeSeriesSet> series_;
    std::vector<Member> members_;
    std::size_t horizons_;
    AnalogueConfig analogue_;
    std::vector<std::size_t> filter_slot_;
    std::vector<std::unique_ptr<PreparedSeries>> prepared_;
    std::vector<std::unique_ptr<NeighborLibrary>> libraries_;
    std::vector<FilterSpec> distinct_filters_;
};

// Member in-sample panels on their common grid plus the per-horizon choice.
struct FittedEnsemble {
    EnsembleSelection selection;
    std::vector<ForecastPanel> in_sample;  // restricted to selection.grid
};

// Computes member in-sample panels, intersects their grids, ranks per
// horizon and applies the count rule.
FittedEnsemble fit_ensemble(MemberForecaster& forecaster, CountRule rule, std::size_t fixed_count = 1,
                            std::size_t workers = 1);

// Simple average of the top-count members at (t, p), computed through the
// recursion so it matches combine_recursive bit for bit. Only the chosen
// members are evaluated.
double forecast_test(MemberForecaster& forecaster, const EnsembleSelection& selection, TimeIndex t, std::size_t p);

// Combined forecasts for every origin and horizon.
ForecastPanel forecast_test_panel(MemberForecaster& forecaster, const EnsembleSelection& selection,
                                  std::span<const TimeIndex> origins);

struct Profile {
    std::vector<std::vector<double>> proportion;  // [p - 1][variable]
    std::vector<double> mean_rho;
    std::vector<double> mean_dimension;
    std::vector<std::size_t> counts;
};

// Per horizon: share of the chosen members embedding each variable (any
// lag), normalized to sum to one, plus mean rho and mean E over them.
Profile profile(std::span<const Member> members, const EnsembleSelection& selection, std::size_t variables);

// Whole two-step framework.
struct ProposedFit {
    PoolBuild build;
    std::unique_ptr<MemberForecaster> forecaster;
    FittedEnsemble fit;
};

ProposedFit fit_proposed(std::shared_ptr<const TimeSeriesSet> series, const PoolSettings& settings);

}  // namespace embedcast
