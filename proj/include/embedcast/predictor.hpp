#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "embedcast/core.hpp"

namespace embedcast {

enum class Weighting {
    InverseSquare,  // lambda ∝ |v(t') - v(t)|^-2
    LiteralSquare,  // lambda ∝ |v(t') - v(t)|^2
    Uniform,
};

struct AnalogueConfig {
    std::size_t neighbors = 0;  // 0 selects E + 1
    Weighting weighting = Weighting::InverseSquare;
    std::vector<TimeIndex> exclusion;  // never used as neighbors
    std::size_t theiler_window = 0;    // |t' - t| <= window is excluded around a query time

    std::size_t neighbor_count(std::size_t dimension) const {
        return neighbors > 0 ? neighbors : dimension + 1;
    }
};

struct Neighbor {
    TimeIndex time;
    double distance;
};

// Delay vectors of the library points stored coordinate-major (one
// contiguous row per coordinate) so distance evaluation streams through
// memory, together with the p-step futures of every point.
class NeighborLibrary {
public:
    NeighborLibrary() = default;
    NeighborLibrary(std::vector<TimeIndex> times, std::vector<std::vector<double>> coordinates,
                    std::vector<std::vector<double>> futures);

    // Points given as (time, vector) pairs; futures[p-1][i] belongs to points[i].
    static NeighborLibrary from_points(std::span<const std::pair<TimeIndex, std::vector<double>>> points,
                                       std::vector<std::vector<double>> futures);

    std::size_t size() const { return times_.size(); }
    std::size_t dimension() const { return coordinates_.size(); }
    std::size_t horizons() const { return futures_.size(); }
    std::span<const TimeIndex> times() const { return times_; }
    std::span<const double> coordinate(std::size_t j) const { return coordinates_[j]; }
    double future(std::size_t point, std::size_t p) const { return futures_[p - 1][point]; }
    std::vector<double> point(std::size_t i) const;
    std::optional<std::size_t> position_of(TimeIndex t) const;

private:
    std::vector<TimeIndex> times_;
    std::vector<std::vector<double>> coordinates_;
    std::vector<std::vector<double>> futures_;
};

// Exact k-nearest search (Euclidean), ties broken by smaller time index.
std::vector<Neighbor> knn_query(const NeighborLibrary& lib, std::span<const double> query,
                                const AnalogueConfig& cfg);
std::vector<Neighbor> knn_query(const NeighborLibrary& lib, const DelayVector& query,
                                const AnalogueConfig& cfg);

// Search that also drops the query's own time (and its Theiler window).
std::vector<Neighbor> knn_query_excluding(const NeighborLibrary& lib, std::span<const double> query,
                                          const AnalogueConfig& cfg, std::optional<TimeIndex> query_time,
                                          std::vector<double>& scratch);

// Normalized weights; zero-distance neighbors, if any, share all the weight.
std::vector<double> analogue_weights(std::span<const Neighbor> neighbors, Weighting mode);

double analogue_forecast(const NeighborLibrary& lib, std::span<const double> query, std::size_t p,
                         const AnalogueConfig& cfg);
double analogue_forecast(const NeighborLibrary& lib, const DelayVector& query, std::size_t p,
                         const AnalogueConfig& cfg);

// Weighted futures of the given neighbors for horizons 1..lib.horizons().
std::vector<double> analogue_forecast_all(const NeighborLibrary& lib, std::span<const Neighbor> neighbors,
                                          Weighting mode);

// Forecasts keyed by (origin, horizon), dense over horizons 1..horizons.
struct ForecastPanel {
    std::vector<TimeIndex> origins;
    std::size_t horizons = 0;
    std::vector<double> values;  // row-major origins x horizons

    double at(std::size_t row, std::size_t p) const { return values[row * horizons + (p - 1)]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values).subspan(r * horizons, horizons);
    }
    std::optional<std::size_t> row_of(TimeIndex t) const;
    // Values at horizon p, one per origin.
    std::vector<double> horizon(std::size_t p) const;
};

// A series with one fitted filter applied; shared by every code evaluated
// under that filter.
struct PreparedSeries {
    std::shared_ptr<const TimeSeriesSet> series;
    FilterSpec filter;
    FilteredSeries filtered;
    IndexRuns train_runs;

    // Fits the standardization of `filter` on the training samples first.
    static PreparedSeries prepare(std::shared_ptr<const TimeSeriesSet> series, const FilterSpec& filter);
    // Uses `filter` exactly as given.
    static PreparedSeries prepare_fitted(std::shared_ptr<const TimeSeriesSet> series, FilterSpec filter);

    std::size_t filter_memory() const { return filter.length() - 1; }
};

// Training times whose delay vector (under max_lag and the filter memory)
// and futures t+1..t+horizons all lie inside one block of training samples.
std::vector<TimeIndex> library_times(const PreparedSeries& prep, std::size_t max_lag, std::size_t horizons);

NeighborLibrary build_library(const PreparedSeries& prep, const EmbeddingCode& code, std::size_t horizons);

// Leave-one-out forecasts over the training library, restored to original
// units. `origins` restricts the query times (others in the set that are not
// valid library points are skipped).
ForecastPanel in_sample_panel(const PreparedSeries& prep, const EmbeddingCode& code, std::size_t horizons,
                              const AnalogueConfig& cfg,
                              std::optional<std::span<const TimeIndex>> origins = std::nullopt);
ForecastPanel in_sample_panel(std::shared_ptr<const TimeSeriesSet> series, const EmbeddingCode& code,
                              const FilterSpec& filter, std::size_t horizons, const AnalogueConfig& cfg);

// Forecasts from arbitrary origins against a training library (nothing excluded
// except cfg.exclusion). Throws OutOfHistory when an origin lacks a delay vector.
ForecastPanel forecast_panel(const PreparedSeries& prep, const NeighborLibrary& lib, const EmbeddingCode& code,
                             const AnalogueConfig& cfg, std::span<const TimeIndex> origins);

// Earliest origin with a complete filtered delay vector for the code.
TimeIndex first_forecastable(const PreparedSeries& prep, const EmbeddingCode& code);

}  // namespace embedcast
