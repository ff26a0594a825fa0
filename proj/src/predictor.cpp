#include "embedcast/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "embedcast/error.hpp"
#include "embedcast/kernels.hpp"

namespace embedcast {

NeighborLibrary::NeighborLibrary(std::vector<TimeIndex> times, std::vector<std::vector<double>> coordinates,
                                 std::vector<std::vector<double>> futures)
    : times_(std::move(times)), coordinates_(std::move(coordinates)), futures_(std::move(futures)) {
    for (const auto& row : coordinates_)
        if (row.size() != times_.size()) fail(ErrorKind::LengthMismatch, "library coordinate row size");
    for (const auto& row : futures_)
        if (row.size() != times_.size()) fail(ErrorKind::LengthMismatch, "library future row size");
    if (!std::is_sorted(times_.begin(), times_.end()))
        fail(ErrorKind::InvalidArgument, "library times must be sorted");
}

NeighborLibrary NeighborLibrary::from_points(std::span<const std::pair<TimeIndex, std::vector<double>>> points,
                                             std::vector<std::vector<double>> futures) {
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return points[a].first < points[b].first; });
    const std::size_t dim = points.empty() ? 0 : points.front().second.size();
    std::vector<TimeIndex> times;
    std::vector<std::vector<double>> coords(dim);
    std::vector<std::vector<double>> fut(futures.size());
    for (std::size_t i : order) {
        if (points[i].second.size() != dim) fail(ErrorKind::LengthMismatch, "library points differ in dimension");
        times.push_back(points[i].first);
        for (std::size_t j = 0; j < dim; ++j) coords[j].push_back(points[i].second[j]);
        for (std::size_t p = 0; p < futures.size(); ++p) fut[p].push_back(futures[p].at(i));
    }
    return NeighborLibrary(std::move(times), std::move(coords), std::move(fut));
}

std::vector<double> NeighborLibrary::point(std::size_t i) const {
    std::vector<double> v(dimension());
    for (std::size_t j = 0; j < dimension(); ++j) v[j] = coordinates_[j][i];
    return v;
}

std::optional<std::size_t> NeighborLibrary::position_of(TimeIndex t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - times_.begin());
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

std::vector<Neighbor> knn_query_excluding(const NeighborLibrary& lib, std::span<const double> query,
                                          const AnalogueConfig& cfg, std::optional<TimeIndex> query_time,
                                          std::vector<double>& scratch) {
    if (query.size() != lib.dimension())
        fail(ErrorKind::LengthMismatch, "query dimension " + std::to_string(query.size()) +
                                            " vs library " + std::to_string(lib.dimension()));
    const std::size_t n = lib.size();
    scratch.assign(n, 0.0);
    for (std::size_t j = 0; j < query.size(); ++j)
        kernels::accumulate_squared_diff(lib.coordinate(j), query[j], scratch);

    const std::size_t k = cfg.neighbor_count(lib.dimension());
    const auto times = lib.times();
    const bool has_exclusion = !cfg.exclusion.empty();
    const auto window = static_cast<TimeIndex>(cfg.theiler_window);

    struct Candidate {
        double d2;
        TimeIndex time;
    };
    std::vector<Candidate> best;
    best.reserve(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const TimeIndex t = times[i];
        if (query_time) {
            const TimeIndex qt = *query_time;
            if ((t <= qt ? qt - t : t - qt) <= window) continue;
        }
        if (has_exclusion && std::binary_search(cfg.exclusion.begin(), cfg.exclusion.end(), t)) continue;
        const double d2 = scratch[i];
        // Library times increase with i, so an equal distance never displaces
        // an earlier point.
        if (best.size() == k && !(d2 < best.back().d2)) continue;
        auto pos = std::upper_bound(best.begin(), best.end(), d2,
                                    [](double v, const Candidate& c) { return v < c.d2; });
        best.insert(pos, Candidate{d2, t});
        if (best.size() > k) best.pop_back();
    }
    if (best.empty()) fail(ErrorKind::EmptyLibrary, "no library points left after exclusions");
    std::vector<Neighbor> out;
    out.reserve(best.size());
    for (const auto& c : best) out.push_back({c.time, std::sqrt(c.d2)});
    return out;
}

std::vector<Neighbor> knn_query(const NeighborLibrary& lib, std::span<const double> query,
                                const AnalogueConfig& cfg) {
    AnalogueConfig sorted = cfg;
    std::sort(sorted.exclusion.begin(), sorted.exclusion.end());
    std::vector<double> scratch;
    return knn_query_excluding(lib, query, sorted, std::nullopt, scratch);
}

std::vector<Neighbor> knn_query(const NeighborLibrary& lib, const DelayVector& query, const AnalogueConfig& cfg) {
    return knn_query(lib, std::span<const double>(query.components), cfg);
}

std::vector<double> analogue_weights(std::span<const Neighbor> neighbors, Weighting mode) {
    if (neighbors.empty()) fail(ErrorKind::EmptyLibrary, "no neighbors to weight");
    std::vector<double> w(neighbors.size(), 0.0);
    const bool any_zero =
        std::any_of(neighbors.begin(), neighbors.end(), [](const Neighbor& n) { return n.distance == 0.0; });
    if (any_zero) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = neighbors[i].distance == 0.0 ? 1.0 : 0.0;
    } else {
        // Ratios against the nearest / farthest distance keep the weights
        // finite for tiny or huge distances.
        double dmin = neighbors.front().distance;
        double dmax = neighbors.front().distance;
        for (const auto& n : neighbors) {
            dmin = std::min(dmin, n.distance);
            dmax = std::max(dmax, n.distance);
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = neighbors[i].distance;
            switch (mode) {
                case Weighting::InverseSquare: w[i] = (dmin / d) * (dmin / d); break;
                case Weighting::LiteralSquare: w[i] = (d / dmax) * (d / dmax); break;
                case Weighting::Uniform: w[i] = 1.0; break;
            }
        }
    }
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    return w;
}

std::vector<double> analogue_forecast_all(const NeighborLibrary& lib, std::span<const Neighbor> neighbors,
                                          Weighting mode) {
    const auto w = analogue_weights(neighbors, mode);
    std::vector<std::size_t> pos(neighbors.size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        auto found = lib.position_of(neighbors[i].time);
        if (!found) fail(ErrorKind::MissingFuture, "neighbor time not in library");
        pos[i] = *found;
    }
    std::vector<double> out(lib.horizons(), 0.0);
    for (std::size_t p = 1; p <= lib.horizons(); ++p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < pos.size(); ++i) acc += w[i] * lib.future(pos[i], p);
        out[p - 1] = acc;
    }
    return out;
}

double analogue_forecast(const NeighborLibrary& lib, std::span<const double> query, std::size_t p,
                         const AnalogueConfig& cfg) {
    if (p == 0 || p > lib.horizons())
        fail(ErrorKind::MissingFuture, "library has no futures for horizon " + std::to_string(p));
    const auto nb = knn_query(lib, query, cfg);
    return analogue_forecast_all(lib, nb, cfg.weighting)[p - 1];
}

double analogue_forecast(const NeighborLibrary& lib, const DelayVector& query, std::size_t p,
                         const AnalogueConfig& cfg) {
    return analogue_forecast(lib, std::span<const double>(query.components), p, cfg);
}

// ---------------------------------------------------------------------------
// Panels
// ---------------------------------------------------------------------------

std::optional<std::size_t> ForecastPanel::row_of(TimeIndex t) const {
    auto it = std::lower_bound(origins.begin(), origins.end(), t);
    if (it == origins.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - origins.begin());
}

std::vector<double> ForecastPanel::horizon(std::size_t p) const {
    std::vector<double> out(origins.size());
    for (std::size_t r = 0; r < origins.size(); ++r) out[r] = at(r, p);
    return out;
}

PreparedSeries PreparedSeries::prepare(std::shared_ptr<const TimeSeriesSet> series, const FilterSpec& filter) {
    auto fitted = fit_standardization(*series, filter);
    return prepare_fitted(std::move(series), std::move(fitted));
}

PreparedSeries PreparedSeries::prepare_fitted(std::shared_ptr<const TimeSeriesSet> series, FilterSpec filter) {
    PreparedSeries prep;
    prep.filtered = apply_filter(*series, filter);
    prep.train_runs = IndexRuns(series->train, series->length());
    prep.filter = std::move(filter);
    prep.series = std::move(series);
    return prep;
}

std::vector<TimeIndex> library_times(const PreparedSeries& prep, std::size_t max_lag, std::size_t horizons) {
    const auto back = static_cast<std::ptrdiff_t>(max_lag + prep.filter_memory());
    std::vector<TimeIndex> out;
    for (TimeIndex t : prep.series->train) {
        const auto ti = static_cast<std::ptrdiff_t>(t);
        if (prep.train_runs.window_inside(ti - back, ti + static_cast<std::ptrdiff_t>(horizons)))
            out.push_back(t);
    }
    return out;
}

NeighborLibrary build_library(const PreparedSeries& prep, const EmbeddingCode& code, std::size_t horizons) {
    if (code.variables() != prep.series->variables())
        fail(ErrorKind::LengthMismatch, "code variable count does not match series");
    auto times = library_times(prep, code.max_lag(), horizons);
    const auto coords = code.coords();
    const auto& z = prep.filtered.values;
    std::vector<std::vector<double>> rows(coords.size(), std::vector<double>(times.size()));
    for (std::size_t j = 0; j < coords.size(); ++j) {
        const auto& col = z[coords[j].variable];
        for (std::size_t i = 0; i < times.size(); ++i) rows[j][i] = col[times[i] - coords[j].lag];
    }
    const auto& zf = z[prep.series->target];
    std::vector<std::vector<double>> futures(horizons, std::vector<double>(times.size()));
    for (std::size_t p = 1; p <= horizons; ++p)
        for (std::size_t i = 0; i < times.size(); ++i) futures[p - 1][i] = zf[times[i] + p];
    return NeighborLibrary(std::move(times), std::move(rows), std::move(futures));
}

namespace {

std::span<const double> history_before(const PreparedSeries& prep, TimeIndex t) {
    const std::size_t memory = prep.filter_memory();
    const auto y = prep.series->target_column();
    if (memory == 0) return {};
    if (t + 1 < memory) fail(ErrorKind::InsufficientHistory, "origin too early for filter memory");
    return y.subspan(t + 1 - memory, memory);
}

}  // namespace

ForecastPanel in_sample_panel(const PreparedSeries& prep, const EmbeddingCode& code, std::size_t horizons,
                              const AnalogueConfig& cfg, std::optional<std::span<const TimeIndex>> origins) {
    const auto lib = build_library(prep, code, horizons);
    AnalogueConfig search = cfg;
    std::sort(search.exclusion.begin(), search.exclusion.end());

    ForecastPanel panel;
    panel.horizons = horizons;
    std::vector<std::size_t> rows;
    if (origins) {
        for (TimeIndex t : *origins)
            if (auto pos = lib.position_of(t)) rows.push_back(*pos);
    } else {
        rows.resize(lib.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }
    panel.origins.reserve(rows.size());
    panel.values.reserve(rows.size() * horizons);
    std::vector<double> scratch;
    std::vector<double> query(lib.dimension());
    for (std::size_t r : rows) {
        const TimeIndex t = lib.times()[r];
        for (std::size_t j = 0; j < query.size(); ++j) query[j] = lib.coordinate(j)[r];
        const auto nb = knn_query_excluding(lib, query, search, t, scratch);
        const auto zhat = analogue_forecast_all(lib, nb, search.weighting);
        const auto restored = restore_path(zhat, prep.filter, prep.series->target, history_before(prep, t));
        panel.origins.push_back(t);
        panel.values.insert(panel.values.end(), restored.begin(), restored.end());
    }
    return panel;
}

ForecastPanel in_sample_panel(std::shared_ptr<const TimeSeriesSet> series, const EmbeddingCode& code,
                              const FilterSpec& filter, std::size_t horizons, const AnalogueConfig& cfg) {
    const auto prep = PreparedSeries::prepare_fitted(std::move(series), filter);
    return in_sample_panel(prep, code, horizons, cfg);
}

TimeIndex first_forecastable(const PreparedSeries& prep, const EmbeddingCode& code) {
    return code.max_lag() + prep.filter_memory();
}

ForecastPanel forecast_panel(const PreparedSeries& prep, const NeighborLibrary& lib, const EmbeddingCode& code,
                             const AnalogueConfig& cfg, std::span<const TimeIndex> origins) {
    AnalogueConfig search = cfg;
    std::sort(search.exclusion.begin(), search.exclusion.end());
    const TimeIndex first = first_forecastable(prep, code);
    ForecastPanel panel;
    panel.horizons = lib.horizons();
    panel.origins.assign(origins.begin(), origins.end());
    panel.values.reserve(origins.size() * lib.horizons());
    std::vector<double> scratch;
    for (TimeIndex t : origins) {
        if (t < first || t >= prep.series->length())
            fail(ErrorKind::OutOfHistory, "no delay vector at origin " + std::to_string(t));
        const auto v = build_delay_vector(Columns(prep.filtered.values), code, t);
        const auto nb = knn_query_excluding(lib, v.components, search, std::nullopt, scratch);
        const auto zhat = analogue_forecast_all(lib, nb, search.weighting);
        const auto restored = restore_path(zhat, prep.filter, prep.series->target, history_before(prep, t));
        panel.values.insert(panel.values.end(), restored.begin(), restored.end());
    }
    return panel;
}

}  // namespace embedcast
