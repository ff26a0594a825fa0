#include "embedcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "embedcast/error.hpp"
#include "embedcast/random.hpp"

namespace embedcast {

void BaselineConfig::validate() const {
    if (dimension < 1) fail(ErrorKind::InvalidArgument, "baseline dimension E must be >= 1");
    if (lags < 1) fail(ErrorKind::InvalidArgument, "baseline lag window must be >= 1");
    if (candidates < 1) fail(ErrorKind::InvalidArgument, "baseline candidate count must be >= 1");
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double acc = 1.0L;
    for (std::size_t i = 1; i <= k; ++i) {
        acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        if (acc > 1e18L) return std::numeric_limits<std::size_t>::max();
    }
    return static_cast<std::size_t>(std::llround(acc));
}

// Free slots (every slot except the target's lag 0) a candidate may use.
std::vector<std::size_t> free_slots(std::size_t variables, std::size_t target, const BaselineConfig& cfg) {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < variables; ++v)
        for (std::size_t lag = 0; lag < cfg.lags; ++lag) {
            if (cfg.nondelay && lag > 0) continue;
            if (v == target && lag == 0) continue;
            out.push_back(v * cfg.lags + lag);
        }
    return out;
}

EmbeddingCode code_from(std::size_t variables, std::size_t target, std::size_t lags,
                        std::span<const std::size_t> slots) {
    std::vector<std::uint8_t> bits(variables * lags, 0);
    for (std::size_t s : slots) bits[s] = 1;
    return EmbeddingCode::with_target_forced(variables, lags, target, std::move(bits));
}

// All k-subsets of [0, n) in lexicographic order.
std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

// Floyd's sampling of k distinct values from [0, n), sorted.
std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, Random& rng) {
    std::set<std::size_t> chosen;
    for (std::size_t j = n - k; j < n; ++j) {
        const std::size_t t = rng.index(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

}  // namespace

std::size_t fixed_dimension_count(std::size_t variables, const BaselineConfig& cfg) {
    const std::size_t slots = cfg.nondelay ? variables - 1 : variables * cfg.lags - 1;
    return binomial(slots, cfg.dimension - 1);
}

std::vector<EmbeddingCode> fixed_dimension_codes(std::size_t variables, std::size_t target,
                                                 const BaselineConfig& cfg) {
    cfg.validate();
    const auto slots = free_slots(variables, target, cfg);
    const std::size_t pick = cfg.dimension - 1;
    if (pick > slots.size())
        fail(ErrorKind::InsufficientVariables, "cannot build E=" + std::to_string(cfg.dimension) + " codes from " +
                                                   std::to_string(slots.size() + 1) + " slots");
    const std::size_t total = fixed_dimension_count(variables, cfg);
    Random rng(cfg.seed);
    std::vector<EmbeddingCode> out;
    auto emit = [&](std::span<const std::size_t> subset) {
        std::vector<std::size_t> chosen;
        for (std::size_t i : subset) chosen.push_back(slots[i]);
        out.push_back(code_from(variables, target, cfg.lags, chosen));
    };

    if (total <= cfg.candidates) {
        for (const auto& s : all_subsets(slots.size(), pick)) emit(s);
        return out;
    }
    if (total / 4 <= cfg.candidates) {
        auto subsets = all_subsets(slots.size(), pick);
        for (std::size_t i = 0; i < cfg.candidates; ++i) {
            const std::size_t j = i + rng.index(subsets.size() - i);
            std::swap(subsets[i], subsets[j]);
            emit(subsets[i]);
        }
        return out;
    }
    std::set<std::vector<std::size_t>> seen;
    while (out.size() < cfg.candidates) {
        auto s = random_subset(slots.size(), pick, rng);
        if (seen.insert(s).second) emit(s);
    }
    return out;
}

namespace {

std::vector<Member> members_for(std::span<const EmbeddingCode> codes, std::size_t variables) {
    std::vector<Member> out;
    out.reserve(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i)
        out.push_back({codes[i], search_filter(variables), 0, i + 1});
    return out;
}

}  // namespace

BaselineFit fit_mve(std::shared_ptr<const TimeSeriesSet> series, const BaselineConfig& cfg, std::size_t horizons,
                    const AnalogueConfig& analogue, std::size_t workers) {
    const auto codes = fixed_dimension_codes(series->variables(), series->target, cfg);
    const auto count = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(codes.size()))));
    BaselineFit out;
    out.forecaster = std::make_unique<MemberForecaster>(series, members_for(codes, series->variables()), horizons,
                                                        analogue);
    out.fit = fit_ensemble(*out.forecaster, CountRule::Fixed, std::max<std::size_t>(count, 1), workers);
    return out;
}

BaselineFit fit_rde(std::shared_ptr<const TimeSeriesSet> series, BaselineConfig cfg, std::size_t horizons,
                    const AnalogueConfig& analogue, std::size_t workers) {
    cfg.nondelay = true;
    if (series->variables() < cfg.dimension)
        fail(ErrorKind::InsufficientVariables, "RDE needs at least E=" + std::to_string(cfg.dimension) +
                                                   " variables, series has " +
                                                   std::to_string(series->variables()));
    const auto codes = fixed_dimension_codes(series->variables(), series->target, cfg);
    const std::size_t count = cfg.combine > 0 ? cfg.combine : cfg.dimension;
    BaselineFit out;
    out.forecaster = std::make_unique<MemberForecaster>(series, members_for(codes, series->variables()), horizons,
                                                        analogue);
    out.fit = fit_ensemble(*out.forecaster, CountRule::Fixed, count, workers);
    return out;
}

BaselineFit fit_sbe(std::shared_ptr<const TimeSeriesSet> series, const EsConfig& es, std::size_t lags,
                    std::size_t horizons, const AnalogueConfig& analogue) {
    PoolSettings settings;
    settings.splits = 1;
    settings.per_split = 1;
    settings.theta = 0;
    settings.rhos = {0.0};
    settings.lags = lags;
    settings.horizons = horizons;
    settings.es = es;
    settings.analogue = analogue;
    auto build = build_pool(series, settings);
    if (build.pool.members.empty()) fail(ErrorKind::NoValidSamples, "single-best search found no finite code");
    BaselineFit out;
    out.forecaster = std::make_unique<MemberForecaster>(series, build.pool.members, horizons, analogue);
    out.fit = fit_ensemble(*out.forecaster, CountRule::Fixed, 1, es.workers);
    return out;
}

ForecastPanel combined_in_sample(const FittedEnsemble& fit) {
    ForecastPanel out;
    out.horizons = fit.selection.horizons();
    out.origins = fit.selection.grid;
    out.values.resize(out.origins.size() * out.horizons);
    std::vector<double> forecasts;
    for (std::size_t r = 0; r < out.origins.size(); ++r)
        for (std::size_t p = 1; p <= out.horizons; ++p) {
            const auto& h = fit.selection.at(p);
            forecasts.clear();
            for (std::size_t id : h.chosen()) forecasts.push_back(fit.in_sample[id].at(r, p));
            out.values[r * out.horizons + (p - 1)] = combine_recursive(forecasts, h.count);
        }
    return out;
}

}  // namespace embedcast
