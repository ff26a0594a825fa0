#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "embedcast/ensemble.hpp"

namespace embedcast {

struct BaselineConfig {
    std::size_t dimension = 4;     // E
    std::size_t lags = 4;          // l
    std::size_t candidates = 1000; // m
    std::uint64_t seed = 1;
    bool nondelay = false;
    std::size_t combine = 0;       // RDE only: forecasts averaged, 0 selects E

    void validate() const;
};

// Distinct codes of popcount exactly E containing the target's lag-0 slot.
// Nondelay codes use lag 0 only. Every candidate is returned, in enumeration
// order, when there are at most m of them; otherwise m are sampled without
// replacement.
std::vector<EmbeddingCode> fixed_dimension_codes(std::size_t variables, std::size_t target,
                                                 const BaselineConfig& cfg);

// Number of fixed-dimension candidates, saturating at SIZE_MAX.
std::size_t fixed_dimension_count(std::size_t variables, const BaselineConfig& cfg);

struct BaselineFit {
    std::unique_ptr<MemberForecaster> forecaster;
    FittedEnsemble fit;
};

// Multiview embedding: top floor(sqrt(candidates)) by in-sample error.
BaselineFit fit_mve(std::shared_ptr<const TimeSeriesSet> series, const BaselineConfig& cfg, std::size_t horizons,
                    const AnalogueConfig& analogue, std::size_t workers = 1);

// Nondelay random embeddings, top `combine` (default E) averaged.
BaselineFit fit_rde(std::shared_ptr<const TimeSeriesSet> series, BaselineConfig cfg, std::size_t horizons,
                    const AnalogueConfig& analogue, std::size_t workers = 1);

// Single best code from one ES run over the whole training set.
BaselineFit fit_sbe(std::shared_ptr<const TimeSeriesSet> series, const EsConfig& es, std::size_t lags,
                    std::size_t horizons, const AnalogueConfig& analogue);

// In-sample combined forecasts on the fit's grid.
ForecastPanel combined_in_sample(const FittedEnsemble& fit);

}  // namespace embedcast
