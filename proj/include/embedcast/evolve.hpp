#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "embedcast/core.hpp"
#include "embedcast/predictor.hpp"
#include "embedcast/random.hpp"

namespace embedcast {

struct EsConfig {
    std::size_t mu = 50;
    std::size_t lambda = 100;
    std::size_t generations = 10;
    std::size_t population_size = 100;
    double bitflip_prob = -1.0;  // negative selects 1 / (n * l)
    double crossover_prob = 0.5;
    double init_density = 0.15;
    std::uint64_t seed = 1;
    std::size_t workers = 1;

    void validate() const;
    double flip_probability(std::size_t code_bits) const {
        return bitflip_prob >= 0.0 ? bitflip_prob : 1.0 / static_cast<double>(code_bits);
    }
};

struct Scored {
    EmbeddingCode code;
    double fitness;
};

// Every evaluated individual, deduplicated by code. Entries with a
// non-finite fitness are not admitted.
class HallOfFame {
public:
    bool add(const EmbeddingCode& code, double fitness);
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::span<const Scored> entries() const { return entries_; }
    // Ascending fitness, ties in insertion order.
    std::vector<Scored> sorted() const;

    friend bool operator==(const HallOfFame& a, const HallOfFame& b);

private:
    std::vector<Scored> entries_;
    std::unordered_map<EmbeddingCode, std::size_t, EmbeddingCodeHash> index_;
};

struct TrainSplit {
    std::size_t id = 1;
    std::vector<TimeIndex> indices;
};

// K contiguous equal blocks; the remainder goes to the last block.
std::vector<TrainSplit> make_splits(std::span<const TimeIndex> usable, std::size_t k);

// Training times usable as in-sample origins for the smallest code (lag 0).
std::vector<TimeIndex> usable_train_times(const PreparedSeries& prep, std::size_t horizons);

struct FitnessContext {
    const PreparedSeries* prep = nullptr;
    std::size_t lags = 1;  // code lag window l
    std::size_t horizons = 1;
    AnalogueConfig analogue;
};

// Sum over split times and horizons of |forecast - truth| with leave-one-out
// forecasts drawn from the whole training library. Throws NoValidSamples.
double fitness(const EmbeddingCode& code, const TrainSplit& split, const FitnessContext& ctx);

// Memoized, optionally multi-threaded fitness over one split. Codes without
// valid samples score +infinity.
class FitnessCache {
public:
    FitnessCache(const TrainSplit& split, const FitnessContext& ctx, std::size_t workers = 1);

    std::vector<double> evaluate(std::span<const EmbeddingCode> codes);
    std::size_t evaluations() const { return evaluations_; }

private:
    const TrainSplit& split_;
    const FitnessContext& ctx_;
    std::size_t workers_;
    std::size_t evaluations_ = 0;
    std::unordered_map<EmbeddingCode, double, EmbeddingCodeHash> memo_;
};

// Random code with each free bit set with probability `density`.
EmbeddingCode random_code(std::size_t variables, std::size_t lags, std::size_t target, double density,
                          Random& rng);

// Offspring: uniform crossover with a second parent (probability
// crossover_prob), then independent bit flips; the forced bit is restored.
std::vector<EmbeddingCode> vary(std::span<const Scored> parents, std::size_t count, const EsConfig& cfg,
                                Random& rng);

// The mu lowest-fitness individuals of parents followed by offspring
// (stable, so parents win ties).
std::vector<Scored> select_parents(std::span<const Scored> parents, std::span<const Scored> offspring,
                                   std::size_t mu);

struct EsStep {
    std::vector<Scored> parents;
    std::vector<EmbeddingCode> offspring;
};

// Plus selection over the evaluated pool, then lambda new offspring.
EsStep es_step(std::span<const Scored> parents, std::span<const Scored> offspring, const EsConfig& cfg,
               Random& rng);

struct EsRun {
    HallOfFame hall;
    std::vector<double> best_parent_fitness;  // index 0 is the initial population
    std::vector<Scored> parents;
    std::size_t evaluations = 0;
};

EsRun run_es(const TrainSplit& split, const EsConfig& cfg, const FitnessContext& ctx);

// Greedy scan of a fitness-sorted hall: accept a code when it sits at
// Hamming distance >= theta from everything in `existing` and everything
// accepted so far; stop after m acceptances.
std::vector<EmbeddingCode> select_diverse(std::span<const Scored> sorted_hall, std::size_t m, std::size_t theta,
                                          std::span<const EmbeddingCode> existing);

}  // namespace embedcast
