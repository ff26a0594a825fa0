#include "embedcast/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "embedcast/error.hpp"
#include "embedcast/parallel.hpp"

namespace embedcast {

void EsConfig::validate() const {
    if (mu < 1) fail(ErrorKind::InvalidArgument, "mu must be >= 1");
    if (lambda < 1) fail(ErrorKind::InvalidArgument, "lambda must be >= 1");
    if (population_size < mu) fail(ErrorKind::InvalidArgument, "population_size must be >= mu");
    if (bitflip_prob > 1.0)
        fail(ErrorKind::InvalidArgument, "bitflip_prob must lie in [0, 1] (negative selects the default)");
    if (crossover_prob < 0.0 || crossover_prob > 1.0)
        fail(ErrorKind::InvalidArgument, "crossover_prob must lie in [0, 1]");
    if (init_density <= 0.0 || init_density >= 1.0)
        fail(ErrorKind::InvalidArgument, "init_density must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Hall of Fame
// ---------------------------------------------------------------------------

bool HallOfFame::add(const EmbeddingCode& code, double fitness) {
    if (!std::isfinite(fitness)) return false;
    if (index_.contains(code)) return false;
    index_.emplace(code, entries_.size());
    entries_.push_back({code, fitness});
    return true;
}

std::vector<Scored> HallOfFame::sorted() const {
    std::vector<Scored> out = entries_;
    std::stable_sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) { return a.fitness < b.fitness; });
    return out;
}

bool operator==(const HallOfFame& a, const HallOfFame& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
        if (!(a.entries_[i].code == b.entries_[i].code)) return false;
        if (a.entries_[i].fitness != b.entries_[i].fitness) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Splits and fitness
// ---------------------------------------------------------------------------

std::vector<TrainSplit> make_splits(std::span<const TimeIndex> usable, std::size_t k) {
    if (k == 0) fail(ErrorKind::InvalidArgument, "K must be >= 1");
    if (usable.size() < k)
        fail(ErrorKind::NoValidSamples, "cannot split " + std::to_string(usable.size()) + " samples into " +
                                            std::to_string(k) + " blocks");
    const std::size_t block = usable.size() / k;
    std::vector<TrainSplit> out;
    for (std::size_t s = 0; s < k; ++s) {
        const std::size_t begin = s * block;
        const std::size_t end = (s + 1 == k) ? usable.size() : begin + block;
        out.push_back({s + 1, std::vector<TimeIndex>(usable.begin() + begin, usable.begin() + end)});
    }
    return out;
}

std::vector<TimeIndex> usable_train_times(const PreparedSeries& prep, std::size_t horizons) {
    return library_times(prep, 0, horizons);
}

double fitness(const EmbeddingCode& code, const TrainSplit& split, const FitnessContext& ctx) {
    const auto panel = in_sample_panel(*ctx.prep, code, ctx.horizons, ctx.analogue,
                                       std::span<const TimeIndex>(split.indices));
    if (panel.origins.empty())
        fail(ErrorKind::NoValidSamples, "code " + code.to_string() + " has no valid samples in split " +
                                            std::to_string(split.id));
    const auto y = ctx.prep->series->target_column();
    double total = 0.0;
    for (std::size_t r = 0; r < panel.origins.size(); ++r)
        for (std::size_t p = 1; p <= ctx.horizons; ++p)
            total += std::abs(panel.at(r, p) - y[panel.origins[r] + p]);
    return total;
}

FitnessCache::FitnessCache(const TrainSplit& split, const FitnessContext& ctx, std::size_t workers)
    : split_(split), ctx_(ctx), workers_(workers) {}

std::vector<double> FitnessCache::evaluate(std::span<const EmbeddingCode> codes) {
    std::vector<EmbeddingCode> pending;
    {
        std::unordered_map<EmbeddingCode, bool, EmbeddingCodeHash> queued;
        for (const auto& c : codes)
            if (!memo_.contains(c) && queued.emplace(c, true).second) pending.push_back(c);
    }
    std::vector<double> scores(pending.size());
    parallel_for(pending.size(), workers_, [&](std::size_t i) {
        try {
            scores[i] = fitness(pending[i], split_, ctx_);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoValidSamples) throw;
            scores[i] = std::numeric_limits<double>::infinity();
        }
    });
    evaluations_ += pending.size();
    for (std::size_t i = 0; i < pending.size(); ++i) memo_.emplace(pending[i], scores[i]);
    std::vector<double> out;
    out.reserve(codes.size());
    for (const auto& c : codes) out.push_back(memo_.at(c));
    return out;
}

// ---------------------------------------------------------------------------
// Variation and selection
// ---------------------------------------------------------------------------

EmbeddingCode random_code(std::size_t variables, std::size_t lags, std::size_t target, double density,
                          Random& rng) {
    std::vector<std::uint8_t> bits(variables * lags, 0);
    for (auto& b : bits) b = rng.bernoulli(density) ? 1 : 0;
    return EmbeddingCode::with_target_forced(variables, lags, target, std::move(bits));
}

std::vector<EmbeddingCode> vary(std::span<const Scored> parents, std::size_t count, const EsConfig& cfg,
                                Random& rng) {
    if (parents.empty()) fail(ErrorKind::InvalidArgument, "no parents to vary");
    const auto& proto = parents.front().code;
    const double flip = cfg.flip_probability(proto.size());
    std::vector<EmbeddingCode> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        const auto& first = parents[rng.index(parents.size())].code;
        std::vector<std::uint8_t> bits(first.bits().begin(), first.bits().end());
        if (rng.bernoulli(cfg.crossover_prob)) {
            const auto& second = parents[rng.index(parents.size())].code;
            for (std::size_t i = 0; i < bits.size(); ++i)
                if (rng.bernoulli(0.5)) bits[i] = second.bits()[i];
        }
        for (auto& b : bits)
            if (rng.bernoulli(flip)) b ^= 1;
        out.push_back(
            EmbeddingCode::with_target_forced(proto.variables(), proto.lags(), proto.target(), std::move(bits)));
    }
    return out;
}

std::vector<Scored> select_parents(std::span<const Scored> parents, std::span<const Scored> offspring,
                                   std::size_t mu) {
    std::vector<Scored> pool(parents.begin(), parents.end());
    pool.insert(pool.end(), offspring.begin(), offspring.end());
    std::stable_sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) { return a.fitness < b.fitness; });
    if (pool.size() > mu) pool.resize(mu);
    return pool;
}

EsStep es_step(std::span<const Scored> parents, std::span<const Scored> offspring, const EsConfig& cfg,
               Random& rng) {
    EsStep step;
    step.parents = select_parents(parents, offspring, cfg.mu);
    step.offspring = vary(step.parents, cfg.lambda, cfg, rng);
    return step;
}

namespace {

std::vector<Scored> score(std::span<const EmbeddingCode> codes, FitnessCache& cache, HallOfFame& hall) {
    const auto fit = cache.evaluate(codes);
    std::vector<Scored> out;
    out.reserve(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        hall.add(codes[i], fit[i]);
        out.push_back({codes[i], fit[i]});
    }
    return out;
}

}  // namespace

EsRun run_es(const TrainSplit& split, const EsConfig& cfg, const FitnessContext& ctx) {
    cfg.validate();
    const auto& series = *ctx.prep->series;
    Random rng(cfg.seed);
    FitnessCache cache(split, ctx, cfg.workers);
    EsRun run;

    std::vector<EmbeddingCode> population;
    population.reserve(cfg.population_size);
    for (std::size_t i = 0; i < cfg.population_size; ++i)
        population.push_back(random_code(series.variables(), ctx.lags, series.target, cfg.init_density, rng));
    auto evaluated = score(population, cache, run.hall);
    run.parents = select_parents({}, evaluated, cfg.mu);
    run.best_parent_fitness.push_back(run.parents.front().fitness);

    for (std::size_t g = 0; g < cfg.generations; ++g) {
        auto offspring = vary(run.parents, cfg.lambda, cfg, rng);
        auto scored = score(offspring, cache, run.hall);
        run.parents = select_parents(run.parents, scored, cfg.mu);
        run.best_parent_fitness.push_back(run.parents.front().fitness);
    }
    run.evaluations = cache.evaluations();
    return run;
}

std::vector<EmbeddingCode> select_diverse(std::span<const Scored> sorted_hall, std::size_t m, std::size_t theta,
                                          std::span<const EmbeddingCode> existing) {
    std::vector<EmbeddingCode> accepted;
    for (const auto& entry : sorted_hall) {
        if (accepted.size() >= m) break;
        const auto far = [&](const EmbeddingCode& other) { return hamming(entry.code, other) >= theta; };
        if (std::all_of(existing.begin(), existing.end(), far) && std::all_of(accepted.begin(), accepted.end(), far))
            accepted.push_back(entry.code);
    }
    return accepted;
}

}  // namespace embedcast
