#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "embedcast/dynamics.hpp"
#include "embedcast/ensemble.hpp"
#include "embedcast/error.hpp"
#include "embedcast/experiment.hpp"
#include "helpers.hpp"

using namespace embedcast;
using testing_helpers::code;
using testing_helpers::make_series;
using testing_helpers::shared;

namespace {

ForecastPanel panel(std::vector<TimeIndex> origins, std::vector<double> values) {
    ForecastPanel p;
    p.origins = std::move(origins);
    p.horizons = 1;
    p.values = std::move(values);
    return p;
}

std::shared_ptr<const TimeSeriesSet> lorenz63(std::size_t train, std::size_t test, std::uint64_t seed) {
    auto sim = default_sim(System::Lorenz63);
    sim.length = train + test;
    sim.seed = seed;
    return shared(make_series(integrate_ode(sim).values, 0, train));
}

PoolSettings small_settings() {
    PoolSettings s;
    s.splits = 2;
    s.per_split = 1;
    s.theta = 1;
    s.rhos = {0.0, -0.5};
    s.lags = 3;
    s.horizons = 3;
    s.es.mu = 4;
    s.es.lambda = 8;
    s.es.population_size = 8;
    s.es.generations = 3;
    s.es.seed = 5;
    return s;
}

double spreadsheet_mse(const std::vector<double>& f, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - y[i]) * (f[i] - y[i]);
    return s / static_cast<double>(f.size());
}

}  // namespace

TEST(BuildPool, BookkeepingTwoSplitsTwoFilters) {
    const auto series = lorenz63(300, 0, 2);
    const auto build = build_pool(series, small_settings());
    EXPECT_EQ(build.pool.requested, 4u);
    ASSERT_EQ(build.pool.members.size(), 4u);
    EXPECT_FALSE(build.pool.underfull());
    ASSERT_EQ(build.splits.size(), 2u);
    ASSERT_EQ(build.runs.size(), 2u);
    std::set<std::size_t> splits;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& m = build.pool.members[i];
        splits.insert(m.split);
        EXPECT_GE(m.rank, 1u);
        EXPECT_DOUBLE_EQ(m.filter.rho, i % 2 == 0 ? 0.0 : -0.5);
        EXPECT_EQ(m.code, build.pool.members[i - i % 2].code);
        const auto sorted = build.runs[m.split - 1].hall.sorted();
        EXPECT_EQ(sorted[m.rank - 1].code, m.code);
    }
    EXPECT_EQ(splits, (std::set<std::size_t>{1, 2}));
    EXPECT_EQ(build.pool.distinct_codes().size(), 2u);
    EXPECT_GE(hamming(build.pool.members[0].code, build.pool.members[2].code), 1u);
}

TEST(BuildPool, SingleMemberIsBestHallCode) {
    const auto series = lorenz63(300, 0, 2);
    auto s = small_settings();
    s.splits = 1;
    s.rhos = {0.0};
    const auto build = build_pool(series, s);
    ASSERT_EQ(build.pool.members.size(), 1u);
    EXPECT_EQ(build.pool.members[0].code, build.runs[0].hall.sorted().front().code);
    EXPECT_EQ(build.pool.members[0].rank, 1u);
}

TEST(BuildPool, Deterministic) {
    const auto series = lorenz63(300, 0, 2);
    const auto a = build_pool(series, small_settings());
    auto s = small_settings();
    s.es.workers = 3;
    const auto b = build_pool(series, s);
    ASSERT_EQ(a.pool.members.size(), b.pool.members.size());
    for (std::size_t i = 0; i < a.pool.members.size(); ++i) EXPECT_EQ(a.pool.members[i].code, b.pool.members[i].code);
}

TEST(BuildPool, DiversityWithinPool) {
    const auto series = lorenz63(400, 0, 3);
    auto s = small_settings();
    s.splits = 3;
    s.per_split = 3;
    s.theta = 2;
    s.rhos = {0.0};
    const auto codes = build_pool(series, s).pool.distinct_codes();
    for (std::size_t i = 0; i < codes.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) EXPECT_GE(hamming(codes[i], codes[j]), 2u);
}

TEST(RankMembers, Examples) {
    const std::vector<double> truth{0, 0};
    const std::vector<ForecastPanel> two{panel({1, 2}, {0.5, -0.5}), panel({1, 2}, {0.2, 0.2})};
    EXPECT_EQ(rank_members(two, truth, 1), (std::vector<std::size_t>{1, 0}));
    const std::vector<ForecastPanel> same{panel({1, 2}, {1, 1}), panel({1, 2}, {1, 1}), panel({1, 2}, {1, 1})};
    EXPECT_EQ(rank_members(same, truth, 1), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_THROW(rank_members(std::vector<ForecastPanel>{}, truth, 1), Error);
}

TEST(RankMembers, SpreadsheetOracle) {
    const std::vector<double> truth{1.0, -2.0, 0.5, 3.0};
    const std::vector<std::vector<double>> f{{1.5, -2.0, 0.0, 2.0}, {1.1, -1.9, 0.4, 3.2}, {0.0, -2.5, 1.5, 3.0}};
    std::vector<ForecastPanel> panels;
    for (const auto& v : f) panels.push_back(panel({3, 4, 5, 6}, v));
    std::vector<std::size_t> expected{0, 1, 2};
    std::stable_sort(expected.begin(), expected.end(),
                     [&](auto a, auto b) { return spreadsheet_mse(f[a], truth) < spreadsheet_mse(f[b], truth); });
    EXPECT_EQ(rank_members(panels, truth, 1), expected);
    EXPECT_EQ(expected, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Combine, Examples) {
    const std::vector<double> f{1, 2, 3};
    EXPECT_EQ(combine_recursive(f, 1), 1.0);
    EXPECT_EQ(combine_recursive(f, 2), 1.5);
    EXPECT_EQ(combine_recursive(f, 3), 2.0);
    EXPECT_EQ(combine_curve(f), (std::vector<double>{1, 1.5, 2}));
    const std::vector<double> c(7, 2.75);
    for (std::size_t k = 1; k <= c.size(); ++k) EXPECT_EQ(combine_recursive(c, k), 2.75);
    EXPECT_THROW(combine_recursive(f, 0), Error);
    EXPECT_THROW(combine_recursive(f, 4), Error);
}

TEST(Combine, MatchesDirectMean) {
    Random rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> f(10);
        for (auto& x : f) x = 10.0 * rng.normal();
        const auto curve = combine_curve(f);
        for (std::size_t k = 1; k <= f.size(); ++k) {
            const double mean = std::accumulate(f.begin(), f.begin() + k, 0.0) / static_cast<double>(k);
            EXPECT_NEAR(combine_recursive(f, k), mean, 1e-12);
            EXPECT_EQ(curve[k - 1], combine_recursive(f, k));
        }
    }
}

TEST(SelectKHat, Examples) {
    const std::vector<double> truth{1, 2, 3};
    const std::vector<std::vector<double>> one{{1, 2, 2}};
    EXPECT_EQ(select_k_hat(one, truth).k_hat, 1u);
    const std::vector<std::vector<double>> perfect_then_wrong{{1, 2, 3}, {5, 5, 5}};
    const auto sel = select_k_hat(perfect_then_wrong, truth);
    EXPECT_EQ(sel.k_hat, 1u);
    EXPECT_EQ(sel.err_curve[0], 0.0);
}

TEST(SelectKHat, AnticorrelatedTriple) {
    // Errors at four origins; the three rows cancel only when all are averaged.
    const std::vector<double> truth{0, 0, 0, 0};
    const std::vector<std::vector<double>> ranked{{1, -1, 1, -1}, {1, -1, -2, 2}, {-2, 2, 1, -1}};
    std::vector<double> err;
    for (std::size_t k = 1; k <= 3; ++k) {
        double s = 0;
        for (std::size_t t = 0; t < 4; ++t) {
            double m = 0;
            for (std::size_t i = 0; i < k; ++i) m += ranked[i][t];
            s += (m / k) * (m / k);
        }
        err.push_back(s);
    }
    EXPECT_EQ(err, (std::vector<double>{4, 2.5, 0}));
    const auto sel = select_k_hat(ranked, truth);
    EXPECT_EQ(sel.k_hat, 3u);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(sel.err_curve[k], err[k], 1e-12);
}

TEST(SelectKHat, SmallestOnTies) {
    const std::vector<double> truth{0, 0};
    const std::vector<std::vector<double>> ranked{{1, 1}, {1, 1}, {-1, -1}};
    EXPECT_EQ(select_k_hat(ranked, truth).k_hat, 3u);
    const std::vector<std::vector<double>> flat{{1, 1}, {1, 1}};
    EXPECT_EQ(select_k_hat(flat, truth).k_hat, 1u);
}

TEST(Profile, Counting) {
    EnsembleSelection sel;
    HorizonSelection h;
    h.ranking = {0, 1};
    h.count = 2;
    sel.per_horizon.push_back(h);
    h.count = 1;
    sel.per_horizon.push_back(h);
    std::vector<Member> members{{code(3, 2, 0, {1, 1, 0, 0, 0, 0}), FilterSpec::two_tap(3, -0.4), 1, 1},
                                {code(3, 2, 0, {1, 0, 0, 1, 0, 0}), FilterSpec::two_tap(3, 0.0), 1, 2}};
    const auto prof = profile(members, sel, 3);
    ASSERT_EQ(prof.proportion.size(), 2u);
    EXPECT_NEAR(prof.proportion[0][0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(prof.proportion[0][1], 1.0 / 3.0, 1e-15);
    EXPECT_EQ(prof.proportion[0][2], 0.0);
    EXPECT_DOUBLE_EQ(prof.mean_rho[0], -0.2);
    EXPECT_DOUBLE_EQ(prof.mean_dimension[0], 2.0);
    EXPECT_EQ(prof.proportion[1], (std::vector<double>{1.0, 0.0, 0.0}));
    EXPECT_EQ(prof.counts, (std::vector<std::size_t>{2, 1}));
}

class SmallPipeline : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        series_ = lorenz63(400, 60, 4);
        auto s = small_settings();
        s.splits = 3;
        s.per_split = 2;
        s.rhos = {0.0, -0.5, -1.0};
        fit_ = new ProposedFit(fit_proposed(series_, s));
    }
    static void TearDownTestSuite() { delete fit_; }
    static inline std::shared_ptr<const TimeSeriesSet> series_;
    static inline ProposedFit* fit_ = nullptr;
};

TEST_F(SmallPipeline, KHatNeverWorseThanTopMember) {
    for (const auto& h : fit_->fit.selection.per_horizon) {
        EXPECT_LE(h.err_curve[h.count - 1], h.err_curve[0]);
        EXPECT_EQ(h.count, std::min_element(h.err_curve.begin(), h.err_curve.end()) - h.err_curve.begin() + 1);
        const double grid = static_cast<double>(fit_->fit.selection.grid.size());
        EXPECT_NEAR(h.err_curve[0] / grid, h.member_mse[h.ranking[0]], 1e-9 * (1 + h.member_mse[h.ranking[0]]));
    }
}

TEST_F(SmallPipeline, ProportionsSumToOne) {
    const auto prof = profile(fit_->forecaster->members(), fit_->fit.selection, series_->variables());
    for (const auto& row : prof.proportion)
        EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
}

TEST_F(SmallPipeline, TestForecastTwoPathsAgree) {
    auto& fc = *fit_->forecaster;
    const auto& sel = fit_->fit.selection;
    const std::vector<TimeIndex> origins(series_->test.begin() + 5, series_->test.end() - 3);
    const auto combined = forecast_test_panel(fc, sel, origins);
    for (std::size_t p = 1; p <= sel.horizons(); ++p) {
        const auto& h = sel.at(p);
        std::vector<ForecastPanel> fresh;
        for (std::size_t id : h.chosen()) fresh.push_back(fc.test_panel(id, origins));
        for (std::size_t r = 0; r < origins.size(); ++r) {
            std::vector<double> f;
            for (const auto& pnl : fresh) f.push_back(pnl.at(r, p));
            const double expected = combine_recursive(f, h.count);
            EXPECT_EQ(forecast_test(fc, sel, origins[r], p), expected);
            EXPECT_EQ(combined.at(r, p), expected);
        }
    }
}

TEST_F(SmallPipeline, SingleChoiceEqualsTopMember) {
    auto& fc = *fit_->forecaster;
    EnsembleSelection sel = fit_->fit.selection;
    for (auto& h : sel.per_horizon) h.count = 1;
    const TimeIndex t = series_->test[10];
    for (std::size_t p = 1; p <= sel.horizons(); ++p)
        EXPECT_EQ(forecast_test(fc, sel, t, p), fc.forecast(sel.at(p).ranking[0], t)[p - 1]);
}

TEST_F(SmallPipeline, TestFuturesAreNeverRead) {
    auto& fc = *fit_->forecaster;
    const auto& sel = fit_->fit.selection;
    const TimeIndex t = series_->test[20];
    std::vector<double> before;
    for (std::size_t p = 1; p <= sel.horizons(); ++p) before.push_back(forecast_test(fc, sel, t, p));

    auto poisoned = *series_;
    for (auto& column : poisoned.values)
        for (std::size_t s = t + 1; s < column.size(); ++s) column[s] = 1e9;
    auto shared_poisoned = shared(poisoned);
    MemberForecaster other(shared_poisoned, std::vector<Member>(fc.members().begin(), fc.members().end()),
                           fc.horizons(), fc.analogue());
    for (std::size_t p = 1; p <= sel.horizons(); ++p) EXPECT_EQ(forecast_test(other, sel, t, p), before[p - 1]);
}

TEST_F(SmallPipeline, Deterministic) {
    auto s = small_settings();
    s.splits = 3;
    s.per_split = 2;
    s.rhos = {0.0, -0.5, -1.0};
    s.es.workers = 4;
    const auto again = fit_proposed(series_, s);
    const auto& a = fit_->fit.selection;
    const auto& b = again.fit.selection;
    EXPECT_EQ(a.grid, b.grid);
    for (std::size_t p = 1; p <= a.horizons(); ++p) {
        EXPECT_EQ(a.at(p).ranking, b.at(p).ranking);
        EXPECT_EQ(a.at(p).count, b.at(p).count);
        EXPECT_EQ(a.at(p).err_curve, b.at(p).err_curve);
    }
}

// Full-scale Lorenz'96I run (5 system variables, 5 random walks,
// length 1000, data seed 7): random-walk variables should be rare.
class Lorenz96Fixture : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        auto cfg = load_config(std::string(EMBEDCAST_SOURCE_DIR) + "/configs/lorenz96.yaml");
        series_ = shared(make_dataset(cfg, 7));
        PoolSettings s;
        s.splits = cfg.splits;
        s.per_split = cfg.per_split;
        s.theta = cfg.theta;
        s.rhos = cfg.rhos;
        s.lags = cfg.lags;
        s.horizons = cfg.horizons;
        s.es = cfg.es;
        s.es.seed = 7;
        s.es.workers = 4;
        fit_ = new ProposedFit(fit_proposed(series_, s));
    }
    static void TearDownTestSuite() { delete fit_; }
    static inline std::shared_ptr<const TimeSeriesSet> series_;
    static inline ProposedFit* fit_ = nullptr;
};

TEST_F(Lorenz96Fixture, RandomWalkBitsAreRareInPool) {
    const auto codes = fit_->build.pool.distinct_codes();
    EXPECT_EQ(codes.size(), 30u);
    std::size_t walk = 0, total = 0;
    for (const auto& c : codes)
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c.bit(i)) {
                ++total;
                if (i / c.lags() >= 5) ++walk;
            }
    const double share = static_cast<double>(walk) / static_cast<double>(total);
    RecordProperty("random_walk_bit_share", std::to_string(share));
    EXPECT_LT(share, 0.2);
}

TEST_F(Lorenz96Fixture, RandomWalkProportionSmallAtFiveSteps) {
    const auto prof = profile(fit_->forecaster->members(), fit_->fit.selection, series_->variables());
    double walk = 0;
    for (std::size_t v = 5; v < 10; ++v) walk += prof.proportion[4][v];
    RecordProperty("random_walk_proportion_p5", std::to_string(walk));
    EXPECT_LT(walk, 0.1);
}
