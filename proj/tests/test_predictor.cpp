#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "embedcast/dynamics.hpp"
#include "embedcast/error.hpp"
#include "embedcast/predictor.hpp"
#include "embedcast/random.hpp"
#include "helpers.hpp"

using namespace embedcast;
using testing_helpers::code;
using testing_helpers::make_series;
using testing_helpers::shared;

namespace {

// Points {0:[0], 1:[10], 2:[4]} with one horizon of futures.
NeighborLibrary three_points(std::vector<double> futures = {100, 110, 120}) {
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts{{0, {0.0}}, {1, {10.0}}, {2, {4.0}}};
    return NeighborLibrary::from_points(pts, {futures});
}

AnalogueConfig with_k(std::size_t k) {
    AnalogueConfig c;
    c.neighbors = k;
    return c;
}

double mse_at(const ForecastPanel& panel, const TimeSeriesSet& s, std::size_t p) {
    double se = 0.0;
    for (std::size_t r = 0; r < panel.origins.size(); ++r) {
        const double d = panel.at(r, p) - s.values[s.target][panel.origins[r] + p];
        se += d * d;
    }
    return se / static_cast<double>(panel.origins.size());
}

}  // namespace

TEST(Knn, SingleNeighbor) {
    std::vector<double> q{3.0};
    auto nn = knn_query(three_points(), q, with_k(1));
    ASSERT_EQ(nn.size(), 1u);
    EXPECT_EQ(nn[0].time, 2u);
    EXPECT_DOUBLE_EQ(nn[0].distance, 1.0);
}

TEST(Knn, TwoNeighbors) {
    std::vector<double> q{3.0};
    auto nn = knn_query(three_points(), q, with_k(2));
    ASSERT_EQ(nn.size(), 2u);
    EXPECT_EQ(nn[0].time, 2u);
    EXPECT_DOUBLE_EQ(nn[0].distance, 1.0);
    EXPECT_EQ(nn[1].time, 0u);
    EXPECT_DOUBLE_EQ(nn[1].distance, 3.0);
}

TEST(Knn, Exclusion) {
    auto cfg = with_k(1);
    cfg.exclusion = {2};
    std::vector<double> q{3.0};
    auto nn = knn_query(three_points(), q, cfg);
    ASSERT_EQ(nn.size(), 1u);
    EXPECT_EQ(nn[0].time, 0u);
    EXPECT_DOUBLE_EQ(nn[0].distance, 3.0);
}

TEST(Knn, TiesGoToEarlierTime) {
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts{{7, {2.0}}, {3, {-2.0}}, {5, {2.0}}};
    auto lib = NeighborLibrary::from_points(pts, {{1, 2, 3}});
    std::vector<double> q{0.0};
    auto nn = knn_query(lib, q, with_k(2));
    EXPECT_EQ(nn[0].time, 3u);
    EXPECT_EQ(nn[1].time, 5u);
}

TEST(Knn, EmptyAfterExclusion) {
    auto cfg = with_k(1);
    cfg.exclusion = {0, 1, 2};
    std::vector<double> q{3.0};
    try {
        knn_query(three_points(), q, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyLibrary);
    }
}

TEST(Knn, MatchesBruteForce) {
    Random rng(8);
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts;
    for (TimeIndex t = 0; t < 300; ++t) pts.push_back({t, {rng.normal(), rng.normal(), rng.normal()}});
    auto lib = NeighborLibrary::from_points(pts, {std::vector<double>(300, 0.0)});
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> q{rng.normal(), rng.normal(), rng.normal()};
        auto nn = knn_query(lib, q, with_k(6));
        std::vector<std::pair<double, TimeIndex>> all;
        for (const auto& [t, v] : pts) {
            double d = 0;
            for (int j = 0; j < 3; ++j) d += (v[j] - q[j]) * (v[j] - q[j]);
            all.push_back({d, t});
        }
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(nn[i].time, all[i].second);
    }
}

TEST(AnalogueForecast, SingleNeighbor) {
    std::vector<double> q{3.0};
    EXPECT_DOUBLE_EQ(analogue_forecast(three_points(), q, 1, with_k(1)), 120.0);
}

TEST(AnalogueForecast, EqualDistancesAverage) {
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts{{0, {-1.0}}, {1, {1.0}}};
    auto lib = NeighborLibrary::from_points(pts, {{2.0, 4.0}});
    std::vector<double> q{0.0};
    for (auto mode : {Weighting::InverseSquare, Weighting::LiteralSquare, Weighting::Uniform}) {
        auto cfg = with_k(2);
        cfg.weighting = mode;
        EXPECT_DOUBLE_EQ(analogue_forecast(lib, q, 1, cfg), 3.0);
    }
}

TEST(AnalogueForecast, InverseSquareWeights) {
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts{{0, {1.0}}, {1, {-2.0}}};
    auto lib = NeighborLibrary::from_points(pts, {{0.0, 10.0}});
    std::vector<double> q{0.0};
    const double got = analogue_forecast(lib, q, 1, with_k(2));
    // independent oracle: weights 1/d^2 normalized
    const double w1 = 1.0 / 1.0, w2 = 1.0 / 4.0;
    EXPECT_NEAR(got, (w1 * 0.0 + w2 * 10.0) / (w1 + w2), 1e-12);
    EXPECT_NEAR(got, 2.0, 1e-12);
}

TEST(AnalogueForecast, ZeroDistanceNeighborsShareWeight) {
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts{{0, {0.0}}, {1, {0.0}}, {2, {0.5}}};
    auto lib = NeighborLibrary::from_points(pts, {{1.0, 3.0, 100.0}});
    std::vector<double> q{0.0};
    EXPECT_DOUBLE_EQ(analogue_forecast(lib, q, 1, with_k(3)), 2.0);
}

TEST(AnalogueForecast, MissingFuture) {
    std::vector<double> q{3.0};
    try {
        analogue_forecast(three_points(), q, 2, with_k(1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingFuture);
    }
}

TEST(AnalogueWeights, NormalizedConvexFinite) {
    Random rng(21);
    for (auto mode : {Weighting::InverseSquare, Weighting::LiteralSquare, Weighting::Uniform}) {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<Neighbor> nn;
            const std::size_t k = 1 + rng.index(8);
            const double scale = std::pow(10.0, rng.uniform() * 400 - 200);
            for (std::size_t i = 0; i < k; ++i) nn.push_back({i, scale * (0.1 + rng.uniform())});
            std::sort(nn.begin(), nn.end(), [](auto& a, auto& b) { return a.distance < b.distance; });
            auto w = analogue_weights(nn, mode);
            double sum = 0.0;
            for (double x : w) {
                EXPECT_GE(x, 0.0);
                EXPECT_TRUE(std::isfinite(x));
                sum += x;
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST(AnalogueForecast, WithinNeighborFutureRange) {
    Random rng(4);
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts;
    std::vector<double> fut;
    for (TimeIndex t = 0; t < 100; ++t) {
        pts.push_back({t, {rng.normal(), rng.normal()}});
        fut.push_back(rng.normal() * 10);
    }
    auto lib = NeighborLibrary::from_points(pts, {fut});
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> q{rng.normal(), rng.normal()};
        for (auto mode : {Weighting::InverseSquare, Weighting::LiteralSquare, Weighting::Uniform}) {
            auto cfg = with_k(4);
            cfg.weighting = mode;
            auto nn = knn_query(lib, q, cfg);
            double lo = 1e300, hi = -1e300;
            for (auto& n : nn) {
                lo = std::min(lo, fut[n.time]);
                hi = std::max(hi, fut[n.time]);
            }
            const double y = analogue_forecast(lib, q, 1, cfg);
            EXPECT_GE(y, lo - 1e-12);
            EXPECT_LE(y, hi + 1e-12);
        }
    }
}

TEST(AnalogueForecast, PermutationInvariance) {
    Random rng(31);
    std::vector<std::pair<TimeIndex, std::vector<double>>> pts, perm;
    std::vector<double> fut;
    for (TimeIndex t = 0; t < 200; ++t) {
        std::vector<double> v{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        pts.push_back({t, v});
        perm.push_back({t, {v[2], v[0], v[3], v[1]}});
        fut.push_back(rng.normal());
    }
    auto a = NeighborLibrary::from_points(pts, {fut});
    auto b = NeighborLibrary::from_points(perm, {fut});
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        std::vector<double> qp{q[2], q[0], q[3], q[1]};
        for (auto mode : {Weighting::InverseSquare, Weighting::LiteralSquare, Weighting::Uniform}) {
            auto cfg = with_k(5);
            cfg.weighting = mode;
            const double ya = analogue_forecast(a, q, 1, cfg);
            const double yb = analogue_forecast(b, qp, 1, cfg);
            if (mode == Weighting::Uniform) {
                // the neighbor set is what matters; summation order is fixed by rank
                auto na = knn_query(a, q, cfg), nb = knn_query(b, qp, cfg);
                for (std::size_t i = 0; i < na.size(); ++i) EXPECT_EQ(na[i].time, nb[i].time);
                EXPECT_EQ(ya, yb);
            } else {
                EXPECT_NEAR(ya, yb, 1e-12);
            }
        }
    }
}

TEST(InSample, QueryNeverItsOwnNeighbor) {
    Random rng(2);
    std::vector<double> y(120);
    for (auto& v : y) v = rng.normal();
    auto prep = PreparedSeries::prepare(shared(make_series({y})), FilterSpec::two_tap(1, 0.0));
    auto c = code(1, 3, 0, {1, 1, 1});
    auto lib = build_library(prep, c, 2);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < lib.size(); ++i) {
        auto q = lib.point(i);
        for (std::size_t window : {0u, 3u}) {
            AnalogueConfig cfg;
            cfg.theiler_window = window;
            auto nn = knn_query_excluding(lib, q, cfg, lib.times()[i], scratch);
            for (auto& n : nn) {
                const auto gap = n.time > lib.times()[i] ? n.time - lib.times()[i] : lib.times()[i] - n.time;
                EXPECT_GT(gap, window);
            }
        }
    }
}

TEST(InSample, PeriodTwoExact) {
    std::vector<double> y(60);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = static_cast<double>(t % 2);
    auto s = shared(make_series({y}));
    auto panel = in_sample_panel(s, code(1, 2, 0, {1, 1}), FilterSpec::two_tap(1, 0.0), 1, AnalogueConfig{});
    ASSERT_FALSE(panel.origins.empty());
    for (std::size_t r = 0; r < panel.origins.size(); ++r)
        EXPECT_NEAR(panel.at(r, 1), y[panel.origins[r] + 1], 1e-12);
}

TEST(InSample, ConstantSeries) {
    std::vector<double> y(40, 3.25);
    auto s = shared(make_series({y, y}));
    for (double rho : {0.0, -0.6}) {
        auto panel = in_sample_panel(s, code(2, 2, 0, {1, 1, 1, 0}), FilterSpec::two_tap(2, rho), 3,
                                     AnalogueConfig{});
        for (double v : panel.values) EXPECT_NEAR(v, 3.25, 1e-12);
    }
}

TEST(InSample, NoiseVariableIsWorse) {
    auto sim = default_sim(System::Lorenz63);
    sim.length = 400;
    sim.seed = 5;
    auto l63 = integrate_ode(sim);
    Random rng(77);
    std::vector<double> noise(400);
    for (auto& v : noise) v = rng.normal() * 8.0;
    auto s = shared(make_series({l63.values[0], l63.values[1], noise}));
    // The forced target bit stays, but four noise coordinates swamp it.
    auto noisy = code(3, 4, 0, {1, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1});
    auto clean = code(3, 4, 0, {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
    auto f = FilterSpec::two_tap(3, 0.0);
    auto a = in_sample_panel(s, noisy, f, 3, AnalogueConfig{});
    auto b = in_sample_panel(s, clean, f, 3, AnalogueConfig{});
    for (std::size_t p = 1; p <= 3; ++p) EXPECT_GT(mse_at(a, *s, p), mse_at(b, *s, p));
}

TEST(InSample, FilteredForecastsRestoredToOriginalUnits) {
    // A ramp is forecast exactly after first differencing; raw units prove restoration ran.
    std::vector<double> y(50), x(50);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = 100.0 + 2.0 * static_cast<double>(t);
        x[t] = std::sin(0.3 * static_cast<double>(t));
    }
    auto s = shared(make_series({y, x}));
    auto panel = in_sample_panel(s, code(2, 1, 0, {1, 0}), FilterSpec::two_tap(2, -1.0), 4, AnalogueConfig{});
    for (std::size_t r = 0; r < panel.origins.size(); ++r)
        for (std::size_t p = 1; p <= 4; ++p) EXPECT_NEAR(panel.at(r, p), y[panel.origins[r] + p], 1e-9);
}

TEST(LibraryTimes, FuturesStayInsideTraining) {
    TimeSeriesSet s = make_series({std::vector<double>(30, 1.0)});
    s.train = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 20, 21, 22, 23, 24, 25};
    s.test = {10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 26, 27, 28, 29};
    auto prep = PreparedSeries::prepare(shared(s), FilterSpec::two_tap(1, -0.5));
    auto times = library_times(prep, 2, 3);
    // window [t - 2 - 1, t + 3] inside one run
    EXPECT_EQ(times, (std::vector<TimeIndex>{3, 4, 5, 6}));  // the second run is one sample too short
}

TEST(ForecastPanelTest, OutOfHistory) {
    std::vector<double> y(30);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = std::sin(0.5 * static_cast<double>(t));
    auto s = shared(make_series({y}, 0, 20));
    auto prep = PreparedSeries::prepare(s, FilterSpec::two_tap(1, -0.4));
    auto c = code(1, 3, 0, {1, 0, 1});
    auto lib = build_library(prep, c, 2);
    std::vector<TimeIndex> early{2};
    try {
        forecast_panel(prep, lib, c, AnalogueConfig{}, early);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OutOfHistory);
    }
    std::vector<TimeIndex> fine{3, 25};
    EXPECT_EQ(forecast_panel(prep, lib, c, AnalogueConfig{}, fine).origins.size(), 2u);
}
