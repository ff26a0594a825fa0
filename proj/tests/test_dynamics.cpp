#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embedcast/dynamics.hpp"
#include "embedcast/error.hpp"
#include "embedcast/random.hpp"
#include "helpers.hpp"

using namespace embedcast;
using testing_helpers::make_series;

namespace {

double stddev(std::span<const double> x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

State lorenz63_after(State x, double h, std::size_t steps) {
    const Derivative f = [](std::span<const double> s, std::span<double> d) {
        lorenz63_derivative(s, d, 10.0, 28.0, 8.0 / 3.0);
    };
    for (std::size_t i = 0; i < steps; ++i) rk4_step(f, x, h);
    return x;
}

double distance(const State& a, const State& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST(Derivatives, FixedPoints) {
    std::vector<double> dx(3);
    lorenz63_derivative(std::vector<double>{0, 0, 0}, dx, 10, 28, 8.0 / 3.0);
    EXPECT_EQ(dx, (std::vector<double>{0, 0, 0}));

    std::vector<double> x(10, 8.0), d(10);
    lorenz96_derivative(x, d, 8.0);
    for (double v : d) EXPECT_EQ(v, 0.0);

    auto sim = default_sim(System::Lorenz96);
    sim.length = 20;
    sim.transient_discard = 0;
    const auto s = integrate_ode(sim, State(10, 8.0));
    for (const auto& col : s.values)
        for (double v : col) EXPECT_EQ(v, 8.0);
}

TEST(Derivatives, RosslerPlugIn) {
    std::vector<double> dx(3);
    rossler_derivative(std::vector<double>{1, 1, 1}, dx, 0.36, 0.4, 4.5);
    EXPECT_DOUBLE_EQ(dx[0], -2.0);
    EXPECT_DOUBLE_EQ(dx[1], 1.36);
    EXPECT_DOUBLE_EQ(dx[2], -3.1);
}

TEST(Derivatives, Lorenz96Cyclicity) {
    Random rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(7), dx(7), rx(7), drx(7);
        for (auto& v : x) v = 5.0 * rng.normal();
        std::rotate_copy(x.begin(), x.begin() + 1, x.end(), rx.begin());
        lorenz96_derivative(x, dx, 8.0);
        lorenz96_derivative(rx, drx, 8.0);
        std::rotate(dx.begin(), dx.begin() + 1, dx.end());
        EXPECT_EQ(dx, drx);
    }
}

// Error after a fixed interval against a dt/100 reference; halving dt
// should shrink it by about 2^4.
TEST(Rk4, FourthOrder) {
    const State x0{1.0, 1.0, 20.0};
    const double h = 0.01, span = 0.5;
    const auto steps = static_cast<std::size_t>(std::lround(span / h));
    const auto reference = lorenz63_after(x0, h / 100.0, steps * 100);
    const double coarse = distance(lorenz63_after(x0, h, steps), reference);
    const double fine = distance(lorenz63_after(x0, h / 2.0, steps * 2), reference);
    const double order = std::log2(coarse / fine);
    RecordProperty("rk4_order", std::to_string(order));
    EXPECT_GE(order, 3.7);
    EXPECT_LE(order, 4.3);
}

TEST(IntegrateOde, LayoutAndDeterminism) {
    auto sim = default_sim(System::Lorenz63);
    sim.length = 50;
    sim.seed = 3;
    const auto a = integrate_ode(sim);
    EXPECT_EQ(a.variables(), 3u);
    EXPECT_EQ(a.length(), 50u);
    EXPECT_EQ(a.values, integrate_ode(sim).values);
    sim.seed = 4;
    EXPECT_NE(a.values, integrate_ode(sim).values);

    auto rs = default_sim(System::Rossler);
    rs.length = 30;
    EXPECT_EQ(integrate_ode(rs).values, integrate_ode(rs).values);
}

TEST(IntegrateOde, BlowUpIsReported) {
    auto sim = default_sim(System::Lorenz63);
    sim.dt = 0.5;
    sim.record_stride = 1;
    sim.length = 200;
    try {
        integrate_ode(sim);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonFiniteState);
    }
}

TEST(IntegrateOde, Validation) {
    auto sim = default_sim(System::Lorenz63);
    sim.dt = 0;
    EXPECT_THROW(integrate_ode(sim), Error);
    sim = default_sim(System::Lorenz63);
    sim.record_stride = 0;
    EXPECT_THROW(integrate_ode(sim), Error);
    sim = default_sim(System::Lorenz96);
    sim.dimension = 3;
    EXPECT_THROW(integrate_ode(sim), Error);
}

TEST(Ks, ZeroFieldStaysZero) {
    auto sim = default_sim(System::KuramotoSivashinsky);
    sim.length = 20;
    sim.transient_discard = 0;
    const auto s = integrate_ks(sim, State(128, 0.0));
    for (const auto& col : s.values)
        for (double v : col) EXPECT_EQ(v, 0.0);
}

TEST(Ks, MeanConserved) {
    auto sim = default_sim(System::KuramotoSivashinsky);
    sim.length = 200;
    sim.dimension = 128;
    sim.seed = 2;
    const auto s = integrate_ks(sim);
    ASSERT_EQ(s.variables(), 128u);
    double worst = 0;
    for (std::size_t t = 0; t < s.length(); ++t) {
        double m = 0;
        for (const auto& col : s.values) m += col[t];
        worst = std::max(worst, std::abs(m / 128.0));
    }
    RecordProperty("ks_max_abs_mean", std::to_string(worst));
    EXPECT_LT(worst, 1e-6);
}

TEST(Ks, Bounded) {
    auto sim = default_sim(System::KuramotoSivashinsky);
    sim.length = 1000;
    const auto s = integrate_ks(sim);
    EXPECT_EQ(s.variables(), 10u);
    double worst = 0;
    for (const auto& col : s.values)
        for (double v : col) worst = std::max(worst, std::abs(v));
    RecordProperty("ks_max_abs", std::to_string(worst));
    EXPECT_LT(worst, 10.0);
    EXPECT_GT(worst, 0.5);
    sim.length = 30;
    EXPECT_EQ(integrate_ks(sim).values, integrate_ks(sim).values);
}

TEST(RandomWalk, Examples) {
    EXPECT_EQ(random_walk(1, 5), std::vector<double>{0.0});
    EXPECT_EQ(random_walk(100, 5), random_walk(100, 5));
    EXPECT_NE(random_walk(100, 5), random_walk(100, 6));
}

TEST(RandomWalk, UnitIncrements) {
    const auto w = random_walk(100001, 9);
    std::vector<double> inc(w.size() - 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) inc[i] = w[i + 1] - w[i];
    const double var = stddev(inc) * stddev(inc);
    EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Noise, ZeroScaleIsIdentity) {
    auto sim = default_sim(System::Lorenz63);
    sim.length = 100;
    const auto s = integrate_ode(sim);
    EXPECT_EQ(add_observational_noise(s, 0.0, 1).values, s.values);
}

TEST(Noise, ConstantUnchanged) {
    const auto s = make_series({std::vector<double>(50, 2.0), {}}, 0);
    auto t = s;
    t.values[1].resize(50);
    for (std::size_t i = 0; i < 50; ++i) t.values[1][i] = static_cast<double>(i);
    const auto noisy = add_observational_noise(t, 0.5, 3);
    EXPECT_EQ(noisy.values[0], t.values[0]);
    EXPECT_NE(noisy.values[1], t.values[1]);
}

TEST(Noise, ScaledByStd) {
    Random rng(12);
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.normal();
    const double sd = stddev(x);
    for (auto& v : x) v /= sd;
    const auto s = make_series({x, x}, 0);
    const auto noisy = add_observational_noise(s, 0.1, 4);
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = noisy.values[0][i] - x[i];
    const double added = stddev(diff);
    EXPECT_GE(added, 0.09);
    EXPECT_LE(added, 0.11);

    const auto target_only = add_observational_noise(s, 0.1, 4, NoiseMode::TargetOnly);
    EXPECT_EQ(target_only.values[1], x);
    EXPECT_NE(target_only.values[0], x);
}

TEST(Dataset, LayoutAndSplit) {
    DatasetSpec spec;
    spec.sim = default_sim(System::Lorenz96);
    spec.sim.dimension = 10;
    spec.sim.seed = 6;
    spec.observed = 5;
    spec.random_walks = 5;
    spec.train_length = 80;
    spec.test_length = 20;
    const auto s = generate_dataset(spec);
    EXPECT_EQ(s.variables(), 10u);
    EXPECT_EQ(s.length(), 100u);
    EXPECT_EQ(s.names[9], "x9");
    EXPECT_EQ(s.values[5][0], 0.0);
    EXPECT_EQ(s.train.size(), 80u);
    EXPECT_EQ(s.test.front(), 80u);
    EXPECT_EQ(s.test.size(), 20u);
    EXPECT_EQ(s.values, generate_dataset(spec).values);

    spec.target = "nope";
    EXPECT_THROW(generate_dataset(spec), Error);
}

TEST(Dataset, FloodSurrogate) {
    const auto s = flood_surrogate(400, 2);
    EXPECT_EQ(s.variables(), 9u);
    EXPECT_EQ(s.names[0], "Q");
    EXPECT_EQ(s.sample_period, 6.0);
    for (const auto& col : s.values)
        for (double v : col) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(s.values, flood_surrogate(400, 2).values);
}
