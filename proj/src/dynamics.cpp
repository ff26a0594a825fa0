#include "embedcast/dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "embedcast/error.hpp"
#include "embedcast/random.hpp"

namespace embedcast {

namespace {

// Seed streams so that each random component of a dataset draws independently.
enum SeedStream : std::uint64_t {
    kInitialState = 1,
    kNoise = 2,
    kRandomWalkBase = 100,
    kFlood = 3,
};

void check_finite(std::span<const double> x, std::size_t sample) {
    for (double v : x)
        if (!std::isfinite(v) || std::abs(v) > 1e12)
            fail(ErrorKind::NonFiniteState, "state diverged at sample " + std::to_string(sample));
}

std::vector<std::string> numbered_names(std::size_t count, std::size_t offset = 0) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back("x" + std::to_string(i + offset));
    return out;
}

}  // namespace

std::optional<System> parse_system(const std::string& name) {
    if (name == "lorenz63") return System::Lorenz63;
    if (name == "rossler") return System::Rossler;
    if (name == "lorenz96") return System::Lorenz96;
    if (name == "kuramoto-sivashinsky" || name == "ks") return System::KuramotoSivashinsky;
    if (name == "random-walk") return System::RandomWalk;
    if (name == "flood-surrogate") return System::FloodSurrogate;
    return std::nullopt;
}

std::string to_string(System system) {
    switch (system) {
        case System::Lorenz63: return "lorenz63";
        case System::Rossler: return "rossler";
        case System::Lorenz96: return "lorenz96";
        case System::KuramotoSivashinsky: return "kuramoto-sivashinsky";
        case System::RandomWalk: return "random-walk";
        case System::FloodSurrogate: return "flood-surrogate";
    }
    return "unknown";
}

double SimSpec::parameter(const std::string& name) const {
    auto it = parameters.find(name);
    if (it == parameters.end()) fail(ErrorKind::InvalidArgument, "missing system parameter '" + name + "'");
    return it->second;
}

void SimSpec::validate() const {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
    if (record_stride < 1) fail(ErrorKind::InvalidArgument, "record_stride must be >= 1");
    if (length < 1) fail(ErrorKind::InvalidArgument, "length must be >= 1");
    if (system == System::Lorenz96 && dimension < 4)
        fail(ErrorKind::InvalidArgument, "Lorenz'96 needs at least 4 variables");
}

SimSpec default_sim(System system) {
    SimSpec s;
    s.system = system;
    switch (system) {
        case System::Lorenz63:
            s.parameters = {{"p", 10.0}, {"r", 28.0}, {"b", 8.0 / 3.0}};
            s.dt = 0.001;
            s.record_stride = 100;
            s.dimension = 3;
            break;
        case System::Rossler:
            s.parameters = {{"a", 0.36}, {"b", 0.4}, {"c", 4.5}};
            s.dt = 0.001;
            s.record_stride = 500;
            s.dimension = 3;
            break;
        case System::Lorenz96:
            s.parameters = {{"F", 8.0}};
            s.dt = 0.001;
            s.record_stride = 50;
            s.dimension = 10;
            break;
        case System::KuramotoSivashinsky:
            s.parameters = {{"L", 22.0}, {"grid", 128.0}};
            s.dt = 0.25;
            s.record_stride = 4;
            s.dimension = 10;
            s.transient_discard = 200;
            break;
        case System::RandomWalk:
        case System::FloodSurrogate:
            s.dt = 1.0;
            s.record_stride = 1;
            s.dimension = system == System::RandomWalk ? 1 : 9;
            s.transient_discard = 0;
            break;
    }
    return s;
}

// ---------------------------------------------------------------------------
// ODE systems
// ---------------------------------------------------------------------------

void lorenz63_derivative(std::span<const double> x, std::span<double> dx, double p, double r, double b) {
    dx[0] = p * (x[1] - x[0]);
    dx[1] = x[0] * (r - x[2]) - x[1];
    dx[2] = x[0] * x[1] - b * x[2];
}

void rossler_derivative(std::span<const double> x, std::span<double> dx, double a, double b, double c) {
    dx[0] = -x[1] - x[2];
    dx[1] = x[0] + a * x[1];
    dx[2] = b + x[2] * (x[0] - c);
}

void lorenz96_derivative(std::span<const double> x, std::span<double> dx, double forcing) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = x[(i + n - 1) % n];
        const double next = x[(i + 1) % n];
        const double prev2 = x[(i + n - 2) % n];
        dx[i] = prev * (next - prev2) - x[i] + forcing;
    }
}

void rk4_step(const Derivative& f, State& x, double dt) {
    const std::size_t n = x.size();
    State k1(n), k2(n), k3(n), k4(n), tmp(n);
    f(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

TimeSeriesSet integrate_ode(const SimSpec& spec, std::optional<State> initial) {
    spec.validate();
    Derivative f;
    std::size_t dim = 3;
    switch (spec.system) {
        case System::Lorenz63: {
            const double p = spec.parameter("p"), r = spec.parameter("r"), b = spec.parameter("b");
            f = [=](std::span<const double> x, std::span<double> dx) { lorenz63_derivative(x, dx, p, r, b); };
            break;
        }
        case System::Rossler: {
            const double a = spec.parameter("a"), b = spec.parameter("b"), c = spec.parameter("c");
            f = [=](std::span<const double> x, std::span<double> dx) { rossler_derivative(x, dx, a, b, c); };
            break;
        }
        case System::Lorenz96: {
            const double forcing = spec.parameter("F");
            dim = spec.dimension;
            f = [=](std::span<const double> x, std::span<double> dx) { lorenz96_derivative(x, dx, forcing); };
            break;
        }
        default: fail(ErrorKind::InvalidArgument, to_string(spec.system) + " is not an ODE system");
    }

    State x;
    if (initial) {
        if (initial->size() != dim) fail(ErrorKind::LengthMismatch, "initial state has wrong dimension");
        x = *initial;
    } else {
        Random rng(derive_seed(spec.seed, kInitialState));
        x.resize(dim);
        for (double& v : x) v = rng.normal();
    }

    TimeSeriesSet out;
    out.values.assign(dim, {});
    for (auto& col : out.values) col.reserve(spec.length);
    out.names = numbered_names(dim);
    out.sample_period = spec.dt * static_cast<double>(spec.record_stride);
    const std::size_t total = spec.transient_discard + spec.length;
    for (std::size_t s = 0; s < total; ++s) {
        if (s >= spec.transient_discard)
            for (std::size_t i = 0; i < dim; ++i) out.values[i].push_back(x[i]);
        for (std::size_t k = 0; k < spec.record_stride; ++k) rk4_step(f, x, spec.dt);
        check_finite(x, s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kuramoto-Sivashinsky
// ---------------------------------------------------------------------------

namespace {

// FFTW's planner is not thread-safe; plan creation and destruction are serialized.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n), real_(n), spec_(n / 2 + 1) {
        std::lock_guard lock(fftw_planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.data(),
                                        reinterpret_cast<fftw_complex*>(spec_.data()), FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec_.data()),
                                         real_.data(), FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::vector<std::complex<double>> forward(std::span<const double> x) {
        std::copy(x.begin(), x.end(), real_.begin());
        fftw_execute(forward_);
        return spec_;
    }
    // Normalized inverse.
    std::vector<double> backward(std::span<const std::complex<double>> v) {
        std::copy(v.begin(), v.end(), spec_.begin());
        fftw_execute(backward_);
        std::vector<double> out(real_);
        for (double& x : out) x /= static_cast<double>(n_);
        return out;
    }

private:
    std::size_t n_;
    std::vector<double> real_;
    std::vector<std::complex<double>> spec_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

}  // namespace

TimeSeriesSet integrate_ks(const SimSpec& spec, std::optional<State> initial) {
    spec.validate();
    const double domain = spec.parameter("L");
    const auto n = static_cast<std::size_t>(spec.parameter("grid"));
    if (n < 8 || (n & (n - 1)) != 0) fail(ErrorKind::InvalidArgument, "KS grid count must be a power of two >= 8");
    const std::size_t modes = n / 2 + 1;
    const double h = spec.dt;

    State u(n, 0.0);
    if (initial) {
        if (initial->size() != n) fail(ErrorKind::LengthMismatch, "initial field has wrong grid size");
        u = *initial;
    } else {
        Random rng(derive_seed(spec.seed, kInitialState));
        for (double& v : u) v = 0.1 * rng.normal();
        double mean = 0.0;
        for (double v : u) mean += v;
        mean /= static_cast<double>(n);
        for (double& v : u) v -= mean;
    }

    using cplx = std::complex<double>;
    std::vector<double> k(modes), lin(modes);
    std::vector<double> dealias(modes);
    for (std::size_t m = 0; m < modes; ++m) {
        const double wave = 2.0 * std::numbers::pi / domain * static_cast<double>(m);
        k[m] = (m == n / 2) ? 0.0 : wave;
        lin[m] = wave * wave - wave * wave * wave * wave;
        dealias[m] = (3 * m < n) ? 1.0 : 0.0;
    }

    // ETDRK4 coefficients by contour averaging.
    constexpr int contour = 32;
    std::vector<double> e(modes), e2(modes), q(modes), f1(modes), f2(modes), f3(modes);
    for (std::size_t m = 0; m < modes; ++m) {
        e[m] = std::exp(h * lin[m]);
        e2[m] = std::exp(h * lin[m] / 2.0);
        cplx sq{0.0}, s1{0.0}, s2{0.0}, s3{0.0};
        for (int j = 1; j <= contour; ++j) {
            const cplx r = std::exp(cplx(0.0, std::numbers::pi * (j - 0.5) / contour));
            const cplx lr = h * lin[m] + r;
            const cplx ex = std::exp(lr);
            sq += (std::exp(lr / 2.0) - 1.0) / lr;
            s1 += (-4.0 - lr + ex * (4.0 - 3.0 * lr + lr * lr)) / (lr * lr * lr);
            s2 += (2.0 + lr + ex * (-2.0 + lr)) / (lr * lr * lr);
            s3 += (-4.0 - 3.0 * lr - lr * lr + ex * (4.0 - lr)) / (lr * lr * lr);
        }
        q[m] = h * (sq / static_cast<double>(contour)).real();
        f1[m] = h * (s1 / static_cast<double>(contour)).real();
        f2[m] = h * (s2 / static_cast<double>(contour)).real();
        f3[m] = h * (s3 / static_cast<double>(contour)).real();
    }

    RealFft fft(n);
    auto nonlinear = [&](const std::vector<cplx>& v) {
        auto field = fft.backward(v);
        for (double& x : field) x = x * x;
        auto sq = fft.forward(field);
        std::vector<cplx> out(modes);
        for (std::size_t m = 0; m < modes; ++m) out[m] = cplx(0.0, -0.5 * k[m]) * sq[m] * dealias[m];
        return out;
    };

    std::vector<cplx> v = fft.forward(u);
    const std::size_t keep = std::min(spec.dimension, n);
    TimeSeriesSet out;
    out.values.assign(keep, {});
    out.names = numbered_names(keep);
    out.sample_period = h * static_cast<double>(spec.record_stride);
    const std::size_t total = spec.transient_discard + spec.length;
    std::vector<cplx> a(modes), b(modes), c(modes);
    for (std::size_t s = 0; s < total; ++s) {
        if (s >= spec.transient_discard) {
            const auto field = fft.backward(v);
            check_finite(field, s);
            for (std::size_t i = 0; i < keep; ++i) out.values[i].push_back(field[i]);
        }
        for (std::size_t step = 0; step < spec.record_stride; ++step) {
            const auto nv = nonlinear(v);
            for (std::size_t m = 0; m < modes; ++m) a[m] = e2[m] * v[m] + q[m] * nv[m];
            const auto na = nonlinear(a);
            for (std::size_t m = 0; m < modes; ++m) b[m] = e2[m] * v[m] + q[m] * na[m];
            const auto nb = nonlinear(b);
            for (std::size_t m = 0; m < modes; ++m) c[m] = e2[m] * a[m] + q[m] * (2.0 * nb[m] - nv[m]);
            const auto nc = nonlinear(c);
            for (std::size_t m = 0; m < modes; ++m)
                v[m] = e[m] * v[m] + nv[m] * f1[m] + 2.0 * (na[m] + nb[m]) * f2[m] + nc[m] * f3[m];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stochastic components
// ---------------------------------------------------------------------------

std::vector<double> random_walk(std::size_t length, std::uint64_t seed) {
    Random rng(seed);
    std::vector<double> out(length, 0.0);
    for (std::size_t i = 1; i < length; ++i) out[i] = out[i - 1] + rng.normal();
    return out;
}

TimeSeriesSet add_observational_noise(TimeSeriesSet series, double scale, std::uint64_t seed, NoiseMode mode) {
    if (scale < 0.0) fail(ErrorKind::InvalidArgument, "noise scale must be >= 0");
    if (scale == 0.0) return series;
    Random rng(seed);
    for (std::size_t i = 0; i < series.variables(); ++i) {
        if (mode == NoiseMode::TargetOnly && i != series.target) continue;
        auto& col = series.values[i];
        if (col.empty()) continue;
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(col.size());
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(col.size()));
        if (sd == 0.0) continue;
        for (double& v : col) v += scale * sd * rng.normal();
    }
    return series;
}

TimeSeriesSet flood_surrogate(std::size_t length, std::uint64_t seed) {
    Random rng(derive_seed(seed, kFlood));
    constexpr std::size_t gauges = 5;
    constexpr std::size_t upstream = 3;
    std::vector<std::vector<double>> rain(gauges, std::vector<double>(length, 0.0));
    std::vector<std::vector<double>> stage(upstream, std::vector<double>(length, 0.0));
    std::vector<double> q(length, 0.0);

    const double recession[upstream] = {0.80, 0.85, 0.75};
    const std::size_t delay[upstream] = {1, 2, 1};
    const double gauge_bias[gauges] = {1.0, 0.8, 1.2, 0.9, 1.1};
    std::vector<double> storage(upstream, 0.5);
    double target_storage = 1.0;
    double storm = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
        // Storms start at random, decay geometrically and vary across gauges.
        if (rng.bernoulli(0.06)) storm += -std::log(1.0 - rng.uniform()) * 6.0;
        storm *= 0.55;
        for (std::size_t g = 0; g < gauges; ++g) {
            const double local = storm * gauge_bias[g] * std::exp(0.3 * rng.normal());
            rain[g][t] = local > 0.05 ? local : 0.0;
        }
        for (std::size_t u = 0; u < upstream; ++u) {
            double inflow = 0.0;
            if (t >= delay[u]) {
                const std::size_t s = t - delay[u];
                inflow = (rain[u][s] + rain[u + 1][s] + rain[u + 2][s]) / 3.0;
            }
            storage[u] = recession[u] * storage[u] + 0.1 * inflow + 0.02;
            stage[u][t] = 0.2 + 0.9 * std::pow(storage[u], 0.7) + 0.01 * rng.normal();
        }
        double routed = 0.0;
        for (std::size_t u = 0; u < upstream; ++u) routed += t >= 1 ? stage[u][t - 1] : stage[u][t];
        target_storage = 0.7 * target_storage + 0.12 * routed + 0.02 * rain[2][t];
        q[t] = 0.1 + 0.5 * std::pow(target_storage, 0.8) + 0.01 * rng.normal();
    }

    TimeSeriesSet out;
    out.values.push_back(std::move(q));
    out.names.push_back("Q");
    for (std::size_t u = 0; u < upstream; ++u) {
        out.values.push_back(std::move(stage[u]));
        out.names.push_back("US" + std::to_string(u + 1));
    }
    for (std::size_t g = 0; g < gauges; ++g) {
        out.values.push_back(std::move(rain[g]));
        out.names.push_back("RG" + std::to_string(g + 1));
    }
    out.sample_period = 6.0;
    return out;
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

TimeSeriesSet generate_dataset(const DatasetSpec& spec) {
    const std::size_t length = spec.train_length + spec.test_length > 0 ? spec.train_length + spec.test_length
                                                                        : spec.sim.length;
    SimSpec sim = spec.sim;
    sim.length = length;

    TimeSeriesSet out;
    switch (sim.system) {
        case System::Lorenz63:
        case System::Rossler:
        case System::Lorenz96: out = integrate_ode(sim); break;
        case System::KuramotoSivashinsky: out = integrate_ks(sim); break;
        case System::FloodSurrogate: out = flood_surrogate(length, sim.seed); break;
        case System::RandomWalk:
            out.values.push_back(random_walk(length, derive_seed(sim.seed, kRandomWalkBase)));
            out.names = {"x0"};
            out.sample_period = 1.0;
            break;
    }
    if (spec.observed > 0 && spec.observed < out.variables()) {
        out.values.resize(spec.observed);
        out.names.resize(spec.observed);
    }
    const std::size_t system_vars = out.variables();
    for (std::size_t w = 0; w < spec.random_walks; ++w) {
        out.values.push_back(random_walk(length, derive_seed(sim.seed, kRandomWalkBase + 1 + w)));
        out.names.push_back("x" + std::to_string(system_vars + w));
    }
    auto target = out.index_of(spec.target);
    if (!target) fail(ErrorKind::MissingColumn, "target '" + spec.target + "' not among generated variables");
    out.target = *target;
    out = add_observational_noise(std::move(out), spec.noise, derive_seed(sim.seed, kNoise), spec.noise_mode);

    const std::size_t train = spec.train_length > 0 ? std::min(spec.train_length, length) : length;
    for (std::size_t t = 0; t < train; ++t) out.train.push_back(t);
    for (std::size_t t = train; t < length; ++t) out.test.push_back(t);
    return out;
}

}  // namespace embedcast
