#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embedcast/core.hpp"

namespace embedcast {

enum class System { Lorenz63, Rossler, Lorenz96, KuramotoSivashinsky, RandomWalk, FloodSurrogate };

std::optional<System> parse_system(const std::string& name);
std::string to_string(System system);

struct SimSpec {
    System system = System::Lorenz63;
    std::map<std::string, double> parameters;  // F; p, r, b; a, b, c; L, grid
    double dt = 0.001;
    std::size_t record_stride = 100;
    std::size_t length = 1000;
    std::size_t transient_discard = 100;  // recorded samples dropped before output
    std::uint64_t seed = 1;
    std::size_t dimension = 3;            // Lorenz'96 state size; KS grid values returned

    double parameter(const std::string& name) const;
    void validate() const;
};

// Per-system defaults for integration step, stride, parameters and size.
SimSpec default_sim(System system);

using State = std::vector<double>;
using Derivative = std::function<void(std::span<const double>, std::span<double>)>;

void lorenz63_derivative(std::span<const double> x, std::span<double> dx, double p, double r, double b);
void rossler_derivative(std::span<const double> x, std::span<double> dx, double a, double b, double c);
void lorenz96_derivative(std::span<const double> x, std::span<double> dx, double forcing);

// Classical fourth-order Runge-Kutta step.
void rk4_step(const Derivative& f, State& x, double dt);

// Lorenz'63, Rossler or Lorenz'96 from a standard-normal initial state,
// transients discarded, every record_stride-th state kept. An explicit
// initial state overrides the random draw.
TimeSeriesSet integrate_ode(const SimSpec& spec, std::optional<State> initial = std::nullopt);

// Kuramoto-Sivashinsky y_t = -y_xx - y_xxxx - y y_x on a periodic domain,
// ETDRK4 in Fourier space with 2/3 dealiasing. Records every
// record_stride internal steps and returns the first `dimension` grid values.
TimeSeriesSet integrate_ks(const SimSpec& spec, std::optional<State> initial = std::nullopt);

// Cumulative sum of standard-normal increments starting at 0.
std::vector<double> random_walk(std::size_t length, std::uint64_t seed);

enum class NoiseMode { PerVariable, TargetOnly };

// Adds N(0, (scale * std_i)^2) noise to each variable (or to the target
// only), std_i taken over the whole series.
TimeSeriesSet add_observational_noise(TimeSeriesSet series, double scale, std::uint64_t seed,
                                      NoiseMode mode = NoiseMode::PerVariable);

// Nine-column river-stage mimic (Q, US1-US3, RG1-RG5) at 6 h sampling:
// rain events drive linear reservoirs upstream which feed the target stage.
TimeSeriesSet flood_surrogate(std::size_t length, std::uint64_t seed);

struct DatasetSpec {
    SimSpec sim;
    std::size_t observed = 0;      // leading system variables kept (0 keeps all)
    std::size_t random_walks = 0;  // appended after the system variables
    double noise = 0.0;
    NoiseMode noise_mode = NoiseMode::PerVariable;
    std::size_t train_length = 0;
    std::size_t test_length = 0;
    std::string target = "x0";
};

// System variables, random walks and noise combined; train is the first
// train_length samples and test the following test_length.
TimeSeriesSet generate_dataset(const DatasetSpec& spec);

}  // namespace embedcast
