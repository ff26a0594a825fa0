#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embedcast {

using TimeIndex = std::size_t;

// n variables x T samples, stored column-per-variable.
struct TimeSeriesSet {
    std::vector<std::vector<double>> values;
    std::vector<std::string> names;
    std::size_t target = 0;
    double sample_period = 1.0;
    std::vector<TimeIndex> train;
    std::vector<TimeIndex> test;

    std::size_t variables() const { return values.size(); }
    std::size_t length() const { return values.empty() ? 0 : values.front().size(); }
    std::span<const double> column(std::size_t var) const { return values.at(var); }
    std::span<const double> target_column() const { return values.at(target); }
    std::optional<std::size_t> index_of(const std::string& name) const;

    // Throws InvalidArgument / SeriesTooShort when the invariants do not hold.
    void validate(std::size_t max_lag = 1, std::size_t max_horizon = 0) const;
};

// Membership and contiguous-run lookup over an ordered index set, used to
// decide whether a whole [first, last] window lies inside one block of
// training (or test) samples.
class IndexRuns {
public:
    IndexRuns() = default;
    IndexRuns(std::span<const TimeIndex> indices, std::size_t length);

    bool contains(TimeIndex t) const { return t < run_id_.size() && run_id_[t] != kNone; }
    // True when every index in [first, last] is a member of the same run.
    bool window_inside(std::ptrdiff_t first, std::ptrdiff_t last) const;

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> run_id_;
};

struct Coord {
    std::size_t variable;
    std::size_t lag;
    friend bool operator==(const Coord&, const Coord&) = default;
};

// Binary word over (variable, lag) slots, bit index = variable * lags + lag.
// The target's lag-0 bit is always set.
class EmbeddingCode {
public:
    EmbeddingCode() = default;
    // Code with only the target's lag-0 slot embedded.
    EmbeddingCode(std::size_t variables, std::size_t lags, std::size_t target);
    // Validates that the forced bit is present.
    EmbeddingCode(std::size_t variables, std::size_t lags, std::size_t target,
                  std::vector<std::uint8_t> bits);

    // Sets the forced bit instead of rejecting codes that lack it.
    static EmbeddingCode with_target_forced(std::size_t variables, std::size_t lags,
                                            std::size_t target, std::vector<std::uint8_t> bits);

    std::size_t variables() const { return variables_; }
    std::size_t lags() const { return lags_; }
    std::size_t target() const { return target_; }
    std::size_t size() const { return bits_.size(); }
    std::size_t forced_bit() const { return target_ * lags_; }
    bool bit(std::size_t i) const { return bits_.at(i) != 0; }
    bool embeds(std::size_t variable, std::size_t lag) const { return bit(variable * lags_ + lag); }
    bool uses_variable(std::size_t variable) const;
    std::span<const std::uint8_t> bits() const { return bits_; }

    std::size_t dimension() const;
    std::size_t max_lag() const;
    std::vector<Coord> coords() const;
    std::string to_string() const;

    friend bool operator==(const EmbeddingCode& a, const EmbeddingCode& b) {
        return a.variables_ == b.variables_ && a.lags_ == b.lags_ && a.bits_ == b.bits_;
    }

private:
    std::size_t variables_ = 0;
    std::size_t lags_ = 0;
    std::size_t target_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct EmbeddingCodeHash {
    std::size_t operator()(const EmbeddingCode& code) const noexcept;
};

struct DelayVector {
    std::vector<double> components;
    std::vector<Coord> coords;
};

using Columns = std::span<const std::vector<double>>;

// components[j] = y_{var_j}(t - lag_j), variable-major then lag-minor.
DelayVector build_delay_vector(Columns columns, const EmbeddingCode& code, TimeIndex t);
DelayVector build_delay_vector(const TimeSeriesSet& series, const EmbeddingCode& code, TimeIndex t);

std::size_t hamming(const EmbeddingCode& a, const EmbeddingCode& b);

// FIR taps h_i(k) per variable (all of equal length N, h_i(0) = 1) plus
// per-variable standardization applied after filtering.
struct FilterSpec {
    std::vector<std::vector<double>> taps;
    std::vector<double> mean;
    std::vector<double> scale;
    double rho = 0.0;

    std::size_t variables() const { return taps.size(); }
    // Support N: trailing zero taps do not count, so (1, 0) behaves like (1).
    std::size_t length() const;

    // h = (1, rho) on every variable, mean 0, scale 1 (not yet fitted).
    static FilterSpec two_tap(std::size_t variables, double rho);
    // h = (1), mean 0, scale 1.
    static FilterSpec identity(std::size_t variables);

    void validate() const;
};

// Sets mean/scale to the mean and population standard deviation of each
// filtered variable over valid training samples. A zero deviation is
// replaced by 1 so constant inputs remain usable.
FilterSpec fit_standardization(const TimeSeriesSet& series, FilterSpec filter);

struct FilteredSeries {
    std::vector<std::vector<double>> values;  // NaN before first_valid
    std::size_t first_valid = 0;
};

FilteredSeries apply_filter(const TimeSeriesSet& series, const FilterSpec& filter);
FilteredSeries apply_filter(Columns columns, const FilterSpec& filter);

// Inverts the filter on the target variable. zhat holds filtered forecasts
// for horizons 1..p, history holds the observed target values up to the
// origin t (most recent last; at least N-1 values are needed).
double restore_forecast(std::span<const double> zhat, const FilterSpec& filter,
                        std::size_t target, std::span<const double> history, std::size_t p);

// Restored forecasts for every horizon 1..zhat.size(), sharing the recursion.
std::vector<double> restore_path(std::span<const double> zhat, const FilterSpec& filter,
                                 std::size_t target, std::span<const double> history);

}  // namespace embedcast
