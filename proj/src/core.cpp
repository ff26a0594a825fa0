#include "embedcast/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "embedcast/error.hpp"

namespace embedcast {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::OutOfHistory: return "OutOfHistory";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::InsufficientHistory: return "InsufficientHistory";
        case ErrorKind::EmptyLibrary: return "EmptyLibrary";
        case ErrorKind::MissingFuture: return "MissingFuture";
        case ErrorKind::NoValidSamples: return "NoValidSamples";
        case ErrorKind::EmptyGrid: return "EmptyGrid";
        case ErrorKind::InsufficientVariables: return "InsufficientVariables";
        case ErrorKind::NonFiniteState: return "NonFiniteState";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------
// TimeSeriesSet
// ---------------------------------------------------------------------------

std::optional<std::size_t> TimeSeriesSet::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

void TimeSeriesSet::validate(std::size_t max_lag, std::size_t max_horizon) const {
    if (values.empty()) fail(ErrorKind::InvalidArgument, "series has no variables");
    if (names.size() != values.size())
        fail(ErrorKind::InvalidArgument, "variable names do not match variable count");
    if (target >= values.size()) fail(ErrorKind::InvalidArgument, "target index out of range");
    const std::size_t T = length();
    for (const auto& col : values) {
        if (col.size() != T) fail(ErrorKind::LengthMismatch, "variables have different lengths");
        for (double v : col)
            if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "series contains non-finite values");
    }
    if (T < max_lag + max_horizon + 1)
        fail(ErrorKind::SeriesTooShort, "need at least " + std::to_string(max_lag + max_horizon + 1) +
                                            " samples, got " + std::to_string(T));
    auto check_set = [T](const std::vector<TimeIndex>& idx, const char* what) {
        if (!std::is_sorted(idx.begin(), idx.end()) ||
            std::adjacent_find(idx.begin(), idx.end()) != idx.end())
            fail(ErrorKind::InvalidArgument, std::string(what) + " indices must be strictly increasing");
        if (!idx.empty() && idx.back() >= T)
            fail(ErrorKind::InvalidArgument, std::string(what) + " index beyond series length");
    };
    check_set(train, "train");
    check_set(test, "test");
    std::vector<TimeIndex> both;
    std::set_intersection(train.begin(), train.end(), test.begin(), test.end(), std::back_inserter(both));
    if (!both.empty()) fail(ErrorKind::InvalidArgument, "train and test indices overlap");
}

IndexRuns::IndexRuns(std::span<const TimeIndex> indices, std::size_t length) : run_id_(length, kNone) {
    std::size_t run = 0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= length) continue;
        if (i > 0 && indices[i] != indices[i - 1] + 1) ++run;
        run_id_[indices[i]] = run;
    }
}

bool IndexRuns::window_inside(std::ptrdiff_t first, std::ptrdiff_t last) const {
    if (first < 0 || last < first) return false;
    const auto a = static_cast<std::size_t>(first);
    const auto b = static_cast<std::size_t>(last);
    if (b >= run_id_.size()) return false;
    return run_id_[a] != kNone && run_id_[a] == run_id_[b];
}

// ---------------------------------------------------------------------------
// EmbeddingCode
// ---------------------------------------------------------------------------

EmbeddingCode::EmbeddingCode(std::size_t variables, std::size_t lags, std::size_t target)
    : variables_(variables), lags_(lags), target_(target), bits_(variables * lags, 0) {
    if (variables == 0 || lags == 0) fail(ErrorKind::InvalidArgument, "code needs n >= 1 and l >= 1");
    if (target >= variables) fail(ErrorKind::InvalidArgument, "target variable out of range");
    bits_[forced_bit()] = 1;
}

EmbeddingCode::EmbeddingCode(std::size_t variables, std::size_t lags, std::size_t target,
                             std::vector<std::uint8_t> bits)
    : variables_(variables), lags_(lags), target_(target), bits_(std::move(bits)) {
    if (variables == 0 || lags == 0) fail(ErrorKind::InvalidArgument, "code needs n >= 1 and l >= 1");
    if (target >= variables) fail(ErrorKind::InvalidArgument, "target variable out of range");
    if (bits_.size() != variables * lags)
        fail(ErrorKind::LengthMismatch, "code has " + std::to_string(bits_.size()) + " bits, expected " +
                                            std::to_string(variables * lags));
    for (auto& b : bits_) b = b ? 1 : 0;
    if (!bits_[forced_bit()]) fail(ErrorKind::InvalidArgument, "target lag-0 bit must be set");
}

EmbeddingCode EmbeddingCode::with_target_forced(std::size_t variables, std::size_t lags,
                                                std::size_t target, std::vector<std::uint8_t> bits) {
    if (target < variables && target * lags < bits.size()) bits[target * lags] = 1;
    return EmbeddingCode(variables, lags, target, std::move(bits));
}

bool EmbeddingCode::uses_variable(std::size_t variable) const {
    for (std::size_t lag = 0; lag < lags_; ++lag)
        if (bits_[variable * lags_ + lag]) return true;
    return false;
}

std::size_t EmbeddingCode::dimension() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::size_t EmbeddingCode::max_lag() const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) m = std::max(m, i % lags_);
    return m;
}

std::vector<Coord> EmbeddingCode::coords() const {
    std::vector<Coord> out;
    out.reserve(dimension());
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) out.push_back({i / lags_, i % lags_});
    return out;
}

std::string EmbeddingCode::to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) s[i] = '1';
    return s;
}

std::size_t EmbeddingCodeHash::operator()(const EmbeddingCode& code) const noexcept {
    // FNV-1a over the bit bytes.
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint8_t b : code.bits()) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    h ^= code.lags();
    h *= 1099511628211ULL;
    return static_cast<std::size_t>(h);
}

DelayVector build_delay_vector(Columns columns, const EmbeddingCode& code, TimeIndex t) {
    if (columns.size() != code.variables())
        fail(ErrorKind::LengthMismatch, "code variable count does not match series");
    const std::size_t lag = code.max_lag();
    if (t < lag)
        fail(ErrorKind::OutOfHistory,
             "time " + std::to_string(t) + " precedes max lag " + std::to_string(lag));
    DelayVector v;
    v.coords = code.coords();
    v.components.reserve(v.coords.size());
    for (const auto& c : v.coords) {
        const auto& col = columns[c.variable];
        if (t >= col.size()) fail(ErrorKind::OutOfHistory, "time beyond series length");
        v.components.push_back(col[t - c.lag]);
    }
    return v;
}

DelayVector build_delay_vector(const TimeSeriesSet& series, const EmbeddingCode& code, TimeIndex t) {
    return build_delay_vector(Columns(series.values), code, t);
}

std::size_t hamming(const EmbeddingCode& a, const EmbeddingCode& b) {
    if (a.size() != b.size())
        fail(ErrorKind::LengthMismatch, "codes of length " + std::to_string(a.size()) + " and " +
                                            std::to_string(b.size()));
    auto ab = a.bits();
    auto bb = b.bits();
    std::size_t d = 0;
    for (std::size_t i = 0; i < ab.size(); ++i) d += (ab[i] != bb[i]);
    return d;
}

// ---------------------------------------------------------------------------
// Filters
// ---------------------------------------------------------------------------

FilterSpec FilterSpec::two_tap(std::size_t variables, double rho) {
    FilterSpec f;
    f.taps.assign(variables, std::vector<double>{1.0, rho});
    f.mean.assign(variables, 0.0);
    f.scale.assign(variables, 1.0);
    f.rho = rho;
    return f;
}

FilterSpec FilterSpec::identity(std::size_t variables) {
    FilterSpec f;
    f.taps.assign(variables, std::vector<double>{1.0});
    f.mean.assign(variables, 0.0);
    f.scale.assign(variables, 1.0);
    f.rho = 0.0;
    return f;
}

void FilterSpec::validate() const {
    if (taps.empty()) fail(ErrorKind::InvalidArgument, "filter has no variables");
    if (mean.size() != taps.size() || scale.size() != taps.size())
        fail(ErrorKind::LengthMismatch, "filter standardization size mismatch");
    for (std::size_t i = 0; i < taps.size(); ++i) {
        if (taps[i].size() != taps.front().size() || taps[i].empty())
            fail(ErrorKind::InvalidArgument, "filter taps must share one nonzero length");
        if (taps[i][0] != 1.0) fail(ErrorKind::InvalidArgument, "filter tap h(0) must equal 1");
        if (!(scale[i] > 0.0)) fail(ErrorKind::InvalidArgument, "filter scale must be positive");
    }
}

std::size_t FilterSpec::length() const {
    std::size_t n = 1;
    for (const auto& h : taps)
        for (std::size_t k = h.size(); k > n; --k)
            if (h[k - 1] != 0.0) {
                n = k;
                break;
            }
    return n;
}

namespace {

// Raw FIR output sum_k h(k) y(t-k) over the first n taps for t >= n-1
// (earlier entries NaN).
std::vector<double> fir(std::span<const double> y, std::span<const double> h, std::size_t n) {
    std::vector<double> out(y.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = n - 1; t < y.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += h[k] * y[t - k];
        out[t] = acc;
    }
    return out;
}

}  // namespace

FilterSpec fit_standardization(const TimeSeriesSet& series, FilterSpec filter) {
    if (filter.variables() != series.variables())
        fail(ErrorKind::LengthMismatch, "filter variable count does not match series");
    const std::size_t n = filter.length();
    if (series.length() < n) fail(ErrorKind::SeriesTooShort, "series shorter than filter");
    IndexRuns runs(series.train, series.length());
    std::vector<TimeIndex> valid;
    for (TimeIndex t : series.train)
        if (runs.window_inside(static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(n - 1),
                               static_cast<std::ptrdiff_t>(t)))
            valid.push_back(t);
    if (valid.empty()) fail(ErrorKind::SeriesTooShort, "no valid filtered training samples");

    filter.mean.assign(series.variables(), 0.0);
    filter.scale.assign(series.variables(), 1.0);
    for (std::size_t i = 0; i < series.variables(); ++i) {
        const auto raw = fir(series.column(i), filter.taps[i], n);
        double sum = 0.0;
        for (TimeIndex t : valid) sum += raw[t];
        const double mu = sum / static_cast<double>(valid.size());
        double ss = 0.0;
        for (TimeIndex t : valid) ss += (raw[t] - mu) * (raw[t] - mu);
        const double sd = std::sqrt(ss / static_cast<double>(valid.size()));
        filter.mean[i] = mu;
        filter.scale[i] = sd > 0.0 ? sd : 1.0;
    }
    return filter;
}

FilteredSeries apply_filter(Columns columns, const FilterSpec& filter) {
    filter.validate();
    if (filter.variables() != columns.size())
        fail(ErrorKind::LengthMismatch, "filter variable count does not match series");
    const std::size_t n = filter.length();
    FilteredSeries out;
    out.first_valid = n - 1;
    out.values.reserve(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].size() < n) fail(ErrorKind::SeriesTooShort, "series shorter than filter");
        auto z = fir(columns[i], filter.taps[i], n);
        for (std::size_t t = out.first_valid; t < z.size(); ++t)
            z[t] = (z[t] - filter.mean[i]) / filter.scale[i];
        out.values.push_back(std::move(z));
    }
    return out;
}

FilteredSeries apply_filter(const TimeSeriesSet& series, const FilterSpec& filter) {
    return apply_filter(Columns(series.values), filter);
}

std::vector<double> restore_path(std::span<const double> zhat, const FilterSpec& filter,
                                 std::size_t target, std::span<const double> history) {
    if (target >= filter.variables()) fail(ErrorKind::InvalidArgument, "target out of filter range");
    const auto& h = filter.taps[target];
    const std::size_t n = filter.length();
    if (history.size() + 1 < n)
        fail(ErrorKind::InsufficientHistory, "need " + std::to_string(n - 1) + " past values, got " +
                                                 std::to_string(history.size()));
    const double mu = filter.mean[target];
    const double sd = filter.scale[target];
    std::vector<double> out(zhat.size());
    // value(s) for s = t + q - k: observed history when s <= t, restored forecast otherwise.
    for (std::size_t q = 1; q <= zhat.size(); ++q) {
        double memory = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            const double past = k < q ? out[q - k - 1] : history[history.size() - 1 - (k - q)];
            memory += h[k] * past;
        }
        out[q - 1] = sd * zhat[q - 1] + mu - memory;
    }
    return out;
}

double restore_forecast(std::span<const double> zhat, const FilterSpec& filter, std::size_t target,
                        std::span<const double> history, std::size_t p) {
    if (p == 0 || zhat.size() < p)
        fail(ErrorKind::InvalidArgument, "need filtered forecasts for horizons 1.." + std::to_string(p));
    return restore_path(zhat.first(p), filter, target, history).back();
}

}  // namespace embedcast
