#pragma once

#include <memory>
#include <numeric>
#include <vector>

#include "embedcast/core.hpp"

namespace testing_helpers {

using embedcast::TimeSeriesSet;

inline TimeSeriesSet make_series(std::vector<std::vector<double>> columns, std::size_t target = 0,
                                 std::size_t train = 0) {
    TimeSeriesSet s;
    s.values = std::move(columns);
    for (std::size_t v = 0; v < s.values.size(); ++v) s.names.push_back("x" + std::to_string(v));
    s.target = target;
    const std::size_t n = s.length();
    if (train == 0) train = n;
    for (std::size_t t = 0; t < n; ++t) (t < train ? s.train : s.test).push_back(t);
    return s;
}

inline std::shared_ptr<const TimeSeriesSet> shared(TimeSeriesSet s) {
    return std::make_shared<const TimeSeriesSet>(std::move(s));
}

inline embedcast::EmbeddingCode code(std::size_t n, std::size_t l, std::size_t target, std::vector<int> bits) {
    return embedcast::EmbeddingCode(n, l, target, std::vector<std::uint8_t>(bits.begin(), bits.end()));
}

}  // namespace testing_helpers
