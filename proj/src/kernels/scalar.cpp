#include "embedcast/kernels.hpp"

namespace embedcast::kernels {
namespace {

void accumulate_squared_diff_scalar(const double* row, double q, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = row[i] - q;
        acc[i] = acc[i] + d * d;
    }
}

void running_mean_step_scalar(double* mean, const double* x, double k, std::size_t n) {
    const double next = k + 1.0;
    for (std::size_t i = 0; i < n; ++i) mean[i] = (k * mean[i] + x[i]) / next;
}

// Lane layout mirrors a 4-wide vector register: lane j sums i = j (mod 4)
// over the main body, lanes are folded as (l0 + l2) + (l1 + l3), then the
// tail is added in order.
double sum_squared_diff_scalar(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double d = a[i + j] - b[i + j];
            lane[j] = lane[j] + d * d;
        }
    }
    double total = (lane[0] + lane[2]) + (lane[1] + lane[3]);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        total = total + d * d;
    }
    return total;
}

}  // namespace

const KernelSet& scalar() {
    static const KernelSet set{"scalar", accumulate_squared_diff_scalar, running_mean_step_scalar,
                               sum_squared_diff_scalar};
    return set;
}

}  // namespace embedcast::kernels
