#include "embedcast/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace embedcast::kernels {
namespace {

// Two 2-lane registers stand in for one 4-lane register so the reduction
// order matches the scalar reference. Built with -ffp-contract=off.

void accumulate_squared_diff_neon(const double* row, double q, double* acc, std::size_t n) {
    const float64x2_t vq = vdupq_n_f64(q);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(row + i), vq);
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vmulq_f64(d, d)));
    }
    for (; i < n; ++i) {
        const double d = row[i] - q;
        acc[i] = acc[i] + d * d;
    }
}

void running_mean_step_neon(double* mean, const double* x, double k, std::size_t n) {
    const double next = k + 1.0;
    const float64x2_t vk = vdupq_n_f64(k);
    const float64x2_t vnext = vdupq_n_f64(next);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t m = vmulq_f64(vk, vld1q_f64(mean + i));
        vst1q_f64(mean + i, vdivq_f64(vaddq_f64(m, vld1q_f64(x + i)), vnext));
    }
    for (; i < n; ++i) mean[i] = (k * mean[i] + x[i]) / next;
}

double sum_squared_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0);  // lanes 0, 1
    float64x2_t hi = vdupq_n_f64(0.0);  // lanes 2, 3
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        lo = vaddq_f64(lo, vmulq_f64(d0, d0));
        hi = vaddq_f64(hi, vmulq_f64(d1, d1));
    }
    const float64x2_t pair = vaddq_f64(lo, hi);  // (l0 + l2, l1 + l3)
    double total = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        total = total + d * d;
    }
    return total;
}

}  // namespace

const KernelSet* neon() {
    static const KernelSet set{"neon", accumulate_squared_diff_neon, running_mean_step_neon,
                               sum_squared_diff_neon};
    return &set;
}

}  // namespace embedcast::kernels

#else

namespace embedcast::kernels {
const KernelSet* neon() { return nullptr; }
}  // namespace embedcast::kernels

#endif
