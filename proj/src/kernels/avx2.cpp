#include "embedcast/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace embedcast::kernels {
namespace {

// This translation unit is built with -mavx2 and no FMA so every product and
// sum rounds exactly like the scalar reference.

void accumulate_squared_diff_avx2(const double* row, double q, double* acc, std::size_t n) {
    const __m256d vq = _mm256_set1_pd(q);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(row + i), vq);
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(d, d)));
    }
    for (; i < n; ++i) {
        const double d = row[i] - q;
        acc[i] = acc[i] + d * d;
    }
}

void running_mean_step_avx2(double* mean, const double* x, double k, std::size_t n) {
    const double next = k + 1.0;
    const __m256d vk = _mm256_set1_pd(k);
    const __m256d vnext = _mm256_set1_pd(next);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_mul_pd(vk, _mm256_loadu_pd(mean + i));
        _mm256_storeu_pd(mean + i, _mm256_div_pd(_mm256_add_pd(m, _mm256_loadu_pd(x + i)), vnext));
    }
    for (; i < n; ++i) mean[i] = (k * mean[i] + x[i]) / next;
}

double sum_squared_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    // (l0 + l2) + (l1 + l3)
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    double total = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        total = total + d * d;
    }
    return total;
}

}  // namespace

const KernelSet* avx2() {
    static const KernelSet set{"avx2", accumulate_squared_diff_avx2, running_mean_step_avx2,
                               sum_squared_diff_avx2};
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &set : nullptr;
}

}  // namespace embedcast::kernels

#else

namespace embedcast::kernels {
const KernelSet* avx2() { return nullptr; }
}  // namespace embedcast::kernels

#endif
