#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops. Every variant performs the same floating-point
// operations in the same order (no fused multiply-add, reductions split over
// four fixed lanes), so results are bit-identical across variants.
namespace embedcast::kernels {

struct KernelSet {
    std::string_view name;
    // acc[i] += (row[i] - q)^2
    void (*accumulate_squared_diff)(const double* row, double q, double* acc, std::size_t n);
    // mean[i] = (k * mean[i] + x[i]) / (k + 1)
    void (*running_mean_step)(double* mean, const double* x, double k, std::size_t n);
    // sum_i (a[i] - b[i])^2, accumulated in four interleaved lanes
    double (*sum_squared_diff)(const double* a, const double* b, std::size_t n);
};

const KernelSet& scalar();
// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelSet* avx2();
const KernelSet* neon();

// All variants usable on this machine, scalar first.
std::vector<const KernelSet*> available();

// Chosen once per process: the widest supported variant, unless the
// EMBEDCAST_KERNELS environment variable names another available one.
const KernelSet& active();

inline void accumulate_squared_diff(std::span<const double> row, double q, std::span<double> acc) {
    active().accumulate_squared_diff(row.data(), q, acc.data(), row.size());
}

inline void running_mean_step(std::span<double> mean, std::span<const double> x, double k) {
    active().running_mean_step(mean.data(), x.data(), k, mean.size());
}

inline double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    return active().sum_squared_diff(a.data(), b.data(), a.size());
}

}  // namespace embedcast::kernels
