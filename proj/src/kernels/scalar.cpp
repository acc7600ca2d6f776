#include <cmath>

#include "variants.hpp"

namespace fidbench::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i];
    }
    return acc;
}

ErrorSums error_sums_scalar(const double* predicted, const double* truth, std::size_t n) {
    ErrorSums out;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = truth[i] - predicted[i];
        out.abs_sum += std::fabs(d);
        out.sq_sum += d * d;
    }
    return out;
}

void split_proxies_scalar(const double* left_count, const double* left_sum, std::size_t m,
                          double total_count, double total_sum, double* out) {
    for (std::size_t k = 0; k < m; ++k) {
        const double right_sum = total_sum - left_sum[k];
        const double right_count = total_count - left_count[k];
        out[k] = left_sum[k] * left_sum[k] / left_count[k] + right_sum * right_sum / right_count;
    }
}

} // namespace

const KernelTable scalar_table{Isa::scalar, dot_scalar, sum_scalar, error_sums_scalar,
                               split_proxies_scalar};

} // namespace fidbench::kernels::detail
