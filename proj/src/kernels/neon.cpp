#include <arm_neon.h>

#include <cmath>

#include "variants.hpp"

namespace fidbench::kernels::detail {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double sum_neon(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        acc += a[i];
    }
    return acc;
}

ErrorSums error_sums_neon(const double* predicted, const double* truth, std::size_t n) {
    float64x2_t abs_acc = vdupq_n_f64(0.0);
    float64x2_t sq_acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(truth + i), vld1q_f64(predicted + i));
        abs_acc = vaddq_f64(abs_acc, vabsq_f64(d));
        sq_acc = vaddq_f64(sq_acc, vmulq_f64(d, d));
    }
    ErrorSums out{vaddvq_f64(abs_acc), vaddvq_f64(sq_acc)};
    for (; i < n; ++i) {
        const double d = truth[i] - predicted[i];
        out.abs_sum += std::fabs(d);
        out.sq_sum += d * d;
    }
    return out;
}

void split_proxies_neon(const double* left_count, const double* left_sum, std::size_t m,
                        double total_count, double total_sum, double* out) {
    const float64x2_t tc = vdupq_n_f64(total_count);
    const float64x2_t ts = vdupq_n_f64(total_sum);
    std::size_t k = 0;
    for (; k + 2 <= m; k += 2) {
        const float64x2_t lc = vld1q_f64(left_count + k);
        const float64x2_t ls = vld1q_f64(left_sum + k);
        const float64x2_t rs = vsubq_f64(ts, ls);
        const float64x2_t rc = vsubq_f64(tc, lc);
        const float64x2_t left = vdivq_f64(vmulq_f64(ls, ls), lc);
        const float64x2_t right = vdivq_f64(vmulq_f64(rs, rs), rc);
        vst1q_f64(out + k, vaddq_f64(left, right));
    }
    for (; k < m; ++k) {
        const double right_sum = total_sum - left_sum[k];
        const double right_count = total_count - left_count[k];
        out[k] = left_sum[k] * left_sum[k] / left_count[k] + right_sum * right_sum / right_count;
    }
}

} // namespace

const KernelTable neon_table{Isa::neon, dot_neon, sum_neon, error_sums_neon, split_proxies_neon};

} // namespace fidbench::kernels::detail
