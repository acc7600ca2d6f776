// Compiled with -mavx2 (no -mfma: products and sums must round like the
// scalar reference).
#include <immintrin.h>

#include <cmath>

#include "variants.hpp"

namespace fidbench::kernels::detail {

namespace {

double horizontal_sum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1,
                             _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    double acc = horizontal_sum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    }
    double acc = horizontal_sum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        acc += a[i];
    }
    return acc;
}

ErrorSums error_sums_avx2(const double* predicted, const double* truth, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d abs_acc = _mm256_setzero_pd();
    __m256d sq_acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(truth + i), _mm256_loadu_pd(predicted + i));
        abs_acc = _mm256_add_pd(abs_acc, _mm256_andnot_pd(sign_mask, d));
        sq_acc = _mm256_add_pd(sq_acc, _mm256_mul_pd(d, d));
    }
    ErrorSums out{horizontal_sum(abs_acc), horizontal_sum(sq_acc)};
    for (; i < n; ++i) {
        const double d = truth[i] - predicted[i];
        out.abs_sum += std::fabs(d);
        out.sq_sum += d * d;
    }
    return out;
}

void split_proxies_avx2(const double* left_count, const double* left_sum, std::size_t m,
                        double total_count, double total_sum, double* out) {
    const __m256d tc = _mm256_set1_pd(total_count);
    const __m256d ts = _mm256_set1_pd(total_sum);
    std::size_t k = 0;
    for (; k + 4 <= m; k += 4) {
        const __m256d lc = _mm256_loadu_pd(left_count + k);
        const __m256d ls = _mm256_loadu_pd(left_sum + k);
        const __m256d rs = _mm256_sub_pd(ts, ls);
        const __m256d rc = _mm256_sub_pd(tc, lc);
        const __m256d left = _mm256_div_pd(_mm256_mul_pd(ls, ls), lc);
        const __m256d right = _mm256_div_pd(_mm256_mul_pd(rs, rs), rc);
        _mm256_storeu_pd(out + k, _mm256_add_pd(left, right));
    }
    for (; k < m; ++k) {
        const double right_sum = total_sum - left_sum[k];
        const double right_count = total_count - left_count[k];
        out[k] = left_sum[k] * left_sum[k] / left_count[k] + right_sum * right_sum / right_count;
    }
}

} // namespace

const KernelTable avx2_table{Isa::avx2, dot_avx2, sum_avx2, error_sums_avx2, split_proxies_avx2};

} // namespace fidbench::kernels::detail
