#include "netpatch/kernels.hpp"

#include <immintrin.h>
#include <cmath>

// AVX2/FMA backend. This translation unit is the only one compiled with
// -mavx2 -mfma; it must never be entered unless avx2_supported() is true.
namespace netpatch::kern {
namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

const __m256d kAbsMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

double v_dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void v_scale(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void v_hadamard(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

double v_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum256(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double v_max_abs(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_and_pd(kAbsMask, _mm256_loadu_pd(x + i)));
    double m = hmax256(acc);
    for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double v_max_abs_diff(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_max_pd(acc, _mm256_and_pd(kAbsMask, d));
    }
    double m = hmax256(acc);
    for (; i < n; ++i) m = std::max(m, std::fabs(x[i] - y[i]));
    return m;
}

void v_spmv(const std::int64_t* rowptr, const std::int32_t* col,
            const double* val, const double* x, double* y, std::int32_t nrows) {
    for (std::int32_t r = 0; r < nrows; ++r) {
        const std::int64_t b = rowptr[r], e = rowptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int64_t p = b;
        for (; p + 4 <= e; p += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + p));
            __m256d xv = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(val + p), xv, acc);
        }
        double s = hsum256(acc);
        for (; p < e; ++p) s += val[p] * x[col[p]];
        y[r] = s;
    }
}

void v_spmv_unit(const std::int64_t* rowptr, const std::int32_t* col,
                 const double* x, double* y, std::int32_t nrows) {
    for (std::int32_t r = 0; r < nrows; ++r) {
        const std::int64_t b = rowptr[r], e = rowptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int64_t p = b;
        for (; p + 4 <= e; p += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + p));
            acc = _mm256_add_pd(acc, _mm256_i32gather_pd(x, idx, 8));
        }
        double s = hsum256(acc);
        for (; p < e; ++p) s += x[col[p]];
        y[r] = s;
    }
}

const Ops kAvx2Ops = {
    v_dot, v_axpy, v_scale, v_hadamard, v_sum, v_max_abs, v_max_abs_diff,
    v_spmv, v_spmv_unit,
};

} // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

} // namespace netpatch::kern
