#include "netpatch/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace netpatch::kern {
namespace {

double s_dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_hadamard(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

double s_sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double s_max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double s_max_abs_diff(const double* x, const double* y, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i] - y[i]));
    return m;
}

void s_spmv(const std::int64_t* rowptr, const std::int32_t* col,
            const double* val, const double* x, double* y, std::int32_t nrows) {
    for (std::int32_t r = 0; r < nrows; ++r) {
        double acc = 0.0;
        for (std::int64_t p = rowptr[r]; p < rowptr[r + 1]; ++p)
            acc += val[p] * x[col[p]];
        y[r] = acc;
    }
}

void s_spmv_unit(const std::int64_t* rowptr, const std::int32_t* col,
                 const double* x, double* y, std::int32_t nrows) {
    for (std::int32_t r = 0; r < nrows; ++r) {
        double acc = 0.0;
        for (std::int64_t p = rowptr[r]; p < rowptr[r + 1]; ++p)
            acc += x[col[p]];
        y[r] = acc;
    }
}

const Ops kScalarOps = {
    s_dot, s_axpy, s_scale, s_hadamard, s_sum, s_max_abs, s_max_abs_diff,
    s_spmv, s_spmv_unit,
};

bool force_scalar_env() {
    const char* v = std::getenv("NETPATCH_FORCE_SCALAR");
    return v != nullptr && v[0] != '\0' && !(v[0] == '0' && v[1] == '\0');
}

Backend pick_default() {
#if defined(NETPATCH_HAVE_AVX2)
    if (avx2_supported() && !force_scalar_env()) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

Backend& current() {
    static Backend b = pick_default();
    return b;
}

} // namespace

bool avx2_supported() {
#if defined(NETPATCH_HAVE_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Ops& scalar_ops() { return kScalarOps; }

const Ops& ops() {
#if defined(NETPATCH_HAVE_AVX2)
    if (current() == Backend::Avx2) return avx2_ops();
#endif
    return kScalarOps;
}

Backend active_backend() { return current(); }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported())
        throw std::invalid_argument("AVX2 backend requested but not supported on this CPU");
    current() = b;
}

} // namespace netpatch::kern
