#pragma once
#include <cstddef>
#include <cstdint>

// Low-level numeric kernels used by the bound series, the CG solver, and the
// weight builders. A scalar reference backend always exists; an AVX2 backend
// is selected at startup when the CPU supports it. Results of the two
// backends agree to relative rounding tolerance, not bit-for-bit (the vector
// backend reassociates reductions and uses FMA).
namespace netpatch::kern {

struct Ops {
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += a*x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    void (*scale)(double a, double* x, std::size_t n);
    // out = x .* y
    void (*hadamard)(const double* x, const double* y, double* out, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
    double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
    // y = A x for CSR with explicit values
    void (*spmv)(const std::int64_t* rowptr, const std::int32_t* col,
                 const double* val, const double* x, double* y, std::int32_t nrows);
    // y = A x for an unweighted (all-ones) CSR pattern
    void (*spmv_unit)(const std::int64_t* rowptr, const std::int32_t* col,
                      const double* x, double* y, std::int32_t nrows);
};

enum class Backend { Scalar, Avx2 };

bool avx2_supported();

// Active backend. Defaults to Avx2 when supported unless the environment
// variable NETPATCH_FORCE_SCALAR is set to a nonempty value other than "0".
const Ops& ops();
Backend active_backend();

// Explicit override; throws std::invalid_argument if the backend is
// unavailable on this machine.
void set_backend(Backend b);

const Ops& scalar_ops();
#if defined(NETPATCH_HAVE_AVX2)
const Ops& avx2_ops();
#endif

} // namespace netpatch::kern
