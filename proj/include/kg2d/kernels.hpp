#pragma once
/**
 * @file kernels.hpp
 * @brief Data-parallel inner loops: scalar reference implementations plus an
 *        AVX2 variant selected at runtime.
 *
 * Every hot pointwise pass of the solvers (spectral rotations, cubic kicks,
 * multiplier application, norm reductions) goes through this table so the
 * scalar and SIMD paths can be equivalence-tested against each other.
 * Reductions use a fixed accumulation order within each implementation, so a
 * given machine + dispatch choice is bit-reproducible run to run.
 *
 * Dispatch: AVX2 when the CPU supports it, else scalar.  The environment
 * variable KG2D_SIMD=scalar|avx2|auto overrides (avx2 falls back to scalar
 * with a warning if unsupported).
 */

#include <cstddef>

#include "kg2d/common.hpp"

namespace kg2d::kernels {

struct Ops {
    const char* name;

    /// x[i] *= a
    void (*scale_real)(double* x, double a, std::size_t n);
    /// x[i] *= a
    void (*scale_cplx)(cplx* x, double a, std::size_t n);
    /// a[i] *= b[i] (complex times complex)
    void (*cmul)(cplx* a, const cplx* b, std::size_t n);
    /// a[i] *= r[i] (complex times real)
    void (*cmul_real)(cplx* a, const double* r, std::size_t n);
    /// out[i] = u[i]^3
    void (*cube)(double* out, const double* u, std::size_t n);
    /// y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    /// y[i] += a * x[i] (complex data, real coefficient)
    void (*axpy_cplx)(cplx* y, double a, const cplx* x, std::size_t n);
    /// Klein-Gordon spectral rotation:
    ///   (u, v) <- (c*u + s*v, -r*u + c*v)   per mode, real tables c,s,r.
    void (*rotate_pair)(cplx* u, cplx* v, const double* c, const double* s,
                        const double* r, std::size_t n);
    /// sum x[i]^2
    double (*sum_sq)(const double* x, std::size_t n);
    /// sum |x[i]|^2
    double (*sum_sq_cplx)(const cplx* x, std::size_t n);
    /// sum x[i]^4
    double (*sum_quartic)(const double* x, std::size_t n);
    /// sum w[i] * |x[i]|^2
    double (*weighted_sum_sq)(const cplx* x, const double* w, std::size_t n);
    /// max |x[i]|
    double (*max_abs)(const double* x, std::size_t n);
};

/// Scalar reference implementation (always available).
const Ops& scalar_ops();
/// AVX2 implementation; null if this build/CPU cannot run it.
const Ops* avx2_ops();
/// The runtime-selected table (resolved once, honoring KG2D_SIMD).
const Ops& ops();
/// Name of the selected implementation ("scalar" or "avx2").
const char* active_name();

}  // namespace kg2d::kernels
