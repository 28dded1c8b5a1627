/**
 * @file kernels_scalar.cpp
 * @brief Reference implementations of the data-parallel inner loops.
 *
 * Plain loops, no intrinsics: this is the semantics the AVX2 variant is
 * tested against.  Reductions accumulate left-to-right.
 */

#include "kg2d/kernels.hpp"

#include <cmath>

namespace kg2d::kernels {
namespace {

void scale_real(double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void scale_cplx(cplx* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void cmul(cplx* a, const cplx* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
}

void cmul_real(cplx* a, const double* r, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= r[i];
}

void cube(double* out, const double* u, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = u[i] * u[i] * u[i];
}

void axpy(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_cplx(cplx* y, double a, const cplx* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void rotate_pair(cplx* u, cplx* v, const double* c, const double* s,
                 const double* r, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = u[i];
        const cplx b = v[i];
        u[i] = c[i] * a + s[i] * b;
        v[i] = -r[i] * a + c[i] * b;
    }
}

double sum_sq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double sum_sq_cplx(const cplx* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return acc;
}

double sum_quartic(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sq = x[i] * x[i];
        acc += sq * sq;
    }
    return acc;
}

double weighted_sum_sq(const cplx* x, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
    return acc;
}

double max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{
        "scalar",   scale_real, scale_cplx,  cmul,        cmul_real,
        cube,       axpy,       axpy_cplx,   rotate_pair, sum_sq,
        sum_sq_cplx, sum_quartic, weighted_sum_sq, max_abs,
    };
    return table;
}

}  // namespace kg2d::kernels
