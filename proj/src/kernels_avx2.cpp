/**
 * @file kernels_avx2.cpp
 * @brief AVX2+FMA implementations of the data-parallel inner loops.
 *
 * This is the only translation unit compiled with -mavx2 -mfma; it must only
 * be entered through the dispatch table after a CPU check.  Complex arrays
 * are interleaved (re,im), so one __m256d holds two complex values.  Real
 * coefficient tables are expanded on load with setr(r0,r0,r1,r1).
 *
 * Reductions keep a fixed order: four-lane accumulators combined
 * lane0+lane1+lane2+lane3, then the scalar tail — deterministic for a given
 * build and dispatch choice.  Results may differ from the scalar path in the
 * last bits (FMA contraction); the equivalence tests budget 1e-13 relative.
 */

#include "kg2d/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <cmath>

namespace kg2d::kernels {
namespace {

inline __m256d dup2(const double* r) {
    // (r[0], r[0], r[1], r[1])
    return _mm256_setr_pd(r[0], r[0], r[1], r[1]);
}

void scale_real(double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    for (; i < n; ++i) x[i] *= a;
}

void scale_cplx(cplx* x, double a, std::size_t n) {
    scale_real(reinterpret_cast<double*>(x), a, 2 * n);
}

void cmul(cplx* a, const cplx* b, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        const __m256d b_re = _mm256_movedup_pd(vb);                  // (br0,br0,br1,br1)
        const __m256d b_im = _mm256_permute_pd(vb, 0xF);             // (bi0,bi0,bi1,bi1)
        const __m256d a_sw = _mm256_permute_pd(va, 0x5);             // (ai0,ar0,ai1,ar1)
        // (ar*br - ai*bi, ai*br + ar*bi)
        const __m256d prod = _mm256_fmaddsub_pd(va, b_re, _mm256_mul_pd(a_sw, b_im));
        _mm256_storeu_pd(pa + 2 * i, prod);
    }
    for (; i < n; ++i) a[i] *= b[i];
}

void cmul_real(cplx* a, const double* r, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        _mm256_storeu_pd(pa + 2 * i, _mm256_mul_pd(va, dup2(r + i)));
    }
    for (; i < n; ++i) a[i] *= r[i];
}

void cube(double* out, const double* u, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(u + i);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_mul_pd(v, v), v));
    }
    for (; i < n; ++i) out[i] = u[i] * u[i] * u[i];
}

void axpy(double* y, double a, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_cplx(cplx* y, double a, const cplx* x, std::size_t n) {
    axpy(reinterpret_cast<double*>(y), a, reinterpret_cast<const double*>(x), 2 * n);
}

void rotate_pair(cplx* u, cplx* v, const double* c, const double* s,
                 const double* r, std::size_t n) {
    auto* pu = reinterpret_cast<double*>(u);
    auto* pv = reinterpret_cast<double*>(v);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(pu + 2 * i);
        const __m256d b = _mm256_loadu_pd(pv + 2 * i);
        const __m256d vc = dup2(c + i);
        const __m256d vs = dup2(s + i);
        const __m256d vr = dup2(r + i);
        _mm256_storeu_pd(pu + 2 * i, _mm256_fmadd_pd(vc, a, _mm256_mul_pd(vs, b)));
        _mm256_storeu_pd(pv + 2 * i, _mm256_fmsub_pd(vc, b, _mm256_mul_pd(vr, a)));
    }
    for (; i < n; ++i) {
        const cplx a = u[i];
        const cplx b = v[i];
        u[i] = c[i] * a + s[i] * b;
        v[i] = -r[i] * a + c[i] * b;
    }
}

inline double hsum(__m256d v) {
    // Fixed order: lane0 + lane1 + lane2 + lane3.
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

double sum_sq(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i] * x[i];
    return total;
}

double sum_sq_cplx(const cplx* x, std::size_t n) {
    return sum_sq(reinterpret_cast<const double*>(x), 2 * n);
}

double sum_quartic(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d sq = _mm256_mul_pd(v, v);
        acc = _mm256_fmadd_pd(sq, sq, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double sq = x[i] * x[i];
        total += sq * sq;
    }
    return total;
}

double weighted_sum_sq(const cplx* x, const double* w, std::size_t n) {
    const auto* px = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(px + 2 * i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), dup2(w + i), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i)
        total += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
    return total;
}

double max_abs(const double* x, std::size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i)));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    double m = std::max(std::max(lane[0], lane[1]), std::max(lane[2], lane[3]));
    for (; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

}  // namespace

const Ops* avx2_ops() {
    static const Ops table{
        "avx2",     scale_real, scale_cplx,  cmul,        cmul_real,
        cube,       axpy,       axpy_cplx,   rotate_pair, sum_sq,
        sum_sq_cplx, sum_quartic, weighted_sum_sq, max_abs,
    };
    return &table;
}

}  // namespace kg2d::kernels

#else  // non-x86 build: no AVX2 variant.

namespace kg2d::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace kg2d::kernels

#endif
