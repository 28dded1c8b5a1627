/**
 * @file kernels_dispatch.cpp
 * @brief Runtime selection between the scalar and AVX2 kernel tables.
 */

#include "kg2d/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace kg2d::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* resolve() {
    const char* env = std::getenv("KG2D_SIMD");
    const bool want_scalar = env && std::strcmp(env, "scalar") == 0;
    const bool want_avx2 = env && std::strcmp(env, "avx2") == 0;

    if (want_scalar) return &scalar_ops();
    const Ops* simd = cpu_has_avx2() ? avx2_ops() : nullptr;
    if (want_avx2 && !simd) {
        warn("KG2D_SIMD=avx2 requested but unavailable; using scalar kernels");
        return &scalar_ops();
    }
    return simd ? simd : &scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops* selected = resolve();
    return *selected;
}

const char* active_name() { return ops().name; }

}  // namespace kg2d::kernels
