#pragma once
/**
 * @file common.hpp
 * @brief Shared basics: error type, aligned storage, constants, warnings.
 */

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

namespace kg2d {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Error thrown on invalid configuration or violated preconditions.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(what); }

inline void require(bool ok, const std::string& what) {
    if (!ok) fail(what);
}

/// Non-fatal diagnostics (degraded preconditions) go through this hook so
/// tests and the CLI can capture them.  Default sink writes to stderr.
void warn(const std::string& message);
using WarnSink = void (*)(const std::string&);
WarnSink set_warn_sink(WarnSink sink);  ///< returns the previous sink

/// 64-byte aligned allocator: keeps field storage friendly to both FFTW and
/// the AVX2 kernels.
template <class T>
struct AlignedAlloc {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) {}

    T* allocate(std::size_t n) {
        if (n == 0) return nullptr;
        void* p = std::aligned_alloc(alignment, ((n * sizeof(T) + alignment - 1) / alignment) * alignment);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { std::free(p); }

    template <class U>
    bool operator==(const AlignedAlloc<U>&) const { return true; }
};

template <class T>
using AlignedVec = std::vector<T, AlignedAlloc<T>>;

/// C² polynomial smoothstep: 0 at t<=0, 1 at t>=1, monotone, and
/// s(t) + s(1-t) = 1 (exact partition when used for overlapping bumps).
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace kg2d
