// Scalar reference kernels against naive loops, and the AVX2 variant (when
// this machine has it) against the scalar reference.  Elementwise passes are
// compared at FMA-rounding tolerance; reductions at reassociation tolerance.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "kg2d/kernels.hpp"

using kg2d::cplx;
using namespace kg2d::kernels;

namespace {

// splitmix64: deterministic fill without pulling in <random> state quirks.
double u01(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> real_data(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    for (auto& x : v) x = 2.0 * u01(seed) - 1.0;
    return v;
}

std::vector<cplx> cplx_data(std::size_t n, std::uint64_t seed) {
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(2.0 * u01(seed) - 1.0, 2.0 * u01(seed) - 1.0);
    return v;
}

// Sizes that cover SIMD remainder handling: below one vector, odd tails,
// and a larger block.
const std::size_t sizes[] = {1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 64, 1000, 4099};

void check_close(const std::vector<double>& a, const std::vector<double>& b,
                 double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (tol == 0.0) {
            CHECK(a[i] == b[i]);
        } else {
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
        }
    }
}

void check_close(const std::vector<cplx>& a, const std::vector<cplx>& b,
                 double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i] - b[i]) <=
              tol * (1.0 + std::abs(a[i]) + std::abs(b[i])));
    }
}

}  // namespace

TEST_CASE("dispatch table is one of the two implementations") {
    const Ops& o = ops();
    CHECK((std::string(o.name) == "scalar" || std::string(o.name) == "avx2"));
    CHECK(std::string(active_name()) == o.name);
    CHECK(std::string(scalar_ops().name) == "scalar");
}

TEST_CASE("scalar elementwise kernels match naive loops") {
    const Ops& o = scalar_ops();
    for (std::size_t n : sizes) {
        auto x = real_data(n, 1);
        auto want = x;
        for (auto& v : want) v *= 1.75;
        auto got = x;
        o.scale_real(got.data(), 1.75, n);
        check_close(got, want, 0.0);

        auto a = cplx_data(n, 2);
        auto b = cplx_data(n, 3);
        auto wc = a;
        for (std::size_t i = 0; i < n; ++i) wc[i] *= b[i];
        auto gc = a;
        o.cmul(gc.data(), b.data(), n);
        check_close(gc, wc, 1e-15);

        auto r = real_data(n, 4);
        wc = a;
        for (std::size_t i = 0; i < n; ++i) wc[i] *= r[i];
        gc = a;
        o.cmul_real(gc.data(), r.data(), n);
        check_close(gc, wc, 0.0);

        auto u = real_data(n, 5);
        std::vector<double> wr(n), gr(n);
        for (std::size_t i = 0; i < n; ++i) wr[i] = u[i] * u[i] * u[i];
        o.cube(gr.data(), u.data(), n);
        check_close(gr, wr, 0.0);

        auto y = real_data(n, 6);
        wr = y;
        for (std::size_t i = 0; i < n; ++i) wr[i] += -0.3 * u[i];
        gr = y;
        o.axpy(gr.data(), -0.3, u.data(), n);
        check_close(gr, wr, 0.0);

        auto yc = cplx_data(n, 7);
        wc = yc;
        for (std::size_t i = 0; i < n; ++i) wc[i] += 0.7 * a[i];
        gc = yc;
        o.axpy_cplx(gc.data(), 0.7, a.data(), n);
        check_close(gc, wc, 0.0);
    }
}

TEST_CASE("scalar rotation kernel implements the stated recurrence") {
    const Ops& o = scalar_ops();
    for (std::size_t n : sizes) {
        auto u = cplx_data(n, 11);
        auto v = cplx_data(n, 12);
        auto c = real_data(n, 13);
        auto s = real_data(n, 14);
        auto r = real_data(n, 15);
        auto uw = u;
        auto vw = v;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx nu = c[i] * u[i] + s[i] * v[i];
            const cplx nv = -r[i] * u[i] + c[i] * v[i];
            uw[i] = nu;
            vw[i] = nv;
        }
        o.rotate_pair(u.data(), v.data(), c.data(), s.data(), r.data(), n);
        check_close(u, uw, 1e-15);
        check_close(v, vw, 1e-15);
    }
}

TEST_CASE("scalar reductions match naive sums") {
    const Ops& o = scalar_ops();
    for (std::size_t n : sizes) {
        auto x = real_data(n, 21);
        auto z = cplx_data(n, 22);
        auto w = real_data(n, 23);

        double s2 = 0.0, s4 = 0.0, mx = 0.0;
        for (double v : x) {
            s2 += v * v;
            s4 += v * v * v * v;
            mx = std::max(mx, std::abs(v));
        }
        double s2c = 0.0, ws = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s2c += std::norm(z[i]);
            ws += w[i] * std::norm(z[i]);
        }
        CHECK(o.sum_sq(x.data(), n) == doctest::Approx(s2).epsilon(1e-13));
        CHECK(o.sum_quartic(x.data(), n) == doctest::Approx(s4).epsilon(1e-13));
        CHECK(o.max_abs(x.data(), n) == mx);
        CHECK(o.sum_sq_cplx(z.data(), n) == doctest::Approx(s2c).epsilon(1e-13));
        CHECK(o.weighted_sum_sq(z.data(), w.data(), n) ==
              doctest::Approx(ws).epsilon(1e-13));
    }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    const Ops* av = avx2_ops();
    if (av == nullptr) {
        MESSAGE("avx2 unavailable on this machine; dispatch covered by scalar");
        return;
    }
    const Ops& sc = scalar_ops();
    for (std::size_t n : sizes) {
        auto x = real_data(n, 31);
        auto xs = x;
        auto xa = x;
        sc.scale_real(xs.data(), 0.37, n);
        av->scale_real(xa.data(), 0.37, n);
        check_close(xa, xs, 1e-14);

        auto z = cplx_data(n, 32);
        auto zs = z;
        auto za = z;
        sc.scale_cplx(zs.data(), -1.21, n);
        av->scale_cplx(za.data(), -1.21, n);
        check_close(za, zs, 1e-14);

        auto b = cplx_data(n, 33);
        zs = z;
        za = z;
        sc.cmul(zs.data(), b.data(), n);
        av->cmul(za.data(), b.data(), n);
        check_close(za, zs, 1e-13);

        auto r = real_data(n, 34);
        zs = z;
        za = z;
        sc.cmul_real(zs.data(), r.data(), n);
        av->cmul_real(za.data(), r.data(), n);
        check_close(za, zs, 1e-14);

        std::vector<double> cs(n), ca(n);
        sc.cube(cs.data(), x.data(), n);
        av->cube(ca.data(), x.data(), n);
        check_close(ca, cs, 1e-14);

        auto y = real_data(n, 35);
        auto ys = y;
        auto ya = y;
        sc.axpy(ys.data(), 1.6, x.data(), n);
        av->axpy(ya.data(), 1.6, x.data(), n);
        check_close(ya, ys, 1e-14);

        auto yc = cplx_data(n, 36);
        auto ycs = yc;
        auto yca = yc;
        sc.axpy_cplx(ycs.data(), -0.9, z.data(), n);
        av->axpy_cplx(yca.data(), -0.9, z.data(), n);
        check_close(yca, ycs, 1e-14);

        auto u = cplx_data(n, 37);
        auto v = cplx_data(n, 38);
        auto c = real_data(n, 39);
        auto s = real_data(n, 40);
        auto rr = real_data(n, 41);
        auto us = u;
        auto vs = v;
        auto ua = u;
        auto va = v;
        sc.rotate_pair(us.data(), vs.data(), c.data(), s.data(), rr.data(), n);
        av->rotate_pair(ua.data(), va.data(), c.data(), s.data(), rr.data(), n);
        check_close(ua, us, 1e-13);
        check_close(va, vs, 1e-13);

        CHECK(av->sum_sq(x.data(), n) ==
              doctest::Approx(sc.sum_sq(x.data(), n)).epsilon(1e-12));
        CHECK(av->sum_quartic(x.data(), n) ==
              doctest::Approx(sc.sum_quartic(x.data(), n)).epsilon(1e-12));
        CHECK(av->max_abs(x.data(), n) == sc.max_abs(x.data(), n));
        CHECK(av->sum_sq_cplx(z.data(), n) ==
              doctest::Approx(sc.sum_sq_cplx(z.data(), n)).epsilon(1e-12));
        CHECK(av->weighted_sum_sq(z.data(), r.data(), n) ==
              doctest::Approx(sc.weighted_sum_sq(z.data(), r.data(), n))
                  .epsilon(1e-12));
    }
}

TEST_CASE("reductions are bit-reproducible within one implementation") {
    const Ops& o = ops();
    auto x = real_data(4099, 51);
    auto z = cplx_data(4099, 52);
    auto w = real_data(4099, 53);
    CHECK(o.sum_sq(x.data(), x.size()) == o.sum_sq(x.data(), x.size()));
    CHECK(o.sum_quartic(x.data(), x.size()) == o.sum_quartic(x.data(), x.size()));
    CHECK(o.sum_sq_cplx(z.data(), z.size()) == o.sum_sq_cplx(z.data(), z.size()));
    CHECK(o.weighted_sum_sq(z.data(), w.data(), z.size()) ==
          o.weighted_sum_sq(z.data(), w.data(), z.size()));
}
