// Multiplier symbols and the operators built on them: cutoff profiles and
// their partition identities, dyadic reconstruction, tube partitions,
// translations, and the free propagator groups.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "kg2d/common.hpp"
#include "kg2d/grid.hpp"
#include "kg2d/symbols.hpp"
#include "kg2d/transform.hpp"

using namespace kg2d;

namespace {

double u01(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

ComplexField2D random_field(const Grid2D& g, std::uint64_t seed) {
    ComplexField2D f(g, Space::physical);
    for (std::size_t k = 0; k < f.size(); ++k)
        f.raw()[k] = cplx(2.0 * u01(seed) - 1.0, 2.0 * u01(seed) - 1.0);
    return f;
}

ComplexField2D gaussian(const Grid2D& g, double width) {
    ComplexField2D f(g, Space::physical);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double x = g.coord(i), y = g.coord(j);
            f.at(i, j) = std::exp(-(x * x + y * y) / (2.0 * width * width));
        }
    return f;
}

double rel_l2_gap(const ComplexField2D& a, const ComplexField2D& b) {
    REQUIRE(a.size() == b.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += std::norm(a.raw()[k] - b.raw()[k]);
        den += std::norm(b.raw()[k]);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("radial cutoff: plateau, support, smooth octave partition") {
    CHECK(radial_cutoff(0.0) == 1.0);
    CHECK(radial_cutoff(0.7) == 1.0);
    CHECK(radial_cutoff(1.0) == 1.0);
    CHECK(radial_cutoff(2.0) == 0.0);
    CHECK(radial_cutoff(5.0) == 0.0);
    CHECK(radial_cutoff(-0.5) == 1.0);  // even in r

    // Exact complementary-pair identity across the transition octave.
    for (int k = 1; k < 64; ++k) {
        const double t = k / 64.0;
        CHECK(radial_cutoff(1.0 + t) + radial_cutoff(2.0 - t) ==
              doctest::Approx(1.0).epsilon(1e-15));
    }
    // Monotone nonincreasing through the transition.
    double prev = 1.0;
    for (int k = 0; k <= 200; ++k) {
        const double v = radial_cutoff(0.9 + 1.2 * k / 200.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
    // Infinitely flat contact at both ends: values just inside the octave
    // are still within 1e-30 of the plateau values.
    CHECK(1.0 - radial_cutoff(1.0 + 1e-3) < 1e-30);
    CHECK(radial_cutoff(2.0 - 1e-3) < 1e-30);
}

TEST_CASE("angular bump: plateau, support, exact integer-shift partition") {
    CHECK(angular_bump(0.0) == 1.0);
    CHECK(angular_bump(0.4) == 1.0);
    CHECK(angular_bump(-0.4) == 1.0);
    CHECK(angular_bump(0.6) == 0.0);
    CHECK(angular_bump(0.75) == 0.0);
    for (int k = 0; k <= 100; ++k) {
        const double u = -1.3 + 2.6 * k / 100.0;
        double sum = 0.0;
        for (int m = -3; m <= 3; ++m) sum += angular_bump(u - m);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("bessel powers compose to the identity") {
    const Grid2D g = Grid2D::make(32, 6.0);
    const ComplexField2D f = random_field(g, 1);
    const ComplexField2D b =
        apply_multiplier(bessel_power(-1.3), apply_multiplier(bessel_power(1.3), f));
    CHECK(rel_l2_gap(b, f) < 1e-13);
}

TEST_CASE("multiplier symbol introspection") {
    const Grid2D g = Grid2D::make(16, 4.0);
    const MultiplierSymbol bp = bessel_power(1.0);
    // <xi> peaks at the Nyquist corner of the lattice.
    const double nyq = g.nyquist();
    const double corner = std::sqrt(1.0 + 2.0 * nyq * nyq);
    CHECK(bp.lattice_bound(g) == doctest::Approx(corner).epsilon(1e-12));
    CHECK(bp.hermitian_on(g));

    const MultiplierSymbol skew("skew", [](double x1, double) {
        return cplx(x1 > 0.0 ? 1.0 : 0.0, 0.0);
    });
    CHECK_FALSE(skew.hermitian_on(g));

    RealField2D r(g);
    r.at(3, 4) = 1.0;
    CHECK_THROWS_AS(apply_multiplier(skew, r), Error);
    CHECK_NOTHROW(apply_multiplier(bp, r));
}

TEST_CASE("lowpass symbol keeps low modes, kills modes beyond twice the cutoff") {
    const Grid2D g = Grid2D::make(64, 2.0 * pi);  // dk = 1: integer lattice
    ComplexField2D f(g, Space::spectral);
    f.at(1, 0) = cplx(1.0, 0.0);    // |xi| = 1
    f.at(0, 5) = cplx(1.0, 0.0);    // |xi| = 5
    f.at(9, 0) = cplx(1.0, 0.0);    // |xi| = 9 >= 2 * cutoff
    const ComplexField2D out = apply_multiplier(lowpass_symbol(4.0), f);
    CHECK(std::abs(out.at(1, 0) - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(out.at(0, 5)) < 1.0);
    CHECK(std::abs(out.at(0, 5)) > 0.0);
    CHECK(std::abs(out.at(9, 0)) == 0.0);
}

TEST_CASE("dyadic bands tile frequency space over the resolved levels") {
    const Grid2D g = Grid2D::make(64, 16.0);
    const std::vector<double> levels = resolved_dyadic_levels(g);
    REQUIRE(levels.size() >= 2);
    CHECK(levels.front() == 1.0);
    for (std::size_t i = 1; i < levels.size(); ++i)
        CHECK(levels[i] == 2.0 * levels[i - 1]);
    // The last level covers the spectral corner; the one before does not.
    const double corner = std::sqrt(2.0) * g.nyquist();
    CHECK(levels.back() >= corner);
    CHECK(levels[levels.size() - 2] < corner);

    // Summing the band projections over the levels reconstructs any field.
    const ComplexField2D f = random_field(g, 2);
    ComplexField2D sum(g, Space::physical);
    for (double N : levels) {
        const ComplexField2D piece = littlewood_paley(N, f);
        for (std::size_t k = 0; k < sum.size(); ++k)
            sum.raw()[k] += piece.raw()[k];
    }
    CHECK(rel_l2_gap(sum, f) < 1e-12);
}

TEST_CASE("a dyadic band only passes frequencies within its octaves") {
    const Grid2D g = Grid2D::make(64, 2.0 * pi);  // integer lattice
    ComplexField2D f(g, Space::spectral);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) f.at(i, j) = cplx(1.0, 0.0);
    const double N = 8.0;
    ComplexField2D band = littlewood_paley(N, f);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double k1 = g.freq(i), k2 = g.freq(j);
            const double r = std::hypot(k1, k2);
            if (r < 0.5 * N - 1e-12 || r > 2.0 * N + 1e-12)
                CHECK(std::abs(band.at(i, j)) == 0.0);
        }
    // Dead center of the band the symbol is exactly 1.
    CHECK(std::abs(band.at(8, 0) - cplx(1.0, 0.0)) < 1e-15);

    CHECK_THROWS_AS(littlewood_paley(3.0, f), Error);   // not a power of two
    CHECK_THROWS_AS(littlewood_paley(0.5, f), Error);
}

TEST_CASE("tube sectors partition their dyadic band") {
    CHECK(tube_count(1.0) == 1);
    CHECK(tube_count(2.0) == 40);
    CHECK(tube_count(4.0) == 80);

    const Grid2D g = Grid2D::make(64, 16.0);
    const ComplexField2D f = random_field(g, 3);
    const double N = 4.0;
    const ComplexField2D band = littlewood_paley(N, f);
    ComplexField2D sum(g, Space::physical);
    for (int k = 0; k < tube_count(N); ++k) {
        const ComplexField2D piece = tube_projection(TubeIndex{N, k}, f);
        for (std::size_t m = 0; m < sum.size(); ++m)
            sum.raw()[m] += piece.raw()[m];
    }
    CHECK(rel_l2_gap(sum, band) < 1e-12);

    // Sector centers: radius 3N/4 at equally spaced angles.
    const TubeIndex t0{N, 0};
    CHECK(t0.center()[0] == doctest::Approx(0.75 * N));
    CHECK(t0.center()[1] == doctest::Approx(0.0));
    const TubeIndex t1{1.0, 0};
    CHECK(t1.center()[0] == 0.0);
    CHECK(t1.center()[1] == 0.0);
}

TEST_CASE("translation is an exact circular shift by whole cells") {
    const Grid2D g = Grid2D::make(32, 8.0);
    const ComplexField2D f = random_field(g, 4);
    const ComplexField2D s = translate({g.h(), 0.0}, f);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            CHECK(std::abs(s.at(i, j) - f.at((i - 1 + g.n) % g.n, j)) < 1e-12);
    // Round trip.
    const ComplexField2D back = translate({-0.37, 0.81}, translate({0.37, -0.81}, f));
    CHECK(rel_l2_gap(back, f) < 1e-13);
}

TEST_CASE("free propagators form unitary groups") {
    const Grid2D g = Grid2D::make(32, 6.0);
    const ComplexField2D f = gaussian(g, 0.8);
    const double norm0 = lp_norm(f, 2);

    const ComplexField2D kg_two = free_propagate_kg(0.7, free_propagate_kg(0.5, f));
    const ComplexField2D kg_one = free_propagate_kg(1.2, f);
    CHECK(rel_l2_gap(kg_two, kg_one) < 1e-13);
    CHECK(lp_norm(kg_one, 2) == doctest::Approx(norm0).epsilon(1e-13));
    CHECK(rel_l2_gap(free_propagate_kg(0.0, f), f) < 1e-15);

    const ComplexField2D s_two =
        free_propagate_schrodinger(-0.4, free_propagate_schrodinger(1.1, f));
    const ComplexField2D s_one = free_propagate_schrodinger(0.7, f);
    CHECK(rel_l2_gap(s_two, s_one) < 1e-13);
    CHECK(lp_norm(s_one, 2) == doctest::Approx(norm0).epsilon(1e-13));
}

TEST_CASE("free Schrodinger flow is exact on a single mode") {
    const Grid2D g = Grid2D::make(32, 2.0 * pi);
    ComplexField2D f(g, Space::spectral);
    f.at(3, 2) = cplx(1.0, 0.0);
    const double xi2 = g.freq(3) * g.freq(3) + g.freq(2) * g.freq(2);
    const double t = 0.9;
    ComplexField2D out = free_propagate_schrodinger(t, f);
    REQUIRE(out.space() == Space::spectral);
    CHECK(std::abs(out.at(3, 2) - std::polar(1.0, -0.5 * xi2 * t)) < 1e-14);
}

TEST_CASE("free half-Klein-Gordon flow is exact on a single mode") {
    const Grid2D g = Grid2D::make(32, 2.0 * pi);
    ComplexField2D f(g, Space::spectral);
    f.at(0, 4) = cplx(0.0, 1.0);
    const double w = std::sqrt(1.0 + g.freq(4) * g.freq(4));
    const double t = 1.3;
    ComplexField2D out = free_propagate_kg(t, f);
    CHECK(std::abs(out.at(0, 4) - cplx(0.0, 1.0) * std::polar(1.0, -w * t)) < 1e-14);
}

TEST_CASE("littlewood-paley pieces of a smooth field stay spatially localized") {
    // The C-infinity cutoff makes the band kernel decay rapidly: a unit
    // gaussian's band pieces keep essentially no mass near the box frame.
    const Grid2D g = Grid2D::make(128, 32.0);
    RealField2D f(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double x = g.coord(i), y = g.coord(j);
            f.at(i, j) = std::exp(-(x * x + y * y) / 2.0);
        }
    for (double N : {1.0, 2.0, 4.0}) {
        const RealField2D piece = littlewood_paley(N, f);
        CHECK(boundary_mass_fraction(piece) < 1e-8);
    }
}
