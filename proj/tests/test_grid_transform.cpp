// Grid conventions and the FFT layer: lattice bookkeeping, round trips,
// an O(n^4) direct-DFT oracle, Parseval, and the norm routines.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "kg2d/common.hpp"
#include "kg2d/grid.hpp"
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
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            f.at(i, j) = cplx(2.0 * u01(seed) - 1.0, 2.0 * u01(seed) - 1.0);
    return f;
}

}  // namespace

TEST_CASE("grid construction validates its arguments") {
    CHECK_THROWS_AS(Grid2D::make(0, 1.0), Error);
    CHECK_THROWS_AS(Grid2D::make(48, 1.0), Error);   // not a power of two
    CHECK_THROWS_AS(Grid2D::make(4, 1.0), Error);    // below the range
    CHECK_THROWS_AS(Grid2D::make(8192, 1.0), Error); // above the range
    CHECK_THROWS_AS(Grid2D::make(64, 0.0), Error);
    CHECK_THROWS_AS(Grid2D::make(64, -2.0), Error);
    CHECK_NOTHROW(Grid2D::make(8, 1.0));
    CHECK_NOTHROW(Grid2D::make(4096, 1.0));
}

TEST_CASE("lattice coordinates and frequencies follow the conventions") {
    const Grid2D g = Grid2D::make(16, 8.0);
    CHECK(g.h() == doctest::Approx(0.5));
    CHECK(g.dk() == doctest::Approx(2.0 * pi / 8.0));
    CHECK(g.nyquist() == doctest::Approx(pi * 16 / 8.0));
    CHECK(g.coord(0) == doctest::Approx(-4.0));
    CHECK(g.coord(8) == doctest::Approx(0.0));
    CHECK(g.coord(15) == doctest::Approx(4.0 - 0.5));
    CHECK(g.signed_index(0) == 0);
    CHECK(g.signed_index(7) == 7);
    CHECK(g.signed_index(8) == -8);
    CHECK(g.signed_index(15) == -1);
    CHECK(g.freq(1) == doctest::Approx(g.dk()));
    CHECK(g.freq(15) == doctest::Approx(-g.dk()));
    CHECK(g.size() == 256);
}

TEST_CASE("forward and inverse transforms are mutually inverse") {
    const Grid2D g = Grid2D::make(64, 5.0);
    const ComplexField2D f = random_field(g, 1);
    ComplexField2D t = f;
    forward_transform(t);
    CHECK(t.space() == Space::spectral);
    inverse_transform(t);
    CHECK(t.space() == Space::physical);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            worst = std::max(worst, std::abs(t.at(i, j) - f.at(i, j)));
    CHECK(worst < 1e-13);
}

TEST_CASE("transforms reject fields already in the target representation") {
    const Grid2D g = Grid2D::make(16, 1.0);
    ComplexField2D f(g, Space::spectral);
    CHECK_THROWS_AS(forward_transform(f), Error);
    ComplexField2D p(g, Space::physical);
    CHECK_THROWS_AS(inverse_transform(p), Error);
}

TEST_CASE("a pure lattice mode transforms to a unit spike at its index") {
    const Grid2D g = Grid2D::make(32, 4.0);
    const int mi = 3, mj = 29;  // signed s = (3, -3)
    ComplexField2D f(g, Space::physical);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            f.at(i, j) = std::polar(1.0, g.freq(mi) * g.coord(i) +
                                             g.freq(mj) * g.coord(j));
    forward_transform(f);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const cplx want = (i == mi && j == mj) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
            CHECK(std::abs(f.at(i, j) - want) < 1e-13);
        }
}

TEST_CASE("the zero mode is the mean of the samples") {
    const Grid2D g = Grid2D::make(16, 2.0);
    ComplexField2D f = random_field(g, 2);
    cplx mean(0.0, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) mean += f.raw()[k];
    mean /= static_cast<double>(f.size());
    forward_transform(f);
    CHECK(std::abs(f.at(0, 0) - mean) < 1e-14);
}

TEST_CASE("forward transform matches the direct DFT on a small grid") {
    const Grid2D g = Grid2D::make(16, 3.0);
    const ComplexField2D f = random_field(g, 3);
    ComplexField2D t = f;
    forward_transform(t);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (int a = 0; a < g.n; ++a) {
        for (int b = 0; b < g.n; ++b) {
            cplx acc(0.0, 0.0);
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    acc += f.at(i, j) *
                           std::polar(1.0, -(g.freq(a) * g.coord(i) +
                                             g.freq(b) * g.coord(j)));
            CHECK(std::abs(t.at(a, b) - inv * acc) < 1e-12);
        }
    }
}

TEST_CASE("Parseval ties the physical and spectral L2 norms together") {
    const Grid2D g = Grid2D::make(64, 7.0);
    const ComplexField2D f = random_field(g, 4);
    const double phys = lp_norm(f, 2);
    ComplexField2D t = f;
    forward_transform(t);
    CHECK(lp_norm(t, 2) == doctest::Approx(phys).epsilon(1e-13));
    CHECK(sobolev_norm(f, 0.0) == doctest::Approx(phys).epsilon(1e-13));
}

TEST_CASE("norm routines agree with direct quadrature") {
    const Grid2D g = Grid2D::make(32, 5.0);
    const ComplexField2D f = random_field(g, 5);
    const double cell = g.h() * g.h();
    double s2 = 0.0, s4 = 0.0, sup = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double m = std::abs(f.raw()[k]);
        s2 += m * m;
        s4 += m * m * m * m;
        sup = std::max(sup, m);
    }
    CHECK(lp_norm(f, 2) == doctest::Approx(std::sqrt(cell * s2)).epsilon(1e-13));
    CHECK(lp_norm(f, 4) ==
          doctest::Approx(std::pow(cell * s4, 0.25)).epsilon(1e-13));
    CHECK(lp_norm(f, 0) == doctest::Approx(sup).epsilon(1e-15));
    CHECK_THROWS_AS(lp_norm(f, 3), Error);

    RealField2D r(g);
    for (std::size_t k = 0; k < r.size(); ++k) r.raw()[k] = f.raw()[k].real();
    double r2 = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) r2 += r.raw()[k] * r.raw()[k];
    CHECK(lp_norm(r, 2) == doctest::Approx(std::sqrt(cell * r2)).epsilon(1e-13));
}

TEST_CASE("Sobolev norm of a single mode carries the exact Bessel weight") {
    const Grid2D g = Grid2D::make(32, 4.0);
    ComplexField2D f(g, Space::physical);
    const int mi = 5, mj = 2;
    const double amp = 0.8;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            f.at(i, j) = amp * std::polar(1.0, g.freq(mi) * g.coord(i) +
                                                   g.freq(mj) * g.coord(j));
    const double xi2 = g.freq(mi) * g.freq(mi) + g.freq(mj) * g.freq(mj);
    for (double s : {-2.0, -0.5, 0.5, 1.0, 2.0}) {
        const double want = g.box_length * amp * std::pow(1.0 + xi2, 0.5 * s);
        CHECK(sobolev_norm(f, s) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK_THROWS_AS(sobolev_norm(f, 4.5), Error);
}

TEST_CASE("spectral tail fraction separates resolved from marginal fields") {
    const Grid2D g = Grid2D::make(64, 8.0);
    ComplexField2D low(g, Space::spectral);
    low.at(1, 2) = cplx(1.0, 0.0);
    CHECK(spectral_tail_fraction(low) == 0.0);

    ComplexField2D high(g, Space::spectral);
    high.at(g.n / 2, g.n / 2) = cplx(1.0, 0.0);  // Nyquist corner
    CHECK(spectral_tail_fraction(high) == doctest::Approx(1.0));
}

TEST_CASE("real/complex promotions and parts round trip") {
    const Grid2D g = Grid2D::make(16, 2.0);
    const ComplexField2D f = random_field(g, 6);
    const RealField2D re = real_part(f);
    const RealField2D im = imag_part(f);
    const ComplexField2D back = to_complex(re);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            CHECK(re.at(i, j) == f.at(i, j).real());
            CHECK(im.at(i, j) == f.at(i, j).imag());
            CHECK(back.at(i, j) == cplx(re.at(i, j), 0.0));
        }
    ComplexField2D spec = f;
    forward_transform(spec);
    CHECK_THROWS_AS(real_part(spec), Error);
}

TEST_CASE("spectrum of a real field is Hermitian-symmetric") {
    const Grid2D g = Grid2D::make(32, 3.0);
    RealField2D r(g);
    std::uint64_t s = 7;
    for (std::size_t k = 0; k < r.size(); ++k) r.raw()[k] = 2.0 * u01(s) - 1.0;
    const ComplexField2D f = spectrum_of(r);
    REQUIRE(f.space() == Space::spectral);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const int ni = (g.n - i) % g.n;
            const int nj = (g.n - j) % g.n;
            CHECK(std::abs(f.at(i, j) - std::conj(f.at(ni, nj))) < 1e-13);
        }
}

TEST_CASE("boundary mass fraction measures the outer ten percent frame") {
    const Grid2D g = Grid2D::make(64, 10.0);  // frame: max|x| > 4.5
    RealField2D center(g);
    center.at(g.n / 2, g.n / 2) = 3.0;
    CHECK(boundary_mass_fraction(center) == 0.0);

    RealField2D edge(g);
    edge.at(0, g.n / 2) = 2.0;  // x1 = -5
    CHECK(boundary_mass_fraction(edge) == doctest::Approx(1.0));

    RealField2D both(g);
    both.at(g.n / 2, g.n / 2) = 1.0;
    both.at(0, 0) = 1.0;
    CHECK(boundary_mass_fraction(both) == doctest::Approx(0.5));

    ComplexField2D spec(g, Space::spectral);
    CHECK_THROWS_AS(boundary_mass_fraction(spec), Error);
}

TEST_CASE("transform round trips are deterministic") {
    const Grid2D g = Grid2D::make(128, 6.0);
    const ComplexField2D f = random_field(g, 8);
    ComplexField2D a = f;
    ComplexField2D b = f;
    forward_transform(a);
    forward_transform(b);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.raw()[k].real() == b.raw()[k].real());
        CHECK(a.raw()[k].imag() == b.raw()[k].imag());
    }
}
