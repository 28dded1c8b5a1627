#include "kg2d/grid.hpp"

#include <cmath>
#include <iostream>
#include <mutex>

#include "kg2d/kernels.hpp"

namespace kg2d {

namespace {
std::mutex warn_mutex;
void default_warn(const std::string& msg) {
    std::scoped_lock lock(warn_mutex);
    std::cerr << "[kg2d] warning: " << msg << "\n";
}
WarnSink g_sink = &default_warn;
}  // namespace

void warn(const std::string& message) { g_sink(message); }

WarnSink set_warn_sink(WarnSink sink) {
    WarnSink old = g_sink;
    g_sink = sink ? sink : &default_warn;
    return old;
}

Grid2D Grid2D::make(int n, double box_length) {
    require(n >= 8 && n <= 4096, "grid size must be in [8, 4096]");
    require((n & (n - 1)) == 0, "grid size must be a power of two");
    require(std::isfinite(box_length) && box_length > 0.0,
            "box length must be positive and finite");
    return Grid2D{n, box_length};
}

ComplexField2D to_complex(const RealField2D& f) {
    ComplexField2D out(f.grid(), Space::physical);
    const double* src = f.data();
    cplx* dst = out.data();
    for (std::size_t i = 0; i < f.size(); ++i) dst[i] = cplx(src[i], 0.0);
    return out;
}

RealField2D real_part(const ComplexField2D& f) {
    require(f.space() == Space::physical, "real_part requires a physical-space field");
    RealField2D out(f.grid());
    const cplx* src = f.data();
    double* dst = out.data();
    for (std::size_t i = 0; i < f.size(); ++i) dst[i] = src[i].real();
    return out;
}

RealField2D imag_part(const ComplexField2D& f) {
    require(f.space() == Space::physical, "imag_part requires a physical-space field");
    RealField2D out(f.grid());
    const cplx* src = f.data();
    double* dst = out.data();
    for (std::size_t i = 0; i < f.size(); ++i) dst[i] = src[i].imag();
    return out;
}

namespace {
template <class Field, class Sq>
double boundary_fraction(const Field& f, Sq sq) {
    const Grid2D& g = f.grid();
    const double edge = 0.9 * 0.5 * g.box_length;
    double outer = 0.0, total = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double xi = std::abs(g.coord(i));
        for (int j = 0; j < g.n; ++j) {
            const double m = sq(f.at(i, j));
            total += m;
            if (xi > edge || std::abs(g.coord(j)) > edge) outer += m;
        }
    }
    return total > 0.0 ? outer / total : 0.0;
}
}  // namespace

double boundary_mass_fraction(const RealField2D& f) {
    return boundary_fraction(f, [](double v) { return v * v; });
}

double boundary_mass_fraction(const ComplexField2D& f) {
    require(f.space() == Space::physical,
            "boundary_mass_fraction requires a physical-space field");
    return boundary_fraction(f, [](const cplx& v) { return std::norm(v); });
}

}  // namespace kg2d
