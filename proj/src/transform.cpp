#include "kg2d/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "kg2d/kernels.hpp"

namespace kg2d {
namespace {

/// FFTW plans for one grid size.  Plans are created once (FFTW_ESTIMATE: the
/// planner is deterministic and does not overwrite arrays) and reused through
/// the new-array execute interface; all field buffers share 64-byte alignment.
struct PlanSet {
    fftw_plan c2c_fwd = nullptr;
    fftw_plan c2c_bwd = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

std::mutex plan_mutex;

PlanSet& plans_for(int n) {
    static std::map<int, PlanSet> cache;
    std::scoped_lock lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    PlanSet p;
    AlignedVec<cplx> cbuf(static_cast<std::size_t>(n) * n);
    AlignedVec<double> rbuf(static_cast<std::size_t>(n) * n);
    AlignedVec<cplx> hbuf(static_cast<std::size_t>(n) * (n / 2 + 1));
    auto* c = reinterpret_cast<fftw_complex*>(cbuf.data());
    auto* hc = reinterpret_cast<fftw_complex*>(hbuf.data());
    p.c2c_fwd = fftw_plan_dft_2d(n, n, c, c, FFTW_FORWARD, FFTW_ESTIMATE);
    p.c2c_bwd = fftw_plan_dft_2d(n, n, c, c, FFTW_BACKWARD, FFTW_ESTIMATE);
    p.r2c = fftw_plan_dft_r2c_2d(n, n, rbuf.data(), hc, FFTW_ESTIMATE);
    p.c2r = fftw_plan_dft_c2r_2d(n, n, hc, rbuf.data(), FFTW_ESTIMATE);
    require(p.c2c_fwd && p.c2c_bwd && p.r2c && p.c2r, "FFTW planning failed");
    return cache.emplace(n, p).first->second;
}

/// Multiply entry (i,j) by s * (-1)^(i+j).  With x_j = -L/2 + j h the
/// checkerboard sign converts between index-space DFT phases and physical
/// coordinates (n is even, so signed and raw indices have equal parity).
void checkerboard_scale(cplx* a, int n, double s) {
    for (int i = 0; i < n; ++i) {
        double f = (i % 2 == 0) ? s : -s;
        cplx* row = a + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            row[j] *= f;
            f = -f;
        }
    }
}

}  // namespace

namespace detail {

void raw_c2c(int n, cplx* data, int sign) {
    PlanSet& p = plans_for(n);
    auto* c = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(sign == -1 ? p.c2c_fwd : p.c2c_bwd, c, c);
}

void raw_r2c(int n, const double* in, cplx* out) {
    PlanSet& p = plans_for(n);
    fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void raw_c2r(int n, cplx* in, double* out) {
    PlanSet& p = plans_for(n);
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace detail

void forward_transform(ComplexField2D& f) {
    require(f.space() == Space::physical, "forward_transform: field is already spectral");
    const int n = f.grid().n;
    detail::raw_c2c(n, f.data(), -1);
    checkerboard_scale(f.data(), n, 1.0 / f.size());
    f.set_space(Space::spectral);
}

void inverse_transform(ComplexField2D& f) {
    require(f.space() == Space::spectral, "inverse_transform: field is already physical");
    const int n = f.grid().n;
    checkerboard_scale(f.data(), n, 1.0);
    detail::raw_c2c(n, f.data(), +1);
    f.set_space(Space::physical);
}

ComplexField2D forward_copy(const ComplexField2D& f) {
    ComplexField2D g = f;
    forward_transform(g);
    return g;
}

ComplexField2D inverse_copy(const ComplexField2D& f) {
    ComplexField2D g = f;
    inverse_transform(g);
    return g;
}

ComplexField2D spectrum_of(const RealField2D& f) {
    ComplexField2D g = to_complex(f);
    forward_transform(g);
    return g;
}

double lp_norm(const RealField2D& f, int p) {
    const auto& k = kernels::ops();
    const double cell = f.grid().h() * f.grid().h();
    switch (p) {
        case 0:
            return k.max_abs(f.data(), f.size());
        case 2:
            return std::sqrt(cell * k.sum_sq(f.data(), f.size()));
        case 4:
            return std::pow(cell * k.sum_quartic(f.data(), f.size()), 0.25);
        default:
            fail("lp_norm: p must be 2, 4, or 0 (= sup norm)");
    }
}

double lp_norm(const ComplexField2D& f, int p) {
    const auto& k = kernels::ops();
    const double L = f.grid().box_length;
    if (f.space() == Space::spectral) {
        require(p == 2, "lp_norm on spectral fields supports p = 2 only");
        return L * std::sqrt(k.sum_sq_cplx(f.data(), f.size()));
    }
    const double cell = f.grid().h() * f.grid().h();
    switch (p) {
        case 2:
            return std::sqrt(cell * k.sum_sq_cplx(f.data(), f.size()));
        case 4: {
            double acc = 0.0;
            const cplx* a = f.data();
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double m2 = std::norm(a[i]);
                acc += m2 * m2;
            }
            return std::pow(cell * acc, 0.25);
        }
        case 0: {
            double m = 0.0;
            const cplx* a = f.data();
            for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(a[i]));
            return m;
        }
        default:
            fail("lp_norm: p must be 2, 4, or 0 (= sup norm)");
    }
}

namespace {
double sobolev_of_spectrum(const ComplexField2D& fhat, double s) {
    const Grid2D& g = fhat.grid();
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double k1 = g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            const double k2 = g.freq(j);
            const double w2 = 1.0 + k1 * k1 + k2 * k2;
            acc += std::pow(w2, s) * std::norm(fhat.at(i, j));
        }
    }
    return g.box_length * std::sqrt(acc);
}
}  // namespace

double sobolev_norm(const ComplexField2D& f, double s) {
    require(s >= -2.0 && s <= 4.0, "sobolev_norm: s must lie in [-2, 4]");
    if (f.space() == Space::spectral) return sobolev_of_spectrum(f, s);
    return sobolev_of_spectrum(forward_copy(f), s);
}

double sobolev_norm(const RealField2D& f, double s) {
    require(s >= -2.0 && s <= 4.0, "sobolev_norm: s must lie in [-2, 4]");
    return sobolev_of_spectrum(spectrum_of(f), s);
}

double spectral_tail_fraction(const ComplexField2D& f) {
    const ComplexField2D* hat = &f;
    ComplexField2D tmp;
    if (f.space() == Space::physical) {
        tmp = forward_copy(f);
        hat = &tmp;
    }
    const Grid2D& g = hat->grid();
    const double cut = 0.75 * g.nyquist();
    double tail = 0.0, total = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double k1 = std::abs(g.freq(i));
        for (int j = 0; j < g.n; ++j) {
            const double m = std::norm(hat->at(i, j));
            total += m;
            if (k1 > cut || std::abs(g.freq(j)) > cut) tail += m;
        }
    }
    return total > 0.0 ? tail / total : 0.0;
}

double spectral_tail_fraction(const RealField2D& f) {
    return spectral_tail_fraction(spectrum_of(f));
}

}  // namespace kg2d
