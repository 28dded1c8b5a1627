#include "kg2d/symbols.hpp"

#include <cmath>
#include <utility>

#include "kg2d/transform.hpp"

namespace kg2d {

MultiplierSymbol::MultiplierSymbol(std::string tag, Rule rule)
    : tag_(std::move(tag)), rule_(std::move(rule)) {
    require(static_cast<bool>(rule_), "MultiplierSymbol '" + tag_ + "': empty rule");
}

double MultiplierSymbol::lattice_bound(const Grid2D& g) const {
    double best = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double xi1 = g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            best = std::max(best, std::abs(rule_(xi1, g.freq(j))));
        }
    }
    return best;
}

bool MultiplierSymbol::hermitian_on(const Grid2D& g) const {
    // The Nyquist row/column has no negative partner on the lattice
    // (signed index n/2 maps to -n/2 only), so skip index n/2.
    for (int i = 0; i < g.n; ++i) {
        if (i == g.n / 2) continue;
        const double xi1 = g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            if (j == g.n / 2) continue;
            const double xi2 = g.freq(j);
            const cplx a = rule_(xi1, xi2);
            const cplx b = rule_(-xi1, -xi2);
            if (std::abs(a - std::conj(b)) > 1e-12 * (1.0 + std::abs(a))) return false;
        }
    }
    return true;
}

ComplexField2D apply_multiplier(const MultiplierSymbol& m, const ComplexField2D& f) {
    ComplexField2D g = f;
    const bool was_physical = (g.space() == Space::physical);
    if (was_physical) forward_transform(g);
    const Grid2D& gr = g.grid();
    for (int i = 0; i < gr.n; ++i) {
        const double xi1 = gr.freq(i);
        for (int j = 0; j < gr.n; ++j) {
            g.at(i, j) *= m(xi1, gr.freq(j));
        }
    }
    if (was_physical) inverse_transform(g);
    return g;
}

RealField2D apply_multiplier(const MultiplierSymbol& m, const RealField2D& f) {
    ComplexField2D g = apply_multiplier(m, to_complex(f));
    // When the symbol annihilates most of f the surviving output is FFT
    // roundoff of the *input* magnitude, so anchor the tolerance to that.
    double input_mass = 0.0;
    for (double v : f.raw()) input_mass += v * v;
    double real_mass = 0.0, imag_mass = 0.0;
    for (const cplx& z : g.raw()) {
        real_mass += z.real() * z.real();
        imag_mass += z.imag() * z.imag();
    }
    require(imag_mass <= 1e-20 * (real_mass + input_mass + 1e-300),
            "apply_multiplier: symbol '" + m.tag() + "' does not preserve real fields");
    return real_part(g);
}

// ---- scalar cutoff profiles -------------------------------------------------

double radial_cutoff(double r) {
    // 1 on r <= 1, 0 on r >= 2, and the standard exp-based C-infinity bump
    // on the octave between.  Smoothness here is what gives every band and
    // lowpass piece its rapid spatial decay; a rough or narrow shoulder
    // would smear each piece across the whole box.
    const double a = std::abs(r);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    const double t = a - 1.0;
    const double rise = std::exp(-1.0 / t);
    const double fall = std::exp(-1.0 / (1.0 - t));
    return fall / (rise + fall);
}

double angular_bump(double u) {
    // 1 on |u| <= 0.4, 0 on |u| >= 0.6.  On the shoulder the smoothstep
    // identity s(t) + s(1 - t) = 1 makes integer shifts an exact partition.
    return smoothstep((0.6 - std::abs(u)) / 0.2);
}

// ---- named symbols ----------------------------------------------------------

MultiplierSymbol bessel_power(double s) {
    return {"<xi>^" + std::to_string(s), [s](double a, double b) -> cplx {
                return std::pow(1.0 + a * a + b * b, 0.5 * s);
            }};
}

MultiplierSymbol lowpass_symbol(double cutoff) {
    require(cutoff > 0.0, "lowpass_symbol: cutoff must be positive");
    return {"lowpass(" + std::to_string(cutoff) + ")", [cutoff](double a, double b) -> cplx {
                return radial_cutoff(std::hypot(a, b) / cutoff);
            }};
}

namespace {

bool is_dyadic(double N) {
    if (N < 1.0) return false;
    const double l = std::log2(N);
    return std::abs(l - std::round(l)) < 1e-12;
}

double dyadic_band_value(double N, double r) {
    if (N == 1.0) return radial_cutoff(r);
    return radial_cutoff(r / N) - radial_cutoff(2.0 * r / N);
}

}  // namespace

MultiplierSymbol dyadic_symbol(double N) {
    require(is_dyadic(N), "dyadic_symbol: N must be a power of two >= 1");
    return {"P_" + std::to_string(static_cast<long long>(N)), [N](double a, double b) -> cplx {
                return dyadic_band_value(N, std::hypot(a, b));
            }};
}

MultiplierSymbol translation_symbol(const std::array<double, 2>& y) {
    return {"translate", [y](double a, double b) -> cplx {
                return std::polar(1.0, -(y[0] * a + y[1] * b));
            }};
}

MultiplierSymbol kg_phase_symbol(double t) {
    return {"exp(-it<xi>)", [t](double a, double b) -> cplx {
                return std::polar(1.0, -t * std::sqrt(1.0 + a * a + b * b));
            }};
}

MultiplierSymbol schrodinger_phase_symbol(double t) {
    return {"exp(-it|xi|^2/2)", [t](double a, double b) -> cplx {
                return std::polar(1.0, -0.5 * t * (a * a + b * b));
            }};
}

std::array<double, 2> TubeIndex::center() const {
    if (N == 1.0) return {0.0, 0.0};
    const double angle = 2.0 * pi * k / (20.0 * N);
    return {0.75 * N * std::cos(angle), 0.75 * N * std::sin(angle)};
}

int tube_count(double N) {
    require(is_dyadic(N), "tube_count: N must be a power of two >= 1");
    return N == 1.0 ? 1 : static_cast<int>(20.0 * N);
}

MultiplierSymbol tube_symbol(const TubeIndex& t) {
    require(is_dyadic(t.N), "tube_symbol: N must be a power of two >= 1");
    require(t.k >= 0 && t.k < tube_count(t.N), "tube_symbol: sector index out of range");
    if (t.N == 1.0) return dyadic_symbol(1.0);
    const double N = t.N;
    const int k = t.k;
    return {"tube(N=" + std::to_string(static_cast<long long>(N)) + ",k=" + std::to_string(k) + ")",
            [N, k](double a, double b) -> cplx {
                const double r = std::hypot(a, b);
                const double band = dyadic_band_value(N, r);
                if (band == 0.0) return 0.0;
                double arg = std::atan2(b, a);
                if (arg < 0.0) arg += 2.0 * pi;
                const double sectors = 20.0 * N;
                // Signed sector distance, wrapped periodically so sector 0
                // also covers angles just below 2 pi.
                double d = std::fmod(sectors * arg / (2.0 * pi) - k, sectors);
                if (d < -0.5 * sectors) d += sectors;
                if (d >= 0.5 * sectors) d -= sectors;
                return band * angular_bump(d);
            }};
}

// ---- projections and propagators ---------------------------------------------

ComplexField2D littlewood_paley(double N, const ComplexField2D& f) {
    return apply_multiplier(dyadic_symbol(N), f);
}

RealField2D littlewood_paley(double N, const RealField2D& f) {
    return apply_multiplier(dyadic_symbol(N), f);
}

ComplexField2D tube_projection(const TubeIndex& t, const ComplexField2D& f) {
    return apply_multiplier(tube_symbol(t), f);
}

std::vector<double> resolved_dyadic_levels(const Grid2D& g) {
    // The corner of the lattice is the largest frequency present; once
    // N_max >= sqrt(2) * nyquist the telescoping sum of the bands equals
    // phi(|xi| / N_max) = 1 on every lattice frequency.
    const double corner = std::sqrt(2.0) * g.nyquist();
    std::vector<double> levels{1.0};
    while (levels.back() < corner) levels.push_back(2.0 * levels.back());
    return levels;
}

ComplexField2D translate(const std::array<double, 2>& y, const ComplexField2D& f) {
    return apply_multiplier(translation_symbol(y), f);
}

RealField2D translate(const std::array<double, 2>& y, const RealField2D& f) {
    // The phase is Hermitian except on the Nyquist row, where a real
    // lattice translation is only real for lattice-commensurate shifts;
    // smooth fields have no Nyquist mass, so route through the checked path.
    return apply_multiplier(translation_symbol(y), f);
}

ComplexField2D free_propagate_kg(double t, const ComplexField2D& f) {
    return apply_multiplier(kg_phase_symbol(t), f);
}

ComplexField2D free_propagate_schrodinger(double t, const ComplexField2D& f) {
    return apply_multiplier(schrodinger_phase_symbol(t), f);
}

}  // namespace kg2d
