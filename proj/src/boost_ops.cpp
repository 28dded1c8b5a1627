#include "kg2d/boost_ops.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "kg2d/symbols.hpp"
#include "kg2d/transform.hpp"

namespace kg2d {

double BoostParams::gamma() const {
    require(std::isfinite(nu[0]) && std::isfinite(nu[1]), "BoostParams: nu must be finite");
    return std::sqrt(1.0 + nu[0] * nu[0] + nu[1] * nu[1]);
}

std::array<double, 2> BoostParams::velocity() const {
    const double g = gamma();
    return {nu[0] / g, nu[1] / g};
}

std::array<double, 2> lorentz_map(const BoostParams& nu, const std::array<double, 2>& xi) {
    const double g = nu.gamma();
    const double nn = nu.nu[0] * nu.nu[0] + nu.nu[1] * nu.nu[1];
    const double jxi = std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1]);
    if (nn == 0.0) return xi;
    // xi + (<nu> - 1) (xi . nhat) nhat - nu <xi>
    const double par = (xi[0] * nu.nu[0] + xi[1] * nu.nu[1]) / nn;
    return {xi[0] + (g - 1.0) * par * nu.nu[0] - nu.nu[0] * jxi,
            xi[1] + (g - 1.0) * par * nu.nu[1] - nu.nu[1] * jxi};
}

std::array<std::array<double, 3>, 3> lorentz_matrix(const BoostParams& nu) {
    const double g = nu.gamma();
    const double nn = nu.nu[0] * nu.nu[0] + nu.nu[1] * nu.nu[1];
    std::array<std::array<double, 3>, 3> m{{{g, -nu.nu[0], -nu.nu[1]},
                                            {-nu.nu[0], 1.0, 0.0},
                                            {-nu.nu[1], 0.0, 1.0}}};
    if (nn > 0.0) {
        // Spatial block: identity plus (<nu> - 1) along nhat nhat^T.
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                m[1 + a][1 + b] += (g - 1.0) * nu.nu[a] * nu.nu[b] / nn;
            }
        }
    }
    return m;
}

std::array<double, 3> lorentz_apply(const std::array<std::array<double, 3>, 3>& m,
                                    const std::array<double, 3>& point) {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) out[a] += m[a][b] * point[b];
    }
    return out;
}

// ---- boost_data ---------------------------------------------------------------

namespace {

// Dense complex n x n matrix helpers for the chirp synthesis steps.
struct CMat {
    int n = 0;
    AlignedVec<cplx> a;
    explicit CMat(int nn) : n(nn), a(static_cast<std::size_t>(nn) * nn, cplx{0.0, 0.0}) {}
    cplx& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const cplx& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// E(j, k) = exp(i * scale * xi_k * x_j).
CMat chirp_matrix(const Grid2D& g, double scale) {
    CMat e(g.n);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.coord(j) * scale;
        for (int k = 0; k < g.n; ++k) e.at(j, k) = std::polar(1.0, g.freq(k) * x);
    }
    return e;
}

/// C = A * B (row-major, ikj order).
CMat mat_mul(const CMat& A, const CMat& B) {
    const int n = A.n;
    CMat C(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const cplx aik = A.at(i, k);
            const cplx* brow = &B.at(k, 0);
            cplx* crow = &C.at(i, 0);
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return C;
}

/// C = A * B^T (rows of both operands are contiguous).
CMat mat_mul_bt(const CMat& A, const CMat& B) {
    const int n = A.n;
    CMat C(n);
    for (int i = 0; i < n; ++i) {
        const cplx* arow = &A.at(i, 0);
        for (int j = 0; j < n; ++j) {
            const cplx* brow = &B.at(j, 0);
            cplx acc{0.0, 0.0};
            for (int k = 0; k < n; ++k) acc += arow[k] * brow[k];
            C.at(i, j) = acc;
        }
    }
    return C;
}

CMat field_matrix(const ComplexField2D& f) {
    CMat m(f.grid().n);
    m.a = f.raw();
    return m;
}

/// Natural cubic spline on a uniform grid, complex values.
struct UniformSpline {
    double x0 = 0.0, h = 1.0;
    int n = 0;
    std::vector<cplx> y, m;  // values and second derivatives

    void build(double x0_, double h_, const cplx* values, int n_, std::vector<cplx>& scratch) {
        x0 = x0_;
        h = h_;
        n = n_;
        y.assign(values, values + n);
        m.assign(n, cplx{0.0, 0.0});
        scratch.assign(n, cplx{0.0, 0.0});
        // Thomas algorithm for M_{i-1} + 4 M_i + M_{i+1} = 6 d2y_i / h^2,
        // natural ends M_0 = M_{n-1} = 0.
        std::vector<double> diag(n, 4.0);
        for (int i = 1; i + 1 < n; ++i) {
            cplx rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
            if (i > 1) {
                const double w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs -= w * scratch[i - 1];
            }
            scratch[i] = rhs;
        }
        for (int i = n - 2; i >= 1; --i) m[i] = (scratch[i] - m[i + 1]) / diag[i];
    }

    cplx eval(double x) const {
        if (x < x0 || x > x0 + h * (n - 1)) return {0.0, 0.0};
        int i = static_cast<int>((x - x0) / h);
        if (i > n - 2) i = n - 2;
        const double xl = x0 + h * i;
        const double a = (xl + h - x) / h;  // weight of node i
        const double b = (x - xl) / h;      // weight of node i+1
        return a * y[i] + b * y[i + 1] +
               ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * (h * h / 6.0);
    }
};

enum class BoostPath { exact_axis0, exact_axis1, exact_general, spline };

BoostPath choose_path(const BoostParams& nu, int n) {
    if (nu.nu[1] == 0.0 && n <= 1024) return BoostPath::exact_axis0;
    if (nu.nu[0] == 0.0 && n <= 1024) return BoostPath::exact_axis1;
    if (n <= 128) return BoostPath::exact_general;
    return BoostPath::spline;
}

bool in_square(const Grid2D& g, double z1, double z2) {
    const double nyq = g.nyquist();
    return z1 >= -nyq && z1 < nyq && z2 >= -nyq && z2 < nyq;
}

}  // namespace

ComplexField2D boost_data(const BoostParams& nu, const ComplexField2D& f, BoostDirection dir) {
    const Grid2D& g = f.grid();
    if (nu.nu[0] == 0.0 && nu.nu[1] == 0.0) return f;

    const double tail = spectral_tail_fraction(f);
    if (tail > 1e-8) {
        warn("boost_data: input spectrum carries " + std::to_string(tail) +
             " of its mass above 0.75 Nyquist; boosted coefficients are unreliable");
    }

    const double s = (dir == BoostDirection::forward) ? 1.0 : -1.0;
    const BoostParams source{{s * nu.nu[0], s * nu.nu[1]}};  // source map l_{s nu}
    const BoostParams image = source.negated();              // image map l_{-s nu}

    ComplexField2D spec = (f.space() == Space::spectral) ? f : forward_copy(f);

    // Content whose image leaves the frequency square cannot be represented.
    double lost = 0.0, total = 0.0;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            const double mass = std::norm(spec.at(i, j));
            total += mass;
            const auto im = lorentz_map(image, {g.freq(i), g.freq(j)});
            if (!in_square(g, im[0], im[1])) lost += mass;
        }
    }
    if (total > 0.0 && lost > 1e-8 * total) {
        warn("boost_data: boosted spectrum exceeds the lattice; dropping " +
             std::to_string(lost / total) + " of the squared mass");
    }

    const BoostPath path = choose_path(nu, g.n);
    ComplexField2D out(g, Space::spectral);
    const double gnu = nu.gamma();

    if (path == BoostPath::exact_axis0 || path == BoostPath::exact_axis1) {
        // One source component stays on the lattice; synthesize the other
        // axis back to physical space and evaluate its phase sum directly.
        const bool axis0 = (path == BoostPath::exact_axis0);
        const double nua = axis0 ? nu.nu[0] : nu.nu[1];
        const CMat B = chirp_matrix(g, 1.0);
        const CMat F = field_matrix(spec);
        CMat S(g.n);
        if (axis0) {
            // S(b, j1) = sum_k1 F(k1, b) B(j1, k1)
            CMat FT(g.n);
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j) FT.at(j, i) = F.at(i, j);
            S = mat_mul_bt(FT, B);
        } else {
            // S(a, j2) = sum_k2 F(a, k2) B(j2, k2)
            S = mat_mul_bt(F, B);
        }
        const double inv_n = 1.0 / g.n;
        for (int fixed = 0; fixed < g.n; ++fixed) {
            const double xi_fixed = g.freq(fixed);  // the lattice component
            const cplx* srow = &S.at(fixed, 0);
            for (int var = 0; var < g.n; ++var) {
                const double xt = g.freq(var);  // boosted-axis component
                const double jxt = std::sqrt(1.0 + xt * xt + xi_fixed * xi_fixed);
                const double zeta = gnu * xt - s * nua * jxt;
                const double z1 = axis0 ? zeta : xi_fixed;
                const double z2 = axis0 ? xi_fixed : zeta;
                cplx& dst = axis0 ? out.at(var, fixed) : out.at(fixed, var);
                if (!in_square(g, z1, z2)) {
                    dst = 0.0;
                    continue;
                }
                const cplx step = std::polar(1.0, -zeta * g.h());
                cplx ph = std::polar(1.0, -zeta * g.coord(0));
                cplx acc{0.0, 0.0};
                for (int j = 0; j < g.n; ++j) {
                    acc += srow[j] * ph;
                    ph *= step;
                }
                const double jz = std::sqrt(1.0 + z1 * z1 + z2 * z2);
                dst = (jz / jxt) * inv_n * acc;
            }
        }
    } else if (path == BoostPath::exact_general) {
        ComplexField2D phys = (f.space() == Space::physical) ? f : inverse_copy(spec);
        const double inv_n2 = 1.0 / (static_cast<double>(g.n) * g.n);
        std::vector<cplx> row_phase(g.n);
        for (int a = 0; a < g.n; ++a) {
            for (int b = 0; b < g.n; ++b) {
                const std::array<double, 2> xt{g.freq(a), g.freq(b)};
                const auto z = lorentz_map(source, xt);
                if (!in_square(g, z[0], z[1])) {
                    out.at(a, b) = 0.0;
                    continue;
                }
                const cplx step2 = std::polar(1.0, -z[1] * g.h());
                cplx ph2 = std::polar(1.0, -z[1] * g.coord(0));
                for (int j = 0; j < g.n; ++j) {
                    row_phase[j] = ph2;
                    ph2 *= step2;
                }
                const cplx step1 = std::polar(1.0, -z[0] * g.h());
                cplx ph1 = std::polar(1.0, -z[0] * g.coord(0));
                cplx acc{0.0, 0.0};
                for (int j1 = 0; j1 < g.n; ++j1) {
                    const cplx* frow = &phys.at(j1, 0);
                    cplx inner{0.0, 0.0};
                    for (int j2 = 0; j2 < g.n; ++j2) inner += frow[j2] * row_phase[j2];
                    acc += inner * ph1;
                    ph1 *= step1;
                }
                const double jxt = std::sqrt(1.0 + xt[0] * xt[0] + xt[1] * xt[1]);
                const double jz = std::sqrt(1.0 + z[0] * z[0] + z[1] * z[1]);
                out.at(a, b) = (jz / jxt) * inv_n2 * acc;
            }
        }
    } else {
        // Tensor natural-spline interpolation of the lattice spectrum in
        // monotone frequency order.  Assumes the spectrum is smooth on the
        // dk scale, i.e. the data sits well inside the box.
        const int n = g.n;
        const double nyq = g.nyquist();
        const double dk = g.dk();
        std::vector<UniformSpline> rows(n);
        std::vector<cplx> scratch, vals(n), cross_vals(n);
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                vals[q] = spec.at((p + n / 2) % n, (q + n / 2) % n);
            }
            rows[p].build(-nyq, dk, vals.data(), n, scratch);
        }
        UniformSpline cross;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                const std::array<double, 2> xt{g.freq(a), g.freq(b)};
                const auto z = lorentz_map(source, xt);
                if (!in_square(g, z[0], z[1])) {
                    out.at(a, b) = 0.0;
                    continue;
                }
                for (int p = 0; p < n; ++p) cross_vals[p] = rows[p].eval(z[1]);
                cross.build(-nyq, dk, cross_vals.data(), n, scratch);
                const double jxt = std::sqrt(1.0 + xt[0] * xt[0] + xt[1] * xt[1]);
                const double jz = std::sqrt(1.0 + z[0] * z[0] + z[1] * z[1]);
                out.at(a, b) = (jz / jxt) * cross.eval(z[0]);
            }
        }
    }

    if (f.space() == Space::physical) inverse_transform(out);
    return out;
}

// ---- dilate -------------------------------------------------------------------

ComplexField2D dilate(double lambda, const ComplexField2D& f) {
    require(lambda >= 1.0, "dilate: lambda must be >= 1");
    if (lambda == 1.0) return f;
    const Grid2D& g = f.grid();
    const CMat F = field_matrix(f.space() == Space::spectral ? f : forward_copy(f));
    const CMat E = chirp_matrix(g, 1.0 / lambda);
    const CMat out = mat_mul_bt(mat_mul(E, F), E);

    ComplexField2D result(g, Space::physical);
    const double inv_lambda = 1.0 / lambda;
    for (std::size_t i = 0; i < result.size(); ++i) result.raw()[i] = inv_lambda * out.a[i];

    const double frame = boundary_mass_fraction(result);
    if (frame > 1e-4) {
        warn("dilate: dilated field carries " + std::to_string(frame) +
             " of its mass in the outer frame of the box");
    }
    if (f.space() == Space::spectral) forward_transform(result);
    return result;
}

RealField2D dilate(double lambda, const RealField2D& f) {
    // The chirp synthesis of a Hermitian spectrum is real up to roundoff
    // (and up to Nyquist-row content, absent for resolved data).
    return real_part(dilate(lambda, to_complex(f)));
}

// ---- commutation check ----------------------------------------------------------

namespace {

double rel_l2_diff(const ComplexField2D& a, const ComplexField2D& b) {
    require(a.grid() == b.grid() && a.space() == b.space(),
            "rel_l2_diff: mismatched fields");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a.raw()[i] - b.raw()[i]);
        den += std::norm(b.raw()[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

CommutationReport commutation_check(const BoostParams& nu, const std::array<double, 2>& y,
                                    double tau, const ComplexField2D& test_field) {
    // Left side: Boost^{-1} T_y e^{i tau <nabla>}, right side the same with
    // boosted shift parameters (tau~, y~) = L_nu(tau, y).
    const auto m = lorentz_matrix(nu);
    const auto tilde = lorentz_apply(m, {tau, y[0], y[1]});

    CommutationReport rep;
    rep.tau_tilde = tilde[0];
    rep.y_tilde = {tilde[1], tilde[2]};

    const ComplexField2D lhs =
        boost_data(nu, translate(y, free_propagate_kg(-tau, test_field)), BoostDirection::inverse);
    const ComplexField2D rhs = translate(
        rep.y_tilde,
        free_propagate_kg(-rep.tau_tilde, boost_data(nu, test_field, BoostDirection::inverse)));
    rep.discrepancy = rel_l2_diff(lhs, rhs);
    return rep;
}

CommutationReport commutation_check(const BoostParams& nu, const std::array<double, 2>& y,
                                    double tau) {
    const Grid2D g = Grid2D::make(128, 32.0);
    ComplexField2D f(g, Space::physical);
    for (int i = 0; i < g.n; ++i) {
        const double x1 = g.coord(i) - 0.5;
        for (int j = 0; j < g.n; ++j) {
            const double x2 = g.coord(j) + 0.3;
            f.at(i, j) = std::exp(-0.5 * (x1 * x1 + x2 * x2));
        }
    }
    return commutation_check(nu, y, tau, f);
}

}  // namespace kg2d
