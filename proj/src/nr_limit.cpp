#include "kg2d/nr_limit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <thread>

#include "json.hpp"
#include "kg2d/symbols.hpp"
#include "kg2d/transform.hpp"

namespace kg2d {
namespace {

struct HermiteWeights {
    std::size_t k = 0;
    double h00 = 0.0, h10 = 0.0, h01 = 0.0, h11 = 0.0;  // h1x carry the spacing
};

HermiteWeights hermite_weights(double s, double s0, double delta, std::size_t m) {
    const double kf = (s - s0) / delta;
    double kfl = std::floor(kf);
    kfl = std::min(std::max(kfl, 0.0), static_cast<double>(m - 2));
    const double theta = kf - kfl;
    HermiteWeights w;
    w.k = static_cast<std::size_t>(kfl);
    const double th2 = theta * theta, th3 = th2 * theta;
    w.h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    w.h10 = (th3 - 2.0 * th2 + theta) * delta;
    w.h01 = -2.0 * th3 + 3.0 * th2;
    w.h11 = (th3 - th2) * delta;
    return w;
}

/// L^{4/3} norm of a physical complex field.
double lp43(const ComplexField2D& f) {
    require(f.space() == Space::physical, "lp43 wants a physical field");
    const double cell = f.grid().h() * f.grid().h();
    double acc = 0.0;
    const cplx* p = f.data();
    for (std::size_t i = 0; i < f.size(); ++i) {
        acc += std::pow(std::abs(p[i]), 4.0 / 3.0);
    }
    return std::pow(cell * acc, 0.75);
}

/// Running trapezoid over irregularly spaced (t, value) samples.
struct Trapezoid {
    double acc = 0.0, prev_t = 0.0, prev_v = 0.0;
    bool started = false;
    void add(double t, double v) {
        if (started) acc += 0.5 * (v + prev_v) * std::abs(t - prev_t);
        prev_t = t;
        prev_v = v;
        started = true;
    }
};

/// <xi> over the full c2c lattice, row-major.
AlignedVec<double> bessel_weight_table(const Grid2D& g) {
    AlignedVec<double> w(g.size());
    for (int i = 0; i < g.n; ++i) {
        const double k1 = g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            const double k2 = g.freq(j);
            w[static_cast<std::size_t>(i) * g.n + j] =
                std::sqrt(1.0 + k1 * k1 + k2 * k2);
        }
    }
    return w;
}

ComplexField2D sample_profile(const std::function<cplx(double, double)>& phi,
                              const Grid2D& g) {
    ComplexField2D f(g, Space::physical);
    for (int i = 0; i < g.n; ++i) {
        const double x1 = g.coord(i);
        for (int j = 0; j < g.n; ++j) {
            f.at(i, j) = phi(x1, g.coord(j));
        }
    }
    return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// build_wave_packet
// ---------------------------------------------------------------------------

WavePacket build_wave_packet(const WavePacketParams& p, const Grid2D& g) {
    require(p.lambda >= 1.0, "packet scale lambda must be >= 1");
    require(p.theta > 0.0 && p.theta < 1.0, "low-pass exponent must lie in (0, 1)");
    require(p.profile.grid() == g, "profile must live on the evaluation grid");
    require(p.profile.space() == Space::physical, "profile must be a physical field");
    const bool moving = p.nu.nu[0] != 0.0 || p.nu.nu[1] != 0.0;
    require(!(p.lambda == 1.0 && moving),
            "the lambda = 1 normalization takes nu = 0");

    ComplexField2D f =
        apply_multiplier(lowpass_symbol(std::pow(p.lambda, p.theta)), p.profile);
    if (p.lambda != 1.0) f = dilate(p.lambda, f);
    if (moving) f = boost_data(p.nu, f, BoostDirection::forward);
    if (p.t0 != 0.0) f = free_propagate_kg(-p.t0, f);
    if (p.x0[0] != 0.0 || p.x0[1] != 0.0) f = translate(p.x0, f);

    const auto center = lorentz_apply(lorentz_matrix(p.nu), {p.t0, p.x0[0], p.x0[1]});
    return WavePacket{std::move(f), center[0], {center[1], center[2]}};
}

// ---------------------------------------------------------------------------
// slow_window_run
// ---------------------------------------------------------------------------

NLSTrajectory slow_window_run(const ComplexField2D& phi, double mu, double T,
                              double dts, double node_dt) {
    require(phi.space() == Space::physical, "slow data must be physical");
    require(T > 0.0 && dts > 0.0 && node_dt > 0.0, "positive window and steps required");
    const long long snap_every = std::llround(node_dt / dts);
    require(snap_every >= 1 &&
                std::abs(static_cast<double>(snap_every) * dts - node_dt) <= 1e-12,
            "node cadence must be a multiple of the step size");
    const long long nsteps = std::llround(T / dts);
    require(nsteps >= snap_every &&
                std::abs(static_cast<double>(nsteps) * dts - T) <= 1e-9,
            "window must be an integer number of steps");
    require(nsteps % snap_every == 0, "window must be an integer number of nodes");

    NLSEvolveOptions opt;
    opt.snapshot_every = static_cast<int>(snap_every);
    NLSTrajectory fwd = nls_evolve(make_nls_state(phi, 0.0, mu), T, dts, opt);

    // Backward half, marched directly with a negative-step engine.
    const Grid2D g = phi.grid();
    NLSStepper st(g, mu, -dts);
    ComplexField2D w = phi;
    std::vector<NLSSnapshot> snaps_b;
    std::vector<NLSDiagRow> rows_b;
    for (long long k = 1; k <= nsteps; ++k) {
        st.step(w);
        const double t = -static_cast<double>(k) * dts;
        rows_b.push_back(st.diagnostics(w, t));
        if (k % snap_every == 0) snaps_b.push_back(NLSSnapshot{t, w});
    }
    require(std::isfinite(rows_b.back().mass) && std::isfinite(rows_b.back().sup),
            "backward slow run lost resolution");

    NLSTrajectory traj;
    traj.dt = dts;
    traj.mu = mu;
    traj.status = fwd.status;
    traj.detected_time = fwd.detected_time;
    for (auto it = rows_b.rbegin(); it != rows_b.rend(); ++it) traj.rows.push_back(*it);
    traj.rows.insert(traj.rows.end(), fwd.rows.begin(), fwd.rows.end());
    for (auto it = snaps_b.rbegin(); it != snaps_b.rend(); ++it)
        traj.snapshots.push_back(std::move(*it));
    for (auto& s : fwd.snapshots) traj.snapshots.push_back(std::move(s));
    return traj;
}

// ---------------------------------------------------------------------------
// NLSLift
// ---------------------------------------------------------------------------

struct NLSLift::SynthTable {
    Grid2D fast;
    std::vector<cplx> e;  // [a * n_slow + K] = exp(i XI(K) coord(a) / lambda)
};

NLSLift::~NLSLift() = default;
NLSLift::NLSLift(NLSLift&&) noexcept = default;

NLSLift::NLSLift(const NLSTrajectory& w_traj, double lambda, double T)
    : lambda_(lambda), T_(T), mu_(w_traj.mu) {
    require(lambda >= 1.0, "lift scale lambda must be >= 1");
    require(T > 0.0, "window must be positive");
    require(w_traj.snapshots.size() >= 2, "lift needs at least two stored nodes");
    slow_ = w_traj.snapshots.front().w.grid();
    s0_ = w_traj.snapshots.front().t;
    node_dt_ = w_traj.snapshots[1].t - w_traj.snapshots[0].t;
    require(node_dt_ > 0.0, "nodes must advance in time");
    for (std::size_t k = 1; k < w_traj.snapshots.size(); ++k) {
        const double gap = w_traj.snapshots[k].t - w_traj.snapshots[k - 1].t;
        require(std::abs(gap - node_dt_) <= 1e-9, "nodes must be uniformly spaced");
    }
    require(s0_ <= -T + 1e-9 && w_traj.snapshots.back().t >= T - 1e-9,
            "slow trajectory does not cover the requested window");

    const std::size_t n = static_cast<std::size_t>(slow_.n);
    for (const NLSSnapshot& snap : w_traj.snapshots) {
        require(snap.w.grid() == slow_, "nodes must share one grid");
        require(snap.w.space() == Space::physical, "nodes must be physical fields");
        ComplexField2D cube(slow_, Space::physical);
        for (std::size_t i = 0; i < cube.size(); ++i) {
            cube.data()[i] = std::norm(snap.w.data()[i]) * snap.w.data()[i];
        }
        ComplexField2D what = forward_copy(snap.w);
        forward_transform(cube);
        ComplexField2D wd(slow_, Space::spectral);
        for (std::size_t i = 0; i < n; ++i) {
            const double k1 = slow_.freq(static_cast<int>(i));
            for (std::size_t j = 0; j < n; ++j) {
                const double k2 = slow_.freq(static_cast<int>(j));
                const cplx rhs = 0.5 * (k1 * k1 + k2 * k2) * what.at(i, j) +
                                 mu_ * 0.375 * cube.at(i, j);
                wd.at(i, j) = cplx(0.0, -1.0) * rhs;
            }
        }
        wn_.push_back(std::move(what));
        wdn_.push_back(std::move(wd));
    }
}

void NLSLift::hermite_spectrum(double s, ComplexField2D& out) const {
    const HermiteWeights w = hermite_weights(s, s0_, node_dt_, wn_.size());
    const ComplexField2D& a0 = wn_[w.k];
    const ComplexField2D& d0 = wdn_[w.k];
    const ComplexField2D& a1 = wn_[w.k + 1];
    const ComplexField2D& d1 = wdn_[w.k + 1];
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = w.h00 * a0.data()[i] + w.h10 * d0.data()[i] +
                        w.h01 * a1.data()[i] + w.h11 * d1.data()[i];
    }
}

const NLSLift::SynthTable& NLSLift::table_for(const Grid2D& fast) const {
    if (!table_ || !(table_->fast == fast)) {
        auto tab = std::make_unique<SynthTable>();
        tab->fast = fast;
        const std::size_t nf = static_cast<std::size_t>(fast.n);
        const std::size_t ns = static_cast<std::size_t>(slow_.n);
        tab->e.resize(nf * ns);
        for (std::size_t a = 0; a < nf; ++a) {
            const double x = fast.coord(static_cast<int>(a)) / lambda_;
            for (std::size_t k = 0; k < ns; ++k) {
                tab->e[a * ns + k] =
                    std::polar(1.0, slow_.freq(static_cast<int>(k)) * x);
            }
        }
        table_ = std::move(tab);
    }
    return *table_;
}

ComplexField2D NLSLift::slow_at(double s) const {
    require(std::abs(s) <= T_ + 1e-9, "query outside the slow window");
    ComplexField2D out(slow_, Space::spectral);
    hermite_spectrum(s, out);
    inverse_transform(out);
    return out;
}

ComplexField2D NLSLift::envelope(double t_fast, const Grid2D& fast) const {
    const double s = t_fast / (lambda_ * lambda_);
    require(std::abs(s) <= T_ + 1e-9, "envelope query outside the window");
    ComplexField2D ws(slow_, Space::spectral);
    hermite_spectrum(s, ws);

    const SynthTable& tb = table_for(fast);
    const std::size_t nf = static_cast<std::size_t>(fast.n);
    const std::size_t ns = static_cast<std::size_t>(slow_.n);
    // Contract the second slow axis against target columns, then the first
    // axis against target rows (exact semidiscrete interpolation).
    std::vector<cplx> mid(ns * nf, cplx(0.0, 0.0));
    for (std::size_t k1 = 0; k1 < ns; ++k1) {
        const cplx* wrow = ws.data() + k1 * ns;
        for (std::size_t b = 0; b < nf; ++b) {
            const cplx* erow = tb.e.data() + b * ns;
            cplx acc(0.0, 0.0);
            for (std::size_t k2 = 0; k2 < ns; ++k2) acc += wrow[k2] * erow[k2];
            mid[k1 * nf + b] = acc;
        }
    }
    ComplexField2D out(fast, Space::physical);
    const double amp = 1.0 / lambda_;
    for (std::size_t a = 0; a < nf; ++a) {
        cplx* orow = out.data() + a * nf;
        const cplx* erow = tb.e.data() + a * ns;
        for (std::size_t k1 = 0; k1 < ns; ++k1) {
            const cplx c = erow[k1];
            const cplx* mrow = mid.data() + k1 * nf;
            for (std::size_t b = 0; b < nf; ++b) orow[b] += c * mrow[b];
        }
        for (std::size_t b = 0; b < nf; ++b) orow[b] *= amp;
    }
    return out;
}

ComplexField2D NLSLift::value(double t_fast, const Grid2D& fast) const {
    const double w = fast_window();
    if (t_fast > w + 1e-12) {
        return free_propagate_kg(t_fast - w, value(w, fast));
    }
    if (t_fast < -w - 1e-12) {
        return free_propagate_kg(t_fast + w, value(-w, fast));
    }
    ComplexField2D out = envelope(t_fast, fast);
    const cplx ph = std::polar(1.0, -t_fast);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= ph;
    return out;
}

KGState NLSLift::state(double t_fast, const Grid2D& fast) const {
    const ComplexField2D v = value(t_fast, fast);
    RealField2D u(fast), im(fast);
    for (std::size_t i = 0; i < v.size(); ++i) {
        u.data()[i] = v.data()[i].real();
        im.data()[i] = v.data()[i].imag();
    }
    RealField2D ut = apply_multiplier(bessel_power(1.0), im);
    return KGState{std::move(u), std::move(ut), t_fast, mu_};
}

// ---------------------------------------------------------------------------
// error_terms
// ---------------------------------------------------------------------------

ErrorBudget error_terms(const NLSLift& lift, const Grid2D& fast, double sample_dt) {
    require(sample_dt > 0.0, "sample cadence must be positive");
    const double w = lift.fast_window();
    const long long half = std::max<long long>(1, std::llround(w / sample_dt));
    const double cad = w / static_cast<double>(half);
    const double mu = lift.mu();

    const AlignedVec<double> bes = bessel_weight_table(fast);
    const std::size_t total = fast.size();

    Trapezoid acc_e1, acc_e2, acc_e3, acc_e4;
    for (long long k = -half; k <= half; ++k) {
        const double t = cad * static_cast<double>(k);
        const ComplexField2D wt = lift.envelope(t, fast);

        // Symbol mismatch: (<xi> - 1 - |xi|^2 / 2) on the envelope spectrum.
        ComplexField2D spec = forward_copy(wt);
        for (std::size_t i = 0; i < total; ++i) {
            const double b = bes[i];
            spec.data()[i] *= b - 1.0 - 0.5 * (b * b - 1.0);
        }
        acc_e1.add(t, sobolev_norm(spec, 0.5));

        // Cubic combinations of the envelope.
        ComplexField2D res(fast, Space::physical);   // |W|^2 W
        ComplexField2D trip(fast, Space::physical);  // W^3
        ComplexField2D conj3(fast, Space::physical); // |W|^2 conj W
        for (std::size_t i = 0; i < total; ++i) {
            const cplx z = wt.data()[i];
            const double m = std::norm(z);
            res.data()[i] = m * z;
            trip.data()[i] = z * z * z;
            conj3.data()[i] = m * std::conj(z);
        }

        // Resonant-cube weight mismatch, reported through the <nabla> weight:
        // <nabla> (mu 3/8) (<nabla>^{-1} - 1)[|W|^2 W] = (mu 3/8)(1 - <nabla>)[...].
        forward_transform(res);
        for (std::size_t i = 0; i < total; ++i) {
            res.data()[i] *= 0.375 * (1.0 - bes[i]);
        }
        inverse_transform(res);
        acc_e2.add(t, std::pow(lp43(res), 4.0 / 3.0));

        // Triple-oscillation term (mu/4) Re[e^{-3it} W^3], a real field.
        const cplx ph3 = std::polar(0.25, -3.0 * t);
        for (std::size_t i = 0; i < total; ++i) {
            trip.data()[i] = cplx((ph3 * trip.data()[i]).real(), 0.0);
        }
        forward_transform(trip);
        for (std::size_t i = 0; i < total; ++i) trip.data()[i] *= bes[i];
        inverse_transform(trip);
        acc_e3.add(t, std::pow(lp43(trip), 4.0 / 3.0));

        // Conjugate-oscillation term (mu 3/8) e^{it} |W|^2 conj W.
        const cplx ph4 = std::polar(0.375, t);
        for (std::size_t i = 0; i < total; ++i) conj3.data()[i] *= ph4;
        forward_transform(conj3);
        for (std::size_t i = 0; i < total; ++i) conj3.data()[i] *= bes[i];
        inverse_transform(conj3);
        acc_e4.add(t, std::pow(lp43(conj3), 4.0 / 3.0));
    }

    ErrorBudget out;
    const double amu = std::abs(mu);
    out.e1 = acc_e1.acc;
    out.e2 = amu * std::pow(acc_e2.acc, 0.75);
    out.e3 = amu * std::pow(acc_e3.acc, 0.75);
    out.e4 = amu * std::pow(acc_e4.acc, 0.75);
    return out;
}

// ---------------------------------------------------------------------------
// forced_corrections / corrected_lift
// ---------------------------------------------------------------------------

namespace {

/// One directional Duhamel march of the two corrections from t = 0.
struct DuhamelMarch {
    ComplexField2D f3_hat, f4_hat;  // spectral states at the endpoint
    double f3_h12 = 0.0, f4_h12 = 0.0;
    Trapezoid f3_l4, f4_l4;
};

DuhamelMarch duhamel_march(const NLSLift& lift, const Grid2D& fast, double t_end,
                           double dt_kg, double sample_dt, double refresh_dt) {
    require(dt_kg > 0.0, "dt must be positive");
    const double mu = lift.mu();
    const long long steps = std::llround(std::abs(t_end) / dt_kg);
    require(std::abs(static_cast<double>(steps) * dt_kg - std::abs(t_end)) <= 1e-9,
            "endpoint must be an integer number of steps");
    const long long stride = std::max<long long>(1, std::llround(sample_dt / dt_kg));
    const long long refresh = std::max<long long>(1, std::llround(refresh_dt / dt_kg));
    const double sdt = t_end < 0.0 ? -dt_kg : dt_kg;

    const AlignedVec<double> bes = bessel_weight_table(fast);
    const std::size_t total = fast.size();
    AlignedVec<cplx> phf(total), phh(total);
    for (std::size_t i = 0; i < total; ++i) {
        phf[i] = std::polar(1.0, -sdt * bes[i]);
        phh[i] = std::polar(1.0, -0.5 * sdt * bes[i]);
    }

    DuhamelMarch m;
    m.f3_hat = ComplexField2D(fast, Space::spectral);
    m.f4_hat = ComplexField2D(fast, Space::spectral);
    ComplexField2D c_hat(fast, Space::spectral), cc_hat(fast, Space::spectral),
        g_hat(fast, Space::spectral);
    const int n = fast.n;

    auto refresh_envelope = [&](double t_now) {
        const ComplexField2D wt = lift.envelope(t_now, fast);
        ComplexField2D cube(fast, Space::physical), gfld(fast, Space::physical);
        for (std::size_t i = 0; i < total; ++i) {
            const cplx z = wt.data()[i];
            cube.data()[i] = z * z * z;
            gfld.data()[i] = std::norm(z) * std::conj(z);
        }
        forward_transform(cube);
        forward_transform(gfld);
        c_hat = cube;
        g_hat = gfld;
        for (int i = 0; i < n; ++i) {
            const int ni = (n - i) % n;
            for (int j = 0; j < n; ++j) {
                cc_hat.at(i, j) = std::conj(c_hat.at(ni, (n - j) % n));
            }
        }
    };

    auto sample = [&](double t) {
        m.f3_h12 = std::max(m.f3_h12, sobolev_norm(m.f3_hat, 0.5));
        m.f4_h12 = std::max(m.f4_h12, sobolev_norm(m.f4_hat, 0.5));
        const double l43 = lp_norm(inverse_copy(m.f3_hat), 4);
        const double l44 = lp_norm(inverse_copy(m.f4_hat), 4);
        m.f3_l4.add(t, l43 * l43 * l43 * l43);
        m.f4_l4.add(t, l44 * l44 * l44 * l44);
    };

    sample(0.0);
    for (long long k = 1; k <= steps; ++k) {
        if ((k - 1) % refresh == 0) {
            refresh_envelope(static_cast<double>(k - 1) * sdt);
        }
        const double tm = (static_cast<double>(k - 1) + 0.5) * sdt;
        const cplx w3m = std::polar(mu / 8.0, -3.0 * tm);
        const cplx w3p = std::polar(mu / 8.0, 3.0 * tm);
        const cplx w4 = std::polar(mu * 0.375, tm);
        const cplx gain(0.0, sdt);  // i * dt
        for (std::size_t i = 0; i < total; ++i) {
            const cplx e3 = w3m * c_hat.data()[i] + w3p * cc_hat.data()[i];
            const cplx e4 = w4 * g_hat.data()[i];
            m.f3_hat.data()[i] = phf[i] * m.f3_hat.data()[i] + gain * phh[i] * e3;
            m.f4_hat.data()[i] = phf[i] * m.f4_hat.data()[i] + gain * phh[i] * e4;
        }
        if (k % stride == 0 || k == steps) {
            sample(static_cast<double>(k) * sdt);
        }
    }
    return m;
}

}  // namespace

CorrectionRun forced_corrections(const NLSLift& lift, const Grid2D& fast,
                                 double t_lo, double t_hi, double dt_kg,
                                 double sample_dt, double refresh_dt) {
    require(t_lo <= 0.0 && t_hi >= 0.0 && t_hi > t_lo,
            "correction window must contain t = 0");
    DuhamelMarch up = duhamel_march(lift, fast, t_hi, dt_kg, sample_dt, refresh_dt);
    CorrectionRun out{inverse_copy(up.f3_hat), inverse_copy(up.f4_hat)};
    out.f3_h12 = up.f3_h12;
    out.f4_h12 = up.f4_h12;
    double f3_l4 = up.f3_l4.acc, f4_l4 = up.f4_l4.acc;
    if (t_lo < 0.0) {
        DuhamelMarch dn = duhamel_march(lift, fast, t_lo, dt_kg, sample_dt, refresh_dt);
        out.f3_h12 = std::max(out.f3_h12, dn.f3_h12);
        out.f4_h12 = std::max(out.f4_h12, dn.f4_h12);
        f3_l4 += dn.f3_l4.acc;
        f4_l4 += dn.f4_l4.acc;
    }
    out.f3_l4 = std::pow(f3_l4, 0.25);
    out.f4_l4 = std::pow(f4_l4, 0.25);
    return out;
}

ComplexField2D corrected_lift(const NLSLift& lift, const Grid2D& fast,
                              double t_fast, double dt_kg, double refresh_dt) {
    ComplexField2D out = lift.value(t_fast, fast);
    if (t_fast == 0.0) return out;  // corrections vanish at the anchor time
    DuhamelMarch m = duhamel_march(lift, fast, t_fast, dt_kg,
                                   std::abs(t_fast), refresh_dt);
    const ComplexField2D f3 = inverse_copy(m.f3_hat);
    const ComplexField2D f4 = inverse_copy(m.f4_hat);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] -= f3.data()[i] + f4.data()[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// convergence_sweep
// ---------------------------------------------------------------------------

SweepPlan default_sweep_plan() {
    SweepPlan plan;
    plan.points = {
        SweepPoint{4.0, 128, 64.0, 0.01},
        SweepPoint{8.0, 256, 128.0, 0.004},
        SweepPoint{16.0, 512, 256.0, 0.0016},
    };
    return plan;
}

namespace {

void run_sweep_point(const std::function<cplx(double, double)>& phi,
                     const SweepPlan& plan, const SweepPoint& pt, SweepRow& row) {
    row.lambda = pt.lambda;
    const double w_fast = pt.lambda * pt.lambda * plan.T;
    const double t0_fast = plan.t0_slow * pt.lambda * pt.lambda;
    if (w_fast + std::abs(t0_fast) > plan.fast_horizon_cap) {
        row.skipped = true;
        row.note = "fast horizon exceeds the cap";
        return;
    }
    if (pt.n_fast > plan.n_cap) {
        row.skipped = true;
        row.note = "resolution exceeds the cap";
        return;
    }

    const Grid2D gs = Grid2D::make(plan.n_slow, plan.box_slow);
    const Grid2D gf = Grid2D::make(pt.n_fast, pt.box_fast);
    const double cut = std::pow(pt.lambda, 0.01);

    ComplexField2D phi_slow =
        apply_multiplier(lowpass_symbol(cut), sample_profile(phi, gs));
    if (plan.mu == -1.0) {
        require(plan.mass_q > 0.0,
                "focusing sweep needs the ground-state mass for the threshold check");
        const double m_phi = std::pow(lp_norm(phi_slow, 2), 2);
        if (m_phi >= (4.0 / 3.0) * plan.mass_q) {
            row.skipped = true;
            row.note = "profile mass is not below 4/3 of the ground-state mass";
            return;
        }
    }

    NLSTrajectory slow =
        slow_window_run(phi_slow, plan.mu, plan.T, plan.dt_nls, plan.node_dt);
    if (slow.status != RunStatus::completed) {
        row.skipped = true;
        row.note = std::string("slow run halted: ") + to_string(slow.status);
        row.status = slow.status;
        return;
    }
    const NLSLift lift(slow, pt.lambda, plan.T);

    WavePacket packet = build_wave_packet(
        WavePacketParams{pt.lambda, BoostParams{}, t0_fast, plan.x0, 0.01,
                         sample_profile(phi, gf)},
        gf);
    const KGState s0 = from_first_order(packet.data, 0.0, plan.mu);

    row.budget = error_terms(lift, gf, plan.sample_dt);

    // True evolution across the window in both directions, with the
    // corrections marched alongside on the same step grid.
    const std::size_t total = gf.size();
    const AlignedVec<double> bes = bessel_weight_table(gf);
    double int_l4_c = 0.0, int_l4_u = 0.0, int_l4_true = 0.0;
    double sup_h12_c = 0.0, sup_h12_u = 0.0, sup_h12_true = 0.0;
    double sup_f3 = 0.0, sup_f4 = 0.0;
    ComplexField2D mid_true(gf, Space::physical), mid_corr(gf, Space::physical);
    bool failed = false;

    auto march = [&](double direction) {
        Trapezoid acc_l4_c, acc_l4_u, acc_l4_true;
        const double sdt = direction * pt.dt_kg;
        const long long steps = std::llround(w_fast / pt.dt_kg);
        require(std::abs(static_cast<double>(steps) * pt.dt_kg - w_fast) <= 1e-9,
                "window must be an integer number of steps");
        const long long stride =
            std::max<long long>(1, std::llround(plan.sample_dt / pt.dt_kg));
        const long long refresh =
            std::max<long long>(1, std::llround(plan.refresh_dt / pt.dt_kg));
        const long long mid_k = ((steps / 2) / stride) * stride;

        KGStepper stepper(gf, plan.mu, sdt);
        RealField2D u = s0.u, ut = s0.ut;
        ComplexField2D f3_hat(gf, Space::spectral), f4_hat(gf, Space::spectral);
        ComplexField2D c_hat(gf, Space::spectral), cc_hat(gf, Space::spectral),
            g_hat(gf, Space::spectral);
        AlignedVec<cplx> phf(total), phh(total);
        for (std::size_t i = 0; i < total; ++i) {
            phf[i] = std::polar(1.0, -sdt * bes[i]);
            phh[i] = std::polar(1.0, -0.5 * sdt * bes[i]);
        }

        auto refresh_envelope = [&](double t_now) {
            const ComplexField2D wt = lift.envelope(t_now, gf);
            ComplexField2D cube(gf, Space::physical), gfld(gf, Space::physical);
            for (std::size_t i = 0; i < total; ++i) {
                const cplx z = wt.data()[i];
                cube.data()[i] = z * z * z;
                gfld.data()[i] = std::norm(z) * std::conj(z);
            }
            forward_transform(cube);
            forward_transform(gfld);
            c_hat = cube;
            g_hat = gfld;
            const int n = gf.n;
            for (int i = 0; i < n; ++i) {
                const int ni = (n - i) % n;
                for (int j = 0; j < n; ++j) {
                    cc_hat.at(i, j) = std::conj(c_hat.at(ni, (n - j) % n));
                }
            }
        };

        auto sample = [&](long long k, double t) {
            const ComplexField2D v_true =
                to_first_order(KGState{u, ut, t, plan.mu});
            ComplexField2D vt = lift.envelope(t, gf);
            const cplx ph = std::polar(1.0, -t);
            for (std::size_t i = 0; i < total; ++i) vt.data()[i] *= ph;
            const ComplexField2D f3 = inverse_copy(f3_hat);
            const ComplexField2D f4 = inverse_copy(f4_hat);
            ComplexField2D diff_c(gf, Space::physical), diff_u(gf, Space::physical);
            for (std::size_t i = 0; i < total; ++i) {
                const cplx du = v_true.data()[i] - vt.data()[i];
                diff_u.data()[i] = du;
                diff_c.data()[i] = du + f3.data()[i] + f4.data()[i];
            }
            const double l4c = lp_norm(diff_c, 4), l4u = lp_norm(diff_u, 4);
            const double l4t = lp_norm(v_true, 4);
            acc_l4_c.add(t, l4c * l4c * l4c * l4c);
            acc_l4_u.add(t, l4u * l4u * l4u * l4u);
            acc_l4_true.add(t, l4t * l4t * l4t * l4t);
            sup_h12_c = std::max(sup_h12_c, sobolev_norm(diff_c, 0.5));
            sup_h12_u = std::max(sup_h12_u, sobolev_norm(diff_u, 0.5));
            sup_h12_true = std::max(sup_h12_true, sobolev_norm(v_true, 0.5));
            sup_f3 = std::max(sup_f3, sobolev_norm(f3_hat, 0.5));
            sup_f4 = std::max(sup_f4, sobolev_norm(f4_hat, 0.5));
            if (direction > 0.0 && k == mid_k && k > 0) {
                mid_true = v_true;
                for (std::size_t i = 0; i < total; ++i) {
                    mid_corr.data()[i] = v_true.data()[i] - diff_c.data()[i];
                }
            }
        };

        sample(0, 0.0);
        for (long long k = 1; k <= steps && !failed; ++k) {
            if ((k - 1) % refresh == 0) {
                refresh_envelope(static_cast<double>(k - 1) * sdt);
            }
            const double tm = (static_cast<double>(k - 1) + 0.5) * sdt;
            const cplx w3m = std::polar(plan.mu / 8.0, -3.0 * tm);
            const cplx w3p = std::polar(plan.mu / 8.0, 3.0 * tm);
            const cplx w4 = std::polar(plan.mu * 0.375, tm);
            const cplx gain(0.0, sdt);
            for (std::size_t i = 0; i < total; ++i) {
                const cplx e3 = w3m * c_hat.data()[i] + w3p * cc_hat.data()[i];
                const cplx e4 = w4 * g_hat.data()[i];
                f3_hat.data()[i] = phf[i] * f3_hat.data()[i] + gain * phh[i] * e3;
                f4_hat.data()[i] = phf[i] * f4_hat.data()[i] + gain * phh[i] * e4;
            }
            stepper.step(u, ut);
            if (k % stride == 0 || k == steps) {
                const double t = static_cast<double>(k) * sdt;
                if (!std::isfinite(lp_norm(u, 0))) {
                    row.status = RunStatus::underresolved;
                    row.note = "true run lost resolution";
                    failed = true;
                    break;
                }
                sample(k, t);
            }
        }
        int_l4_c += acc_l4_c.acc;
        int_l4_u += acc_l4_u.acc;
        int_l4_true += acc_l4_true.acc;
    };

    march(+1.0);
    if (!failed) march(-1.0);
    if (failed) return;

    row.budget.f3 = sup_f3;
    row.budget.f4 = sup_f4;
    row.budget.discrepancy_l4 = std::pow(int_l4_c, 0.25);
    row.budget.discrepancy_h12 = sup_h12_c;
    row.disc_l4_uncorrected = std::pow(int_l4_u, 0.25);
    row.disc_h12_uncorrected = sup_h12_u;
    row.sup_h12_true = sup_h12_true;
    row.l4_true = std::pow(int_l4_true, 0.25);

    // Mid-window slice, plain and through the data boost (an H^{1/2}
    // isometry, so the two numbers should agree and order identically).
    ComplexField2D slice_diff(gf, Space::physical);
    for (std::size_t i = 0; i < total; ++i) {
        slice_diff.data()[i] = mid_true.data()[i] - mid_corr.data()[i];
    }
    row.disc_h12_midslice = sobolev_norm(slice_diff, 0.5);
    if (plan.nu.nu[0] != 0.0 || plan.nu.nu[1] != 0.0) {
        const ComplexField2D bt = boost_data(plan.nu, mid_true, BoostDirection::forward);
        const ComplexField2D bc = boost_data(plan.nu, mid_corr, BoostDirection::forward);
        ComplexField2D bdiff(gf, bt.space());
        for (std::size_t i = 0; i < total; ++i) {
            bdiff.data()[i] = bt.data()[i] - bc.data()[i];
        }
        row.disc_h12_boosted = sobolev_norm(bdiff, 0.5);
    }
}

}  // namespace

SweepReport convergence_sweep(const std::function<cplx(double, double)>& phi,
                              const SweepPlan& plan) {
    require(!plan.points.empty(), "sweep plan holds no points");
    SweepReport rep;
    rep.rows.resize(plan.points.size());

    auto run_one = [&](std::size_t i) {
        try {
            run_sweep_point(phi, plan, plan.points[i], rep.rows[i]);
        } catch (const std::exception& e) {
            rep.rows[i].lambda = plan.points[i].lambda;
            rep.rows[i].skipped = true;
            rep.rows[i].note = e.what();
        }
    };

    const int nth = std::max(1, std::min<int>(plan.threads,
                                              static_cast<int>(plan.points.size())));
    if (nth == 1) {
        for (std::size_t i = 0; i < plan.points.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nth));
        for (int t = 0; t < nth; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= plan.points.size()) return;
                    run_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<const SweepRow*> done;
    for (const SweepRow& r : rep.rows) {
        if (!r.skipped && r.status == RunStatus::completed) done.push_back(&r);
    }
    // Monotone over the available pairs; a sweep with fewer than two
    // completed points has no pairs and passes vacuously.
    rep.monotone_l4 = true;
    rep.monotone_h12 = true;
    for (std::size_t i = 1; i < done.size(); ++i) {
        if (done[i]->budget.discrepancy_l4 >= done[i - 1]->budget.discrepancy_l4) {
            rep.monotone_l4 = false;
        }
        if (done[i]->budget.discrepancy_h12 >= done[i - 1]->budget.discrepancy_h12) {
            rep.monotone_h12 = false;
        }
    }
    rep.caveat =
        "finite-(T, lambda) trend only; large-time data offsets are truncated "
        "to finite values and extrapolation beyond the swept range is "
        "unsupported";
    return rep;
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

void write_sweep_csv(const SweepReport& rep, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open " + path);
    out << "lambda,discrepancy_l4,discrepancy_h12,e1,e2,e3,e4,f3,f4,"
           "disc_l4_uncorrected,disc_h12_uncorrected,sup_h12_true,l4_true,"
           "disc_h12_midslice,disc_h12_boosted,status,skipped,note\n";
    out << std::setprecision(12);
    for (const SweepRow& r : rep.rows) {
        out << r.lambda << ',' << r.budget.discrepancy_l4 << ','
            << r.budget.discrepancy_h12 << ',' << r.budget.e1 << ','
            << r.budget.e2 << ',' << r.budget.e3 << ',' << r.budget.e4 << ','
            << r.budget.f3 << ',' << r.budget.f4 << ',' << r.disc_l4_uncorrected
            << ',' << r.disc_h12_uncorrected << ',' << r.sup_h12_true << ','
            << r.l4_true << ',' << r.disc_h12_midslice << ','
            << r.disc_h12_boosted << ',' << to_string(r.status) << ','
            << (r.skipped ? 1 : 0) << ',' << '"' << r.note << '"' << '\n';
    }
    require(out.good(), "failed writing " + path);
}

void write_sweep_json(const SweepReport& rep, const std::string& path) {
    nlohmann::json j;
    j["monotone_l4"] = rep.monotone_l4;
    j["monotone_h12"] = rep.monotone_h12;
    j["caveat"] = rep.caveat;
    j["rows"] = nlohmann::json::array();
    for (const SweepRow& r : rep.rows) {
        nlohmann::json row;
        row["lambda"] = r.lambda;
        row["skipped"] = r.skipped;
        row["status"] = to_string(r.status);
        row["note"] = r.note;
        row["discrepancy_l4"] = r.budget.discrepancy_l4;
        row["discrepancy_h12"] = r.budget.discrepancy_h12;
        row["e1"] = r.budget.e1;
        row["e2"] = r.budget.e2;
        row["e3"] = r.budget.e3;
        row["e4"] = r.budget.e4;
        row["f3"] = r.budget.f3;
        row["f4"] = r.budget.f4;
        row["disc_l4_uncorrected"] = r.disc_l4_uncorrected;
        row["disc_h12_uncorrected"] = r.disc_h12_uncorrected;
        row["sup_h12_true"] = r.sup_h12_true;
        row["l4_true"] = r.l4_true;
        row["disc_h12_midslice"] = r.disc_h12_midslice;
        row["disc_h12_boosted"] = r.disc_h12_boosted;
        j["rows"].push_back(std::move(row));
    }
    std::ofstream out(path);
    require(out.good(), "cannot open " + path);
    out << j.dump(2) << '\n';
    require(out.good(), "failed writing " + path);
}

}  // namespace kg2d
