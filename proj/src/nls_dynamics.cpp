#include "kg2d/nls_dynamics.hpp"

#include <cmath>
#include <complex>
#include <cstdlib>

#include "kg2d/kernels.hpp"
#include "kg2d/transform.hpp"

namespace kg2d {

NLSState make_nls_state(ComplexField2D w, double t, double mu) {
    require(w.space() == Space::physical, "nls state wants a physical-space field");
    require(mu == 1.0 || mu == -1.0, "mu must be +1 or -1");
    return NLSState{std::move(w), t, mu};
}

NLSState NLSTrajectory::final_state() const {
    require(!snapshots.empty(), "trajectory holds no snapshots");
    const NLSSnapshot& last = snapshots.back();
    return NLSState{last.w, last.t, mu};
}

NLSStepper::NLSStepper(const Grid2D& g, double mu, double dt)
    : grid_(g), mu_(mu), dt_(dt) {
    require(mu == 1.0 || mu == -1.0, "mu must be +1 or -1");
    const std::size_t n = g.n;
    const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    const double cut = dealias_cutoff(g);
    const double parseval = g.box_length * g.box_length * norm * norm;
    lin_.resize(n * n);
    wq_k_.resize(n * n);
    scratch_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k1 = g.freq(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double k2 = g.freq(j);
            const double k_sq = k1 * k1 + k2 * k2;
            const bool kept = std::abs(k1) <= cut && std::abs(k2) <= cut;
            lin_[i * n + j] =
                kept ? std::polar(norm, -0.5 * dt * k_sq) : cplx(0.0, 0.0);
            wq_k_[i * n + j] = parseval * k_sq;
        }
    }
}

void NLSStepper::phase(ComplexField2D& w, double dt_phase) {
    if (dt_phase == 0.0) return;
    cplx* p = w.data();
    const double rate = -mu_ * 0.375 * dt_phase;
    const std::size_t total = w.size();
    for (std::size_t i = 0; i < total; ++i) {
        p[i] *= std::polar(1.0, rate * std::norm(p[i]));
    }
}

void NLSStepper::linear(ComplexField2D& w) {
    detail::raw_c2c(static_cast<int>(grid_.n), w.data(), -1);
    kernels::ops().cmul(w.data(), lin_.data(), w.size());
    detail::raw_c2c(static_cast<int>(grid_.n), w.data(), +1);
}

void NLSStepper::step(ComplexField2D& w) {
    phase(w, 0.5 * dt_);
    linear(w);
    phase(w, 0.5 * dt_);
}

NLSDiagRow NLSStepper::diagnostics(const ComplexField2D& w, double t) {
    NLSDiagRow row;
    row.t = t;
    const cplx* p = w.data();
    const std::size_t total = w.size();
    const double cell = grid_.h() * grid_.h();
    double mass = 0.0, quartic = 0.0, sup = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        const double m = std::norm(p[i]);
        mass += m;
        quartic += m * m;
        sup = std::max(sup, m);
    }
    row.mass = cell * mass;
    row.sup = std::sqrt(sup);
    std::copy(p, p + total, scratch_.begin());
    detail::raw_c2c(static_cast<int>(grid_.n), scratch_.data(), -1);
    const double grad_sq = kernels::ops().weighted_sum_sq(scratch_.data(), wq_k_.data(), total);
    row.energy = 0.5 * grad_sq + mu_ * (3.0 / 16.0) * cell * quartic;
    return row;
}

NLSState nls_step(const NLSState& s, double dt) {
    require(s.w.space() == Space::physical, "nls_step wants a physical-space field");
    NLSStepper st(s.w.grid(), s.mu, dt);
    NLSState out{s.w, s.t + dt, s.mu};
    st.step(out.w);
    return out;
}

NLSTrajectory nls_evolve(const NLSState& s, double t_end, double dt,
                         const NLSEvolveOptions& opt) {
    require(s.w.space() == Space::physical, "nls_evolve wants a physical-space field");
    require(dt > 0.0, "dt must be positive");
    const double span = t_end - s.t;
    require(span > 0.0, "t_end must exceed the state time");
    const long long nsteps = std::llround(span / dt);
    require(nsteps >= 1 && std::abs(static_cast<double>(nsteps) * dt - span) <=
                               1e-9 * std::max(1.0, std::abs(span)),
            "t_end - t must be an integer number of steps");

    NLSStepper st(s.w.grid(), s.mu, dt);
    NLSTrajectory traj;
    traj.dt = dt;
    traj.mu = s.mu;
    traj.rows.reserve(static_cast<std::size_t>(nsteps) + 1);

    ComplexField2D w = s.w;
    traj.rows.push_back(st.diagnostics(w, s.t));
    traj.snapshots.push_back(NLSSnapshot{s.t, w});
    const double m0 = traj.rows.front().mass;
    const double m_scale = std::max(std::abs(m0), 1e-30);

    for (long long k = 1; k <= nsteps; ++k) {
        st.step(w);
        const double t = s.t + static_cast<double>(k) * dt;
        NLSDiagRow row = st.diagnostics(w, t);
        traj.rows.push_back(row);
        const bool store =
            opt.snapshot_every > 0 && k % opt.snapshot_every == 0 && k != nsteps;
        if (store) traj.snapshots.push_back(NLSSnapshot{t, w});

        if (!std::isfinite(row.sup) || !std::isfinite(row.mass)) {
            traj.status = RunStatus::underresolved;
            traj.detected_time = t;
            break;
        }
        if (row.sup > opt.blowup_sup) {
            traj.status = RunStatus::blowup_detected;
            traj.detected_time = t;
            break;
        }
        const double drift = std::abs(row.mass - m0) / m_scale;
        if (drift > opt.drift_halt && row.sup < opt.grace_sup) {
            traj.status = RunStatus::underresolved;
            traj.detected_time = t;
            break;
        }
    }
    if (traj.snapshots.back().t != traj.rows.back().t) {
        traj.snapshots.push_back(NLSSnapshot{traj.rows.back().t, w});
    }
    return traj;
}

SolitonReport soliton_check(const GroundStateProfile& Qp, const Grid2D& g,
                            double T, double dt) {
    ComplexField2D w(g, Space::physical);
    const double amp = std::sqrt(8.0 / 3.0);
    for (int i = 0; i < g.n; ++i) {
        const double x1 = g.coord(i);
        for (int j = 0; j < g.n; ++j) {
            const double x2 = g.coord(j);
            const double r = std::hypot(x1, x2);
            w.at(i, j) = cplx(amp * Qp(std::sqrt(2.0) * r), 0.0);
        }
    }

    NLSStepper st(g, -1.0, dt);
    const std::size_t mid = g.n / 2;  // lattice point at the origin
    const double cell = g.h() * g.h();

    std::vector<double> mod0(g.n * g.n);
    double mass0 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        mod0[i] = std::abs(w.data()[i]);
        mass0 += mod0[i] * mod0[i];
    }
    mass0 *= cell;
    const double ref_l2 = std::sqrt(mass0);

    SolitonReport rep;
    rep.mass = mass0;
    double theta = std::arg(w.at(mid, mid));
    const double theta0 = theta;

    const long long nsteps = std::llround(T / dt);
    require(nsteps >= 1 && std::abs(static_cast<double>(nsteps) * dt - T) <=
                               1e-9 * std::max(1.0, T),
            "T must be an integer number of steps");
    const long long cadence = std::max(1LL, std::llround(0.05 / dt));
    for (long long k = 1; k <= nsteps; ++k) {
        st.step(w);
        // Unwrap the origin phase; samples are dense enough that each
        // increment is well inside (-pi, pi).
        const double raw = std::arg(w.at(mid, mid));
        double jump = raw - std::fmod(theta, 2.0 * pi);
        jump -= 2.0 * pi * std::round(jump / (2.0 * pi));
        theta += jump;
        if (k % cadence == 0 || k == nsteps) {
            double diff_sq = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double d = std::abs(w.data()[i]) - mod0[i];
                diff_sq += d * d;
            }
            rep.modulus_drift = std::max(
                rep.modulus_drift, std::sqrt(cell * diff_sq) / ref_l2);
        }
    }
    rep.phase_advance = theta - theta0;
    rep.phase_error = std::abs(rep.phase_advance - T);
    return rep;
}

ComplexField2D to_unit_coupling(const ComplexField2D& w) {
    ComplexField2D v = w;
    kernels::ops().scale_cplx(v.data(), std::sqrt(3.0 / 8.0), v.size());
    return v;
}

}  // namespace kg2d
