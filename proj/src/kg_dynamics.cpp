#include "kg2d/kg_dynamics.hpp"

#include <cmath>
#include <utility>

#include "kg2d/kernels.hpp"
#include "kg2d/symbols.hpp"
#include "kg2d/transform.hpp"

namespace kg2d {

KGState make_kg_state(RealField2D u, RealField2D ut, double t, double mu) {
    require(u.grid() == ut.grid(), "make_kg_state: u and ut must share a grid");
    require(mu == 1.0 || mu == -1.0, "make_kg_state: mu must be +1 or -1");
    return {std::move(u), std::move(ut), t, mu};
}

ComplexField2D to_first_order(const KGState& s) {
    ComplexField2D vhat = spectrum_of(s.u);
    const ComplexField2D uthat = spectrum_of(s.ut);
    const Grid2D& g = vhat.grid();
    for (int i = 0; i < g.n; ++i) {
        const double xi1 = g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            const double xi2 = g.freq(j);
            const double w = std::sqrt(1.0 + xi1 * xi1 + xi2 * xi2);
            vhat.at(i, j) += cplx{0.0, 1.0} * uthat.at(i, j) / w;
        }
    }
    inverse_transform(vhat);
    return vhat;
}

KGState from_first_order(const ComplexField2D& v, double t, double mu) {
    require(v.space() == Space::physical, "from_first_order: v must be physical");
    RealField2D u = real_part(v);
    RealField2D ut = apply_multiplier(bessel_power(1.0), imag_part(v));
    return make_kg_state(std::move(u), std::move(ut), t, mu);
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::blowup_detected: return "blowup_detected";
        case RunStatus::underresolved: return "underresolved";
    }
    return "unknown";
}

KGState Trajectory::final_state() const {
    require(!snapshots.empty(), "Trajectory::final_state: no snapshots stored");
    const Snapshot& s = snapshots.back();
    return {s.u, s.ut, s.t, mu};
}

double dealias_cutoff(const Grid2D& g) { return 0.5 * g.nyquist(); }

// ---- stepping engine ----------------------------------------------------------

KGStepper::KGStepper(const Grid2D& g, double mu, double dt) : grid_(g), mu_(mu), dt_(dt) {
    require(mu == 1.0 || mu == -1.0, "KGStepper: mu must be +1 or -1");
    const int n = g.n;
    const int hn = n / 2 + 1;
    half_ = static_cast<std::size_t>(n) * hn;
    cosw_.resize(half_);
    sinw_over_w_.resize(half_);
    w_sinw_.resize(half_);
    mask_.resize(half_);
    wq_plain_.resize(half_);
    wq_sobolev_.resize(half_);
    wq_p1_.resize(half_);
    wq_p2_.resize(half_);
    fu_.resize(half_);
    fut_.resize(half_);
    fcube_.resize(half_);
    cube_.resize(g.size());

    const double norm = 1.0 / (static_cast<double>(n) * n);  // r2c round trip
    const double cut = dealias_cutoff(g);
    const double l2 = g.box_length * g.box_length;
    // Parseval with the physical-coordinate convention: coefficients are the
    // raw half-spectrum divided by n^2, and ||f||_2^2 = L^2 sum |fhat|^2.
    const double parseval = l2 * norm * norm;
    for (int i = 0; i < n; ++i) {
        const double xi1 = g.freq(i);
        for (int j = 0; j < hn; ++j) {
            const double xi2 = g.dk() * j;  // packed axis holds xi2 >= 0
            const std::size_t k = static_cast<std::size_t>(i) * hn + j;
            const double w2 = 1.0 + xi1 * xi1 + xi2 * xi2;
            const double w = std::sqrt(w2);
            cosw_[k] = std::cos(dt * w) * norm;
            sinw_over_w_[k] = std::sin(dt * w) / w * norm;
            w_sinw_[k] = std::sin(dt * w) * w * norm;
            mask_[k] =
                (std::abs(xi1) <= cut && xi2 <= cut) ? norm : 0.0;
            // Hermitian double count: interior packed columns represent two
            // lattice modes, the j = 0 and j = n/2 columns only themselves.
            const double count = (j == 0 || j == n / 2) ? 1.0 : 2.0;
            wq_plain_[k] = 0.5 * count * parseval;
            wq_sobolev_[k] = 0.5 * count * parseval * w2;
            wq_p1_[k] = count * parseval * xi1;
            wq_p2_[k] = count * parseval * xi2;
        }
    }
}

void KGStepper::kick(RealField2D& u, RealField2D& ut, double dt_kick) {
    const auto& k = kernels::ops();
    k.cube(cube_.data(), u.data(), cube_.size());
    detail::raw_r2c(grid_.n, cube_.data(), fcube_.data());
    k.cmul_real(fcube_.data(), mask_.data(), half_);
    detail::raw_c2r(grid_.n, fcube_.data(), cube_.data());
    k.axpy(ut.data(), -mu_ * dt_kick, cube_.data(), cube_.size());
}

void KGStepper::rotate(RealField2D& u, RealField2D& ut) {
    const auto& k = kernels::ops();
    detail::raw_r2c(grid_.n, u.data(), fu_.data());
    detail::raw_r2c(grid_.n, ut.data(), fut_.data());
    k.rotate_pair(fu_.data(), fut_.data(), cosw_.data(), sinw_over_w_.data(), w_sinw_.data(),
                  half_);
    detail::raw_c2r(grid_.n, fu_.data(), u.data());
    detail::raw_c2r(grid_.n, fut_.data(), ut.data());
}

void KGStepper::step(RealField2D& u, RealField2D& ut) {
    kick(u, ut, 0.5 * dt_);
    rotate(u, ut);
    kick(u, ut, 0.5 * dt_);
}

DiagRow KGStepper::diagnostics(const RealField2D& u, const RealField2D& ut, double t) {
    const auto& k = kernels::ops();
    const double h2 = grid_.h() * grid_.h();

    DiagRow row;
    row.t = t;
    row.sup = k.max_abs(u.data(), u.size());
    row.mass = h2 * k.sum_sq(u.data(), u.size());
    row.quartic = h2 * k.sum_quartic(u.data(), u.size());

    detail::raw_r2c(grid_.n, u.data(), fu_.data());
    detail::raw_r2c(grid_.n, ut.data(), fut_.data());
    row.energy = k.weighted_sum_sq(fut_.data(), wq_plain_.data(), half_) +
                 k.weighted_sum_sq(fu_.data(), wq_sobolev_.data(), half_) +
                 0.25 * mu_ * row.quartic;
    // Momentum P_j = -int ut d_j u = L^2 sum xi_j Im[uhat conj(uthat)].
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t i = 0; i < half_; ++i) {
        const double im = std::imag(fu_[i] * std::conj(fut_[i]));
        p1 += wq_p1_[i] * im;
        p2 += wq_p2_[i] * im;
    }
    row.p1 = p1;
    row.p2 = p2;
    return row;
}

// ---- one-shot operations --------------------------------------------------------

KGState linear_flow(const KGState& s, double dt) {
    KGState out = s;
    if (dt != 0.0) {
        KGStepper st(s.u.grid(), s.mu, dt);
        st.rotate(out.u, out.ut);
    }
    out.t = s.t + dt;
    return out;
}

KGState nonlinear_kick(const KGState& s, double dt) {
    KGState out = s;
    if (dt != 0.0) {
        KGStepper st(s.u.grid(), s.mu, dt);
        st.kick(out.u, out.ut, dt);
    }
    return out;
}

KGState strang_step(const KGState& s, double dt) {
    KGState out = s;
    KGStepper st(s.u.grid(), s.mu, dt);
    st.step(out.u, out.ut);
    out.t = s.t + dt;
    return out;
}

// ---- evolve ---------------------------------------------------------------------

Trajectory evolve(const KGState& s, double t_end, double dt, const EvolveOptions& opt) {
    require(dt > 0.0, "evolve: dt must be positive");
    require(t_end > s.t, "evolve: t_end must exceed the state time");
    const double span = t_end - s.t;
    const long long nsteps = std::llround(span / dt);
    require(nsteps >= 1 && std::abs(nsteps * dt - span) <= 1e-9 * std::max(1.0, span),
            "evolve: (t_end - t) must be an integer number of steps");

    Trajectory traj;
    traj.dt = dt;
    traj.mu = s.mu;
    traj.rows.reserve(static_cast<std::size_t>(nsteps) + 1);

    KGStepper st(s.u.grid(), s.mu, dt);
    RealField2D u = s.u, ut = s.ut;

    traj.rows.push_back(st.diagnostics(u, ut, s.t));
    traj.snapshots.push_back({s.t, u, ut});
    const double e0 = traj.rows.front().energy;
    const double e_scale = std::max(std::abs(e0), 1e-30);

    for (long long k = 1; k <= nsteps; ++k) {
        st.step(u, ut);
        const double t = s.t + static_cast<double>(k) * dt;
        DiagRow row = st.diagnostics(u, ut, t);
        traj.rows.push_back(row);

        const bool finite = std::isfinite(row.sup) && std::isfinite(row.energy);
        const double drift = std::abs(row.energy - e0) / e_scale;
        RunStatus halt = RunStatus::completed;
        if (!finite) {
            halt = RunStatus::underresolved;
        } else if (row.sup > opt.blowup_sup) {
            halt = RunStatus::blowup_detected;
        } else if (drift > opt.drift_halt && row.sup < opt.grace_sup) {
            halt = RunStatus::underresolved;
        } else if (k == nsteps && drift > opt.drift_halt) {
            // Reached the horizon inside the grace region with the energy
            // budget blown: the run is not trustworthy, say so.
            halt = RunStatus::underresolved;
        }

        const bool is_last = (k == nsteps) || halt != RunStatus::completed;
        if ((opt.snapshot_every > 0 && k % opt.snapshot_every == 0) || is_last) {
            traj.snapshots.push_back({t, u, ut});
        }
        if (halt != RunStatus::completed) {
            traj.status = halt;
            traj.detected_time = t;
            break;
        }
    }
    return traj;
}

}  // namespace kg2d
