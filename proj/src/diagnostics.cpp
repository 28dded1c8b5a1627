#include "kg2d/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kg2d/kernels.hpp"
#include "kg2d/transform.hpp"

namespace kg2d {
namespace {

// Spectral spatial derivative; the unpaired Nyquist line is zeroed so the
// result stays exactly real-representable.
RealField2D spatial_derivative(const RealField2D& f, int axis) {
    const Grid2D g = f.grid();
    ComplexField2D spec = spectrum_of(f);
    const std::size_t n = g.n;
    for (std::size_t i = 0; i < n; ++i) {
        const double k1 = g.freq(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double k2 = g.freq(j);
            const double k = axis == 0 ? k1 : k2;
            const bool nyq = (axis == 0 ? i : j) == n / 2;
            spec.at(i, j) *= nyq ? cplx(0.0, 0.0) : cplx(0.0, k);
        }
    }
    inverse_transform(spec);
    return real_part(spec);
}

double quartic_integral(const RealField2D& f) {
    const Grid2D g = f.grid();
    return g.h() * g.h() * kernels::ops().sum_quartic(f.data(), f.size());
}

double sq_integral(const RealField2D& f) {
    const Grid2D g = f.grid();
    return g.h() * g.h() * kernels::ops().sum_sq(f.data(), f.size());
}

// phi(s): 1 on s <= 1, 0 on s >= 2, C^2 monotone in between.
double bump(double s) { return smoothstep(2.0 - s); }
// d phi / d s.
double bump_deriv(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    const double t = 2.0 - s;
    return -30.0 * t * t * (1.0 - t) * (1.0 - t);
}

double snapshot_spacing(const Trajectory& traj) {
    require(traj.snapshots.size() >= 2, "trajectory needs at least two snapshots");
    const double delta = traj.snapshots[1].t - traj.snapshots[0].t;
    require(delta > 0.0, "snapshots must advance in time");
    for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
        const double gap = traj.snapshots[k].t - traj.snapshots[k - 1].t;
        require(std::abs(gap - delta) <= 1e-9 * std::max(1.0, std::abs(delta)),
                "snapshots must be uniformly spaced");
    }
    return delta;
}

}  // namespace

ConservedRecord conserved(const KGState& s) {
    const Grid2D g = s.u.grid();
    const ComplexField2D fu = spectrum_of(s.u);
    const ComplexField2D fut = spectrum_of(s.ut);
    const double parseval = g.box_length * g.box_length;
    const std::size_t n = g.n;

    double kin = 0.0, sob = 0.0, mass = 0.0, p1 = 0.0, p2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k1 = g.freq(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double k2 = g.freq(j);
            const double w2 = 1.0 + k1 * k1 + k2 * k2;
            const cplx a = fu.at(i, j);
            const cplx b = fut.at(i, j);
            const double na = std::norm(a), nb = std::norm(b);
            kin += nb;
            sob += w2 * na;
            mass += na;
            const double cross = std::imag(a * std::conj(b));
            p1 += k1 * cross;
            p2 += k2 * cross;
        }
    }
    ConservedRecord rec;
    rec.energy = 0.5 * parseval * (kin + sob) +
                 0.25 * s.mu * quartic_integral(s.u);
    rec.mass = parseval * mass;
    rec.p = {parseval * p1, parseval * p2};
    rec.rest_mass_sq =
        rec.energy * rec.energy - rec.p[0] * rec.p[0] - rec.p[1] * rec.p[1];
    return rec;
}

double scattering_size(const Trajectory& traj, double t_lo, double t_hi) {
    require(!traj.rows.empty(), "trajectory has no diagnostic rows");
    require(t_lo < t_hi, "interval must be nonempty");
    const double t0 = traj.rows.front().t;
    const double dt = traj.dt;
    require(dt > 0.0, "trajectory carries no step size");
    auto row_index = [&](double t) {
        const double k = (t - t0) / dt;
        const long long ki = std::llround(k);
        require(ki >= 0 && ki < static_cast<long long>(traj.rows.size()) &&
                    std::abs(k - static_cast<double>(ki)) <= 1e-6,
                "interval endpoints must land on diagnostic rows");
        return static_cast<std::size_t>(ki);
    };
    const std::size_t lo = row_index(t_lo), hi = row_index(t_hi);
    double sum = 0.5 * (traj.rows[lo].quartic + traj.rows[hi].quartic);
    for (std::size_t k = lo + 1; k < hi; ++k) sum += traj.rows[k].quartic;
    return dt * sum;
}

double virial_rate(const KGState& s) {
    require(s.mu == -1.0, "the printed virial-rate form is focusing-specific");
    return virial_rate_general(s);
}

double virial_rate_general(const KGState& s) {
    const double kin = sq_integral(s.ut);
    const double mass = sq_integral(s.u);
    const double quartic = quartic_integral(s.u);
    const double l2 = lp_norm(s.u, 2);
    const double h1 = sobolev_norm(s.u, 1.0);
    const double grad_sq = std::max(h1 * h1 - l2 * l2, 0.0);
    return 2.0 * (kin - grad_sq - mass - s.mu * quartic);
}

const char* to_string(Prediction p) {
    switch (p) {
        case Prediction::global_existence: return "global";
        case Prediction::blowup: return "blowup";
        case Prediction::outside_theory: return "outside-theory";
    }
    return "?";
}

DichotomyVerdict classify_dichotomy(const KGState& s, const GroundStateProfile& Qp) {
    require(s.mu == -1.0, "the dichotomy thresholds are focusing statements");
    DichotomyVerdict v;
    const double e = conserved(s).energy;
    const double m0 = sq_integral(s.u);
    v.below_energy = e < Qp.energy();
    v.below_mass = m0 < Qp.mass();
    v.above_mass = m0 > Qp.mass();
    if (v.below_energy && v.below_mass) {
        v.prediction = Prediction::global_existence;
    } else if (v.below_energy && v.above_mass) {
        v.prediction = Prediction::blowup;
    } else {
        v.prediction = Prediction::outside_theory;
    }
    return v;
}

ConcavityReport concavity_monitor(const Trajectory& traj, Prediction pred,
                                  double sample_dt) {
    ConcavityReport rep;
    rep.sample_dt = sample_dt;
    if (pred != Prediction::blowup || traj.mu != -1.0) return rep;  // skipped
    require(traj.dt > 0.0 && sample_dt > 0.0, "positive step sizes required");
    const long long stride = std::llround(sample_dt / traj.dt);
    require(stride >= 1 && std::abs(static_cast<double>(stride) * traj.dt -
                                    sample_dt) <= 1e-9,
            "sample cadence must be a multiple of the step size");
    std::vector<double> f;
    for (std::size_t k = 0; k < traj.rows.size();
         k += static_cast<std::size_t>(stride)) {
        const double m = traj.rows[k].mass;
        require(m > 0.0, "mass must stay positive for the concavity monitor");
        f.push_back(1.0 / std::sqrt(m));
    }
    if (f.size() < 3) return rep;  // skipped: nothing interior to examine
    rep.interior = static_cast<int>(f.size()) - 2;
    for (std::size_t k = 1; k + 1 < f.size(); ++k) {
        if (f[k + 1] - 2.0 * f[k] + f[k - 1] >= 0.0) ++rep.violations;
    }
    rep.result = rep.violations == 0 ? ConcavityReport::Result::confirmed
                                     : ConcavityReport::Result::violated;
    return rep;
}

Trajectory static_trajectory(const KGState& s, double t_lo, double t_hi,
                             double dt_snap) {
    require(dt_snap > 0.0 && t_hi > t_lo, "static trajectory wants t_lo < t_hi");
    const long long m = std::llround((t_hi - t_lo) / dt_snap);
    require(m >= 1 && std::abs(static_cast<double>(m) * dt_snap - (t_hi - t_lo)) <=
                          1e-9 * std::max(1.0, t_hi - t_lo),
            "span must be an integer number of snapshot spacings");
    Trajectory traj;
    traj.dt = dt_snap;
    traj.mu = s.mu;
    traj.status = RunStatus::completed;
    KGStepper diag(s.u.grid(), s.mu, dt_snap);
    for (long long k = 0; k <= m; ++k) {
        const double t = t_lo + static_cast<double>(k) * dt_snap;
        traj.rows.push_back(diag.diagnostics(s.u, s.ut, t));
        traj.snapshots.push_back(Snapshot{t, s.u, s.ut});
    }
    return traj;
}

// ---------------------------------------------------------------------------
// boost_spacetime
// ---------------------------------------------------------------------------

namespace {

// Full spectra of one snapshot: u, u_t, and the analytic
// u_tt = Lap u - u - mu u^3 (raw cube; aliasing here is far below the
// Hermite interpolation error).
struct NodeSpectra {
    ComplexField2D fu, fut, futt;
};

NodeSpectra make_node(const Snapshot& snap, double mu) {
    const Grid2D g = snap.u.grid();
    NodeSpectra node{spectrum_of(snap.u), spectrum_of(snap.ut),
                     ComplexField2D(g, Space::spectral)};
    RealField2D cube(g);
    kernels::ops().cube(cube.data(), snap.u.data(), cube.size());
    const ComplexField2D fcube = spectrum_of(cube);
    const std::size_t n = g.n;
    for (std::size_t i = 0; i < n; ++i) {
        const double k1 = g.freq(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double k2 = g.freq(j);
            node.futt.at(i, j) = -(1.0 + k1 * k1 + k2 * k2) * node.fu.at(i, j) -
                                 mu * fcube.at(i, j);
        }
    }
    return node;
}

struct HermiteWeights {
    std::size_t k = 0;  // left node
    double h00 = 0.0, h10 = 0.0, h01 = 0.0, h11 = 0.0;  // h1x carry the spacing
};

HermiteWeights hermite_at(double t, double t0, double delta, std::size_t m) {
    const double kf = (t - t0) / delta;
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

class NodeCache {
public:
    NodeCache(const Trajectory& traj, double mu) : traj_(traj), mu_(mu) {}

    const NodeSpectra& get(std::size_t k) {
        auto it = cache_.find(k);
        if (it == cache_.end()) {
            it = cache_.emplace(k, make_node(traj_.snapshots[k], mu_)).first;
        }
        return it->second;
    }

    // Drops every cached node outside {k, k+1}; the axis sweep visits the
    // nodes monotonically so this caps memory at two spectra triples.
    void retain_pair(std::size_t k) {
        for (auto it = cache_.begin(); it != cache_.end();) {
            it = (it->first == k || it->first == k + 1) ? std::next(it)
                                                        : cache_.erase(it);
        }
    }

private:
    const Trajectory& traj_;
    double mu_;
    std::map<std::size_t, NodeSpectra> cache_;
};

}  // namespace

KGState boost_spacetime(const Trajectory& traj, const BoostParams& nu) {
    require(!traj.snapshots.empty(), "trajectory holds no snapshots");
    const Grid2D g = traj.snapshots.front().u.grid();
    const double nn = std::hypot(nu.nu[0], nu.nu[1]);

    if (nn == 0.0) {
        for (const Snapshot& snap : traj.snapshots) {
            if (std::abs(snap.t) <= 1e-12) {
                return KGState{snap.u, snap.ut, 0.0, traj.mu};
            }
        }
        fail("boost with nu = 0 wants a stored snapshot at t = 0");
    }

    const double delta = snapshot_spacing(traj);
    const double gnu = nu.gamma();
    const double need = nn / gnu * (0.5 * g.box_length) + delta;
    const double t_first = traj.snapshots.front().t;
    const double t_last = traj.snapshots.back().t;
    require(t_first <= -need + 1e-12 && t_last >= need - 1e-12,
            "trajectory span too short for this boost");

    // Localization: the slice assumes the solution vanishes near the box
    // edge for every needed time; check the middle snapshot as the witness.
    const std::size_t mid_snap = traj.snapshots.size() / 2;
    if (boundary_mass_fraction(traj.snapshots[mid_snap].u) > 1e-6) {
        warn("boost_spacetime: data is not localized; slice values near the "
             "fold-in boundary are unreliable");
    }

    const std::size_t n = g.n;
    const std::size_t m = traj.snapshots.size();
    const double t0 = t_first;
    const double half_box = 0.5 * g.box_length;
    NodeCache cache(traj, traj.mu);
    RealField2D u_out(g);
    RealField2D ut_out(g);

    const int axis = nu.nu[1] == 0.0 ? 0 : (nu.nu[0] == 0.0 ? 1 : -1);
    if (axis >= 0) {
        const double nu_axis = nu.nu[axis];
        // Cross-direction evaluation matrix e^{i xi_b y_b} (square grid, so
        // it serves both axis orientations).
        std::vector<cplx> ecross(n * n);
        for (std::size_t jb = 0; jb < n; ++jb) {
            for (std::size_t kb = 0; kb < n; ++kb) {
                ecross[jb * n + kb] = std::polar(1.0, g.freq(kb) * g.coord(jb));
            }
        }
        std::vector<cplx> acc_u(n), acc_d(n), acc_t(n), phase(n);
        for (std::size_t a = 0; a < n; ++a) {
            const double y_along = g.coord(a);
            const double t = -nu_axis * y_along;
            const double x_along = gnu * y_along;
            if (std::abs(x_along) > half_box) {
                for (std::size_t jb = 0; jb < n; ++jb) {
                    (axis == 0 ? u_out.at(a, jb) : u_out.at(jb, a)) = 0.0;
                    (axis == 0 ? ut_out.at(a, jb) : ut_out.at(jb, a)) = 0.0;
                }
                continue;
            }
            const HermiteWeights w = hermite_at(t, t0, delta, m);
            cache.retain_pair(w.k);
            const NodeSpectra& n0 = cache.get(w.k);
            const NodeSpectra& n1 = cache.get(w.k + 1);
            for (std::size_t ka = 0; ka < n; ++ka) {
                phase[ka] = std::polar(1.0, g.freq(ka) * x_along);
            }
            std::fill(acc_u.begin(), acc_u.end(), cplx(0.0, 0.0));
            std::fill(acc_d.begin(), acc_d.end(), cplx(0.0, 0.0));
            std::fill(acc_t.begin(), acc_t.end(), cplx(0.0, 0.0));
            for (std::size_t ka = 0; ka < n; ++ka) {
                const cplx ph = phase[ka];
                const cplx dfac = cplx(0.0, g.freq(ka)) * ph;
                for (std::size_t kb = 0; kb < n; ++kb) {
                    const std::size_t i = axis == 0 ? ka : kb;
                    const std::size_t j = axis == 0 ? kb : ka;
                    const cplx us = w.h00 * n0.fu.at(i, j) + w.h10 * n0.fut.at(i, j) +
                                    w.h01 * n1.fu.at(i, j) + w.h11 * n1.fut.at(i, j);
                    const cplx uts = w.h00 * n0.fut.at(i, j) + w.h10 * n0.futt.at(i, j) +
                                     w.h01 * n1.fut.at(i, j) + w.h11 * n1.futt.at(i, j);
                    acc_u[kb] += us * ph;
                    acc_d[kb] += us * dfac;
                    acc_t[kb] += uts * ph;
                }
            }
            for (std::size_t kb = 0; kb < n; ++kb) {
                acc_t[kb] = gnu * acc_t[kb] - nu_axis * acc_d[kb];
            }
            for (std::size_t jb = 0; jb < n; ++jb) {
                cplx su(0.0, 0.0), st(0.0, 0.0);
                const cplx* row = &ecross[jb * n];
                for (std::size_t kb = 0; kb < n; ++kb) {
                    su += acc_u[kb] * row[kb];
                    st += acc_t[kb] * row[kb];
                }
                (axis == 0 ? u_out.at(a, jb) : u_out.at(jb, a)) = su.real();
                (axis == 0 ? ut_out.at(a, jb) : ut_out.at(jb, a)) = st.real();
            }
        }
        return KGState{std::move(u_out), std::move(ut_out), 0.0, traj.mu};
    }

    // General direction: per-point brackets and spectral sums, O(n^4).
    require(n <= 128,
            "general-direction boost_spacetime is O(n^4); use n <= 128 or an "
            "axis-aligned velocity");
    const std::array<double, 2> nh = {nu.nu[0] / nn, nu.nu[1] / nn};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::array<double, 2> y = {g.coord(i), g.coord(j)};
            const double t = -(nu.nu[0] * y[0] + nu.nu[1] * y[1]);
            const double ydot = y[0] * nh[0] + y[1] * nh[1];
            const std::array<double, 2> x = {y[0] + (gnu - 1.0) * ydot * nh[0],
                                             y[1] + (gnu - 1.0) * ydot * nh[1]};
            if (std::abs(x[0]) > half_box || std::abs(x[1]) > half_box) {
                u_out.at(i, j) = 0.0;
                ut_out.at(i, j) = 0.0;
                continue;
            }
            const HermiteWeights w = hermite_at(t, t0, delta, m);
            const NodeSpectra& n0 = cache.get(w.k);
            const NodeSpectra& n1 = cache.get(w.k + 1);
            cplx su(0.0, 0.0), sd1(0.0, 0.0), sd2(0.0, 0.0), st(0.0, 0.0);
            for (std::size_t ki = 0; ki < n; ++ki) {
                const double k1 = g.freq(ki);
                const cplx ph1 = std::polar(1.0, k1 * x[0]);
                for (std::size_t kj = 0; kj < n; ++kj) {
                    const double k2 = g.freq(kj);
                    const cplx ph = ph1 * std::polar(1.0, k2 * x[1]);
                    const cplx us = w.h00 * n0.fu.at(ki, kj) + w.h10 * n0.fut.at(ki, kj) +
                                    w.h01 * n1.fu.at(ki, kj) + w.h11 * n1.fut.at(ki, kj);
                    const cplx uts = w.h00 * n0.fut.at(ki, kj) +
                                     w.h10 * n0.futt.at(ki, kj) +
                                     w.h01 * n1.fut.at(ki, kj) +
                                     w.h11 * n1.futt.at(ki, kj);
                    su += us * ph;
                    sd1 += us * cplx(0.0, k1) * ph;
                    sd2 += us * cplx(0.0, k2) * ph;
                    st += uts * ph;
                }
            }
            u_out.at(i, j) = su.real();
            ut_out.at(i, j) =
                (gnu * st - nu.nu[0] * sd1 - nu.nu[1] * sd2).real();
        }
    }
    return KGState{std::move(u_out), std::move(ut_out), 0.0, traj.mu};
}

BoostParams zero_momentum_boost(const ConservedRecord& c) {
    const double p_sq = c.p[0] * c.p[0] + c.p[1] * c.p[1];
    require(p_sq < c.energy * c.energy,
            "zero-momentum boost infeasible: |P| >= E");
    const double denom = std::sqrt(c.energy * c.energy - p_sq);
    return BoostParams{{-c.p[0] / denom, -c.p[1] / denom}};
}

double einstein_invariance(const Trajectory& traj,
                           const std::vector<BoostParams>& nus) {
    std::vector<double> values;
    for (const Snapshot& snap : traj.snapshots) {
        values.push_back(
            conserved(KGState{snap.u, snap.ut, snap.t, traj.mu}).rest_mass_sq);
    }
    for (const BoostParams& nu : nus) {
        values.push_back(conserved(boost_spacetime(traj, nu)).rest_mass_sq);
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    return (*hi - *lo) / std::max(std::abs(mean), 1e-300);
}

StressEnergy stress_energy(const KGState& s) {
    const Grid2D g = s.u.grid();
    const RealField2D d1 = spatial_derivative(s.u, 0);
    const RealField2D d2 = spatial_derivative(s.u, 1);
    StressEnergy se{RealField2D(g), RealField2D(g),
                    RealField2D(g), RealField2D(g),
                    RealField2D(g), RealField2D(g)};
    const std::size_t total = g.n * g.n;
    for (std::size_t k = 0; k < total; ++k) {
        const double u = s.u.data()[k];
        const double ut = s.ut.data()[k];
        const double g1 = d1.data()[k], g2 = d2.data()[k];
        const double u2 = u * u;
        const double t00 = 0.5 * (ut * ut + g1 * g1 + g2 * g2 + u2) +
                           0.25 * s.mu * u2 * u2;
        const double pressure = t00 - ut * ut;
        se.t00.data()[k] = t00;
        se.t01.data()[k] = -ut * g1;
        se.t02.data()[k] = -ut * g2;
        se.t11.data()[k] = g1 * g1 - pressure;
        se.t12.data()[k] = g1 * g2;
        se.t22.data()[k] = g2 * g2 - pressure;
    }
    return se;
}

std::array<double, 3> stress_divergence_residual(const Trajectory& traj,
                                                 std::size_t k) {
    require(k >= 1 && k + 1 < traj.snapshots.size(),
            "need snapshots on both sides of k");
    const double delta = snapshot_spacing(traj);
    auto state_at = [&](std::size_t idx) {
        const Snapshot& s = traj.snapshots[idx];
        return KGState{s.u, s.ut, s.t, traj.mu};
    };
    const StressEnergy lo = stress_energy(state_at(k - 1));
    const StressEnergy mi = stress_energy(state_at(k));
    const StressEnergy hi = stress_energy(state_at(k + 1));

    const Grid2D g = traj.snapshots[k].u.grid();
    std::array<double, 3> out{};
    const std::array<std::array<const RealField2D StressEnergy::*, 3>, 3> comp = {{
        {&StressEnergy::t00, &StressEnergy::t01, &StressEnergy::t02},
        {&StressEnergy::t01, &StressEnergy::t11, &StressEnergy::t12},
        {&StressEnergy::t02, &StressEnergy::t12, &StressEnergy::t22},
    }};
    for (int alpha = 0; alpha < 3; ++alpha) {
        const RealField2D& time_lo = lo.*(comp[alpha][0]);
        const RealField2D& time_hi = hi.*(comp[alpha][0]);
        const RealField2D dx1 = spatial_derivative(mi.*(comp[alpha][1]), 0);
        const RealField2D dx2 = spatial_derivative(mi.*(comp[alpha][2]), 1);
        RealField2D resid(g);
        for (std::size_t idx = 0; idx < resid.size(); ++idx) {
            resid.data()[idx] =
                (time_hi.data()[idx] - time_lo.data()[idx]) / (2.0 * delta) +
                dx1.data()[idx] + dx2.data()[idx];
        }
        out[alpha] = lp_norm(resid, 2);
    }
    return out;
}

std::vector<CenterVirialRow> center_and_virial(const Trajectory& traj,
                                               double R, double eps) {
    require(R > 0.0, "cutoff radius must be positive");
    std::vector<CenterVirialRow> rows;
    for (const Snapshot& snap : traj.snapshots) {
        const Grid2D g = snap.u.grid();
        const RealField2D d1 = spatial_derivative(snap.u, 0);
        const RealField2D d2 = spatial_derivative(snap.u, 1);
        const double cell = g.h() * g.h();
        CenterVirialRow row;
        row.t = snap.t;
        double x1 = 0.0, x2 = 0.0, zphi = 0.0, zlin = 0.0;
        for (int i = 0; i < g.n; ++i) {
            const double y1 = g.coord(i);
            for (int j = 0; j < g.n; ++j) {
                const double y2 = g.coord(j);
                const std::size_t k =
                    static_cast<std::size_t>(i) * g.n + j;
                const double u = snap.u.data()[k];
                const double ut = snap.ut.data()[k];
                const double g1 = d1.data()[k], g2 = d2.data()[k];
                const double phi = bump(std::hypot(y1, y2) / R);
                const double eu = 0.5 * (u * u + g1 * g1 + g2 * g2 + ut * ut) +
                                  0.25 * traj.mu * u * u * u * u;
                x1 += y1 * phi * eu;
                x2 += y2 * phi * eu;
                zphi += phi * ut * (y1 * g1 + y2 * g2);
                zlin += ut * u;
            }
        }
        row.x = {cell * x1, cell * x2};
        row.z = -cell * zphi - (1.0 - eps) * cell * zlin;
        rows.push_back(row);
    }
    return rows;
}

std::array<double, 2> center_flux(const KGState& s, double R) {
    require(R > 0.0, "cutoff radius must be positive");
    const Grid2D g = s.u.grid();
    const RealField2D d1 = spatial_derivative(s.u, 0);
    const RealField2D d2 = spatial_derivative(s.u, 1);
    const double cell = g.h() * g.h();
    double f1 = 0.0, f2 = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double y1 = g.coord(i);
        for (int j = 0; j < g.n; ++j) {
            const double y2 = g.coord(j);
            const std::size_t k = static_cast<std::size_t>(i) * g.n + j;
            const double ut = s.ut.data()[k];
            const double g1 = d1.data()[k], g2 = d2.data()[k];
            const double r = std::hypot(y1, y2);
            const double phi = bump(r / R);
            const double radial = y1 * g1 + y2 * g2;
            f1 += (1.0 - phi) * ut * g1;
            f2 += (1.0 - phi) * ut * g2;
            if (r > 0.0) {
                const double dphi = bump_deriv(r / R) / (r * R);
                f1 -= y1 * dphi * ut * radial;
                f2 -= y2 * dphi * ut * radial;
            }
        }
    }
    return {cell * f1, cell * f2};
}

}  // namespace kg2d
