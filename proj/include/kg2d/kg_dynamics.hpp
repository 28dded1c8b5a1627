#pragma once
/**
 * @file kg_dynamics.hpp
 * @brief Time integration of u_tt - Laplacian u + u + mu u^3 = 0 by Strang
 * splitting: exact spectral rotation for the linear flow composed with the
 * exact pointwise kick of the split cubic vector field, dealiased by the
 * 1/2-rule for cubic products.  Both substeps are time-reversible and
 * preserve momentum, so the composition is clean second order.
 */

#include <cstddef>
#include <vector>

#include "kg2d/grid.hpp"

namespace kg2d {

/// State of the real second-order formulation.
struct KGState {
    RealField2D u;
    RealField2D ut;
    double t = 0.0;
    double mu = 1.0;  ///< +1 defocusing, -1 focusing
};

/// Validates grid agreement and mu in {+1, -1}.
KGState make_kg_state(RealField2D u, RealField2D ut, double t, double mu);

/// Complex view v = u + i <nabla>^{-1} u_t (physical representation).
ComplexField2D to_first_order(const KGState& s);
/// Inverse view: u = Re v, u_t = <nabla> Im v.
KGState from_first_order(const ComplexField2D& v, double t, double mu);

/// Per-step diagnostics.  `mass` is the virial monitor integral of u^2 (the
/// quantity whose concavity the blowup classification tracks); the
/// relativistic first-order mass lives in diagnostics::conserved.
struct DiagRow {
    double t = 0.0;
    double energy = 0.0;   ///< E = int 1/2 ut^2 + 1/2 |grad u|^2 + 1/2 u^2 + mu/4 u^4
    double mass = 0.0;     ///< int u^2
    double p1 = 0.0;       ///< momentum -int ut d1 u
    double p2 = 0.0;       ///< momentum -int ut d2 u
    double quartic = 0.0;  ///< ||u||_4^4
    double sup = 0.0;      ///< ||u||_inf
};

enum class RunStatus { completed, blowup_detected, underresolved };
const char* to_string(RunStatus s);

/// Stored field pair along a trajectory.
struct Snapshot {
    double t = 0.0;
    RealField2D u;
    RealField2D ut;
};

struct Trajectory {
    double dt = 0.0;
    double mu = 1.0;
    RunStatus status = RunStatus::completed;
    double detected_time = 0.0;     ///< halt time when status != completed
    std::vector<DiagRow> rows;      ///< one row per step, rows[0] = initial
    std::vector<Snapshot> snapshots;  ///< endpoints plus every snapshot_every steps

    double end_time() const { return rows.empty() ? 0.0 : rows.back().t; }
    KGState final_state() const;
};

struct EvolveOptions {
    int snapshot_every = 0;     ///< steps between stored fields; 0 = endpoints only
    double blowup_sup = 1e6;    ///< halt with blowup_detected above this ||u||_inf
    double drift_halt = 1e-2;   ///< halt with underresolved above this energy drift
    /// Energy drift is ignored once ||u||_inf exceeds this value: near a
    /// blowup the spike sharpens faster than any fixed grid can track, and
    /// halting on drift there would misreport a blowup as underresolved.
    double grace_sup = 1e4;
};

/// Exact spectral rotation (uhat, uthat) by angle dt*<xi> per mode.
KGState linear_flow(const KGState& s, double dt);
/// Exact flow of the split field: u fixed, ut -= mu * dt * dealias(u^3).
KGState nonlinear_kick(const KGState& s, double dt);
/// kick(dt/2) then linear(dt) then kick(dt/2).
KGState strang_step(const KGState& s, double dt);

/// March from s.t to t_end (an integer number of steps away) recording
/// diagnostics every step.  Halts early per EvolveOptions; a NaN field gives
/// status underresolved.  The returned trajectory always carries the last
/// computed state as its final snapshot.
Trajectory evolve(const KGState& s, double t_end, double dt, const EvolveOptions& opt = {});

/// Largest retained frequency of the cubic dealias rule: n dk / 4.
double dealias_cutoff(const Grid2D& g);

/// Reusable stepping engine: precomputed rotation tables, dealias mask, and
/// FFT scratch for one (grid, mu, dt) combination.  evolve() and the bridge
/// runs use this; the one-shot ops above delegate to a temporary instance.
class KGStepper {
public:
    KGStepper(const Grid2D& g, double mu, double dt);

    const Grid2D& grid() const { return grid_; }
    double dt() const { return dt_; }
    double mu() const { return mu_; }

    /// One Strang step in place.
    void step(RealField2D& u, RealField2D& ut);
    /// Half kick in place (exposed so evolve can report true step states
    /// while fusing adjacent half kicks is left to callers who don't).
    void kick(RealField2D& u, RealField2D& ut, double dt_kick);
    /// Exact linear rotation in place over this stepper's dt.
    void rotate(RealField2D& u, RealField2D& ut);
    /// Conserved-quantity and size diagnostics of a state.
    DiagRow diagnostics(const RealField2D& u, const RealField2D& ut, double t);

private:
    Grid2D grid_;
    double mu_ = 1.0, dt_ = 0.0;
    std::size_t half_ = 0;  // packed half-spectrum size n * (n/2 + 1)
    // Rotation tables (include the r2c round-trip normalization 1/n^2):
    AlignedVec<double> cosw_, sinw_over_w_, w_sinw_;
    AlignedVec<double> mask_;  // dealias mask, also carrying 1/n^2
    // Quadrature tables on the packed lattice (Hermitian double-count
    // weights and Parseval normalization baked in):
    AlignedVec<double> wq_plain_, wq_sobolev_, wq_p1_, wq_p2_;
    AlignedVec<cplx> fu_, fut_, fcube_;
    AlignedVec<double> cube_;
};

}  // namespace kg2d
