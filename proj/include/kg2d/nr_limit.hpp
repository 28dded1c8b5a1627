#pragma once
/**
 * @file nr_limit.hpp
 * @brief The nonrelativistic bridge: concentrating wave-packet data, lifts
 * of slow Schrodinger solutions to Klein-Gordon approximants, the residual
 * error terms of the lift, forced linear corrections, and a convergence
 * sweep that measures how the approximation improves as the concentration
 * scale lambda grows.
 *
 * Bookkeeping: the Schrodinger solution w runs on slow time s in [-T, T]
 * on a small box; the KG side runs on fast time t = lambda^2 s.  The lift
 *   tilde-v(t) = e^{-it} (D_lambda w)(t / lambda^2)
 * approximates the first-order field v = u + i <nabla>^{-1} u_t.
 */

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kg2d/boost_ops.hpp"
#include "kg2d/grid.hpp"
#include "kg2d/kg_dynamics.hpp"
#include "kg2d/nls_dynamics.hpp"

namespace kg2d {

/// Parameters of the concentrating data family
///   packet = T_{x0} e^{i t0 <nabla>} Boost_nu D_lambda P_{<= lambda^theta} phi.
struct WavePacketParams {
    double lambda = 1.0;                 ///< concentration scale, >= 1
    BoostParams nu{};                    ///< frame parameter; must be 0 when lambda = 1
    double t0 = 0.0;                     ///< free-flow time offset
    std::array<double, 2> x0{0.0, 0.0};  ///< translation
    double theta = 0.01;                 ///< low-pass exponent (fixed by convention)
    ComplexField2D profile;              ///< phi, physical space
};

/// A built packet plus the concentration center in the moving-frame
/// coordinates, (t~, x~) = L_nu(t0, x0).
struct WavePacket {
    ComplexField2D data;
    double t_center = 0.0;
    std::array<double, 2> x_center{0.0, 0.0};
};

/// Composes low-pass, dilation, data boost, free half-KG flow, and
/// translation (right to left as written above) on the profile.
WavePacket build_wave_packet(const WavePacketParams& p, const Grid2D& g);

/// Runs the slow cubic Schrodinger equation both directions from phi and
/// returns one trajectory covering [-T, T] with snapshots every node_dt
/// (the Hermite node cadence of NLSLift).
NLSTrajectory slow_window_run(const ComplexField2D& phi, double mu, double T,
                              double dts, double node_dt);

/// Evaluator of the lift.  Holds spectral Hermite nodes (w, w_t) of the
/// slow solution -- w_t reconstructed from the equation at each node --
/// and produces the dilated envelope W(t) = D_lambda w(t/lambda^2) on a
/// fast grid by exact semidiscrete interpolation of the slow field.
class NLSLift {
public:
    /// w_traj must cover [-T, T] with uniformly spaced snapshots.
    NLSLift(const NLSTrajectory& w_traj, double lambda, double T);
    ~NLSLift();
    NLSLift(NLSLift&&) noexcept;

    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    double slow_window() const { return T_; }
    double fast_window() const { return T_ * lambda_ * lambda_; }
    const Grid2D& slow_grid() const { return slow_; }

    /// w(s) on the slow grid (cubic Hermite between nodes; exact at nodes).
    ComplexField2D slow_at(double s) const;
    /// W(t) on the fast grid; |t| must lie within the fast window.
    ComplexField2D envelope(double t_fast, const Grid2D& fast) const;
    /// tilde-v(t) = e^{-it} W(t) inside the window; outside, the free
    /// half-KG flow continues from the nearer window edge.
    ComplexField2D value(double t_fast, const Grid2D& fast) const;
    /// (u, u_t) data of the lift: u = Re v, u_t = <nabla> Im v.
    KGState state(double t_fast, const Grid2D& fast) const;

private:
    struct SynthTable;
    void hermite_spectrum(double s, ComplexField2D& out) const;
    const SynthTable& table_for(const Grid2D& fast) const;

    double lambda_ = 1.0, T_ = 0.0, mu_ = 1.0;
    double s0_ = 0.0, node_dt_ = 0.0;
    Grid2D slow_;
    std::vector<ComplexField2D> wn_, wdn_;  // spectral nodes of w and w_t
    mutable std::unique_ptr<SynthTable> table_;
};

/// Window norms of the four residual terms of the lift and of the forced
/// corrections, plus the true-solution discrepancies filled in by the
/// convergence sweep.
struct ErrorBudget {
    double e1 = 0.0;  ///< L^1_t H^{1/2}: relativistic symbol mismatch term
    double e2 = 0.0;  ///< L^{4/3}_{t,x} with <nabla> weight: resonant-cube weight mismatch
    double e3 = 0.0;  ///< same norm: triple-oscillation cube term
    double e4 = 0.0;  ///< same norm: conjugate-oscillation cube term
    double f3 = 0.0;  ///< sup_t H^{1/2} of the e3 correction
    double f4 = 0.0;  ///< sup_t H^{1/2} of the e4 correction
    double discrepancy_l4 = 0.0;   ///< |v_true - v_corrected| in L^4_{t,x}
    double discrepancy_h12 = 0.0;  ///< and in sup_t H^{1/2}
};

/// Quadrature of the four residual terms over the middle window
/// |t| <= lambda^2 T at the given fast-time cadence.  Correction and
/// discrepancy fields are left zero.
ErrorBudget error_terms(const NLSLift& lift, const Grid2D& fast,
                        double sample_dt = 0.25);

/// Forced corrections f_j solving (-i d_t + <nabla>) f_j = e_j, f_j(0) = 0,
/// advanced by exact-flow Duhamel with midpoint forcing at step dt_kg.
/// The envelope spectra feeding the forcing are refreshed every refresh_dt
/// fast units (the envelope varies on the slow scale; the fast oscillation
/// is carried exactly by scalar phases).
struct CorrectionRun {
    ComplexField2D f3_end, f4_end;  ///< corrections at t_hi, physical space
    double f3_h12 = 0.0, f4_h12 = 0.0;  ///< sup_t H^{1/2} over [t_lo, t_hi]
    double f3_l4 = 0.0, f4_l4 = 0.0;    ///< L^4_{t,x} over [t_lo, t_hi]
};
CorrectionRun forced_corrections(const NLSLift& lift, const Grid2D& fast,
                                 double t_lo, double t_hi, double dt_kg,
                                 double sample_dt = 0.25,
                                 double refresh_dt = 0.5);

/// The corrected approximant tilde-v(t) - f3(t) - f4(t) at one fast time
/// (corrections marched internally from 0).
ComplexField2D corrected_lift(const NLSLift& lift, const Grid2D& fast,
                              double t_fast, double dt_kg,
                              double refresh_dt = 0.5);

/// Resolution plan for one sweep point.
struct SweepPoint {
    double lambda = 4.0;
    int n_fast = 128;
    double box_fast = 32.0;
    double dt_kg = 0.01;
};

struct SweepPlan {
    std::vector<SweepPoint> points;
    double T = 0.5;          ///< slow half-window
    double mu = 1.0;
    int n_slow = 128;
    double box_slow = 16.0;
    double dt_nls = 5e-4;
    double node_dt = 5e-3;   ///< slow Hermite node cadence
    double sample_dt = 0.25; ///< fast-time comparison cadence
    double refresh_dt = 0.5; ///< Duhamel forcing refresh cadence
    BoostParams nu{};        ///< when nonzero: also compare a mid-window slice through the data boost
    double t0_slow = 0.0;    ///< packet free-flow offset in slow units (t0 = t0_slow lambda^2)
    std::array<double, 2> x0{0.0, 0.0};
    int threads = 1;
    double fast_horizon_cap = 1e4;  ///< skip points whose fast horizon exceeds this
    int n_cap = 512;                ///< skip points needing more than this resolution
    double mass_q = 0.0;            ///< ground-state mass, required for focusing runs
};

/// The calibrated default plan: lambda = 4, 8, 16 with step sizes chosen so
/// the integrator error stays below each point's expected discrepancy.
SweepPlan default_sweep_plan();

struct SweepRow {
    double lambda = 0.0;
    bool skipped = false;
    std::string note;
    RunStatus status = RunStatus::completed;
    ErrorBudget budget;  ///< error terms, corrections, corrected discrepancies
    double disc_l4_uncorrected = 0.0;
    double disc_h12_uncorrected = 0.0;
    double sup_h12_true = 0.0;  ///< sup_t H^{1/2} of the true field (uniform-bound check)
    double l4_true = 0.0;       ///< L^4_{t,x} of the true field over the window
    double disc_h12_midslice = 0.0;  ///< one mid-window slice, plain comparison
    double disc_h12_boosted = 0.0;   ///< the same slice compared through the data boost
};

struct SweepReport {
    std::vector<SweepRow> rows;
    bool monotone_l4 = false;   ///< strict decrease of discrepancy_l4 over completed rows
    bool monotone_h12 = false;
    std::string caveat;
};

/// For each plan point: builds the packet from phi (sampled on both grids),
/// evolves the true equation across the middle window in both directions,
/// marches the corrections alongside, and measures the discrepancy between
/// the true first-order field and the corrected lift.
SweepReport convergence_sweep(const std::function<cplx(double, double)>& phi,
                              const SweepPlan& plan);

void write_sweep_csv(const SweepReport& rep, const std::string& path);
void write_sweep_json(const SweepReport& rep, const std::string& path);

}  // namespace kg2d
