#pragma once
/**
 * @file diagnostics.hpp
 * @brief Conserved quantities, variational thresholds, virial and
 * center-of-energy monitors, the blowup dichotomy bookkeeping, the
 * stress-energy tensor, and the nonlinear boost of a stored spacetime
 * solution to a moving frame's time-zero slice.
 */

#include <array>
#include <vector>

#include "kg2d/boost_ops.hpp"
#include "kg2d/grid.hpp"
#include "kg2d/ground_state.hpp"
#include "kg2d/kg_dynamics.hpp"

namespace kg2d {

/// Energy, momentum, and mass of a state, with the relativistic
/// combination E^2 - |P|^2 that frame changes preserve.
struct ConservedRecord {
    double energy = 0.0;        ///< E = int 1/2 ut^2 + 1/2 |grad u|^2 + 1/2 u^2 + mu/4 u^4
    double mass = 0.0;          ///< M = int u^2
    std::array<double, 2> p{};  ///< P = -int ut grad u
    double rest_mass_sq = 0.0;  ///< E^2 - |P|^2
};

ConservedRecord conserved(const KGState& s);

/// Time-trapezoid of ||u(t)||_4^4 over [t_lo, t_hi] (must lie within the
/// trajectory and land on diagnostic rows).
double scattering_size(const Trajectory& traj, double t_lo, double t_hi);

/// d^2/dt^2 of int u^2 in the focusing-specific printed form
/// 2 int (ut^2 - |grad u|^2 - u^2 + u^4); requires mu = -1.
double virial_rate(const KGState& s);
/// Sign-general form 2 int (ut^2 - |grad u|^2 - u^2 - mu u^4), valid for
/// both signs (reduces to virial_rate when mu = -1).
double virial_rate_general(const KGState& s);

enum class Prediction { global_existence, blowup, outside_theory };
const char* to_string(Prediction p);

/// Threshold flags against the ground-state constants plus the finite-
/// horizon observation (filled in by the experiment driver).
struct DichotomyVerdict {
    bool below_energy = false;  ///< E < E(Q)
    bool below_mass = false;    ///< int u(0)^2 < M(Q)
    bool above_mass = false;    ///< int u(0)^2 > M(Q)
    Prediction prediction = Prediction::outside_theory;
    RunStatus observed = RunStatus::completed;
    bool agreement = false;
};

/// Pure threshold comparison of the initial state against the profile
/// constants; `observed`/`agreement` are left for the runner.
DichotomyVerdict classify_dichotomy(const KGState& s, const GroundStateProfile& Qp);

struct ConcavityReport {
    enum class Result { confirmed, violated, skipped };
    Result result = Result::skipped;
    int violations = 0;  ///< interior sampled times with nonnegative second difference
    int interior = 0;    ///< number of interior sampled times examined
    double sample_dt = 0.0;
};

/// Checks that M(t)^{-1/2} has strictly negative second differences at the
/// cadence sample_dt over the rows before detection.  Applicable only to
/// predicted-blowup focusing runs; otherwise returns skipped.  Step-level
/// differencing would sit at roundoff scale, hence the coarser cadence.
ConcavityReport concavity_monitor(const Trajectory& traj, Prediction pred,
                                  double sample_dt = 0.05);

/// The exact orbit of an equilibrium state as a stored trajectory
/// (identical snapshots at uniform spacing).  Lets frame-change tests work
/// with a statically known solution without re-deriving it from the
/// integrator, whose fidelity is tested separately.
Trajectory static_trajectory(const KGState& s, double t_lo, double t_hi,
                             double dt_snap);

/// Evaluates the solution recorded in `traj` on the time-zero slice of the
/// frame moving with velocity nu: u_new(y) = u(L(t,x)) with per-point
/// spacetime interpolation, spectral in space and cubic Hermite in time
/// using the stored u_t and the analytic u_tt = Lap u - u - mu u^3.
/// Requires the trajectory to span |t| >= (|nu|/<nu>) (box half-width) plus
/// a snapshot spacing, and spatially localized data.
KGState boost_spacetime(const Trajectory& traj, const BoostParams& nu);

/// The unique boost bringing the state to its rest frame:
/// nu = -P / sqrt(E^2 - |P|^2).  Errors when |P| >= E.
BoostParams zero_momentum_boost(const ConservedRecord& c);

/// Max relative spread of E^2 - |P|^2 across the trajectory's snapshot
/// times and across the time-zero slices of the given boosts.
double einstein_invariance(const Trajectory& traj,
                           const std::vector<BoostParams>& nus);

/// Stress-energy components of a state (symmetric 3x3 on (t, x1, x2)).
struct StressEnergy {
    RealField2D t00, t01, t02, t11, t12, t22;
};
StressEnergy stress_energy(const KGState& s);

/// || d_t T^{alpha 0} + d_j T^{alpha j} ||_2 for alpha = 0, 1, 2, with
/// spectral space-derivatives and a central time-difference across the
/// snapshots k-1, k, k+1 of a uniformly spaced trajectory.
std::array<double, 3> stress_divergence_residual(const Trajectory& traj,
                                                 std::size_t k);

/// One sample of the localized center of energy and the truncated virial.
struct CenterVirialRow {
    double t = 0.0;
    std::array<double, 2> x{};  ///< X_R = int x phi(|x|/R) e_u dx
    double z = 0.0;             ///< Z_R = -int phi(|x|/R) ut (x . grad u) - (1 - eps) int ut u
};

/// Evaluates X_R and Z_R at every stored snapshot.  The cutoff phi is the
/// module-fixed C^2 bump: 1 on r <= 1, 0 on r >= 2.
std::vector<CenterVirialRow> center_and_virial(const Trajectory& traj,
                                               double R, double eps);

/// The flux integral equal to dX_R/dt for zero-momentum solutions:
/// int (1 - phi) ut grad u - int x phi'(|x|/R) / (|x| R) ut (x . grad u).
std::array<double, 2> center_flux(const KGState& s, double R);

}  // namespace kg2d
