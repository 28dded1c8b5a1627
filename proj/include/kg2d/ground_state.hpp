#pragma once
/**
 * @file ground_state.hpp
 * @brief The positive radial ground state Q of Delta Q + Q^3 = Q, computed
 * by bisection shooting on Q(0) over the radial ODE, with the derived
 * constants (mass, energy, sharp Gagliardo-Nirenberg ratio) that act as the
 * variational thresholds for the focusing dynamics.
 */

#include <array>
#include <string>
#include <vector>

#include "kg2d/grid.hpp"

namespace kg2d {

/// Radial profile of the ground state on a uniform r-grid, with a natural
/// cubic spline evaluation rule.  All downstream thresholds read the
/// constants from here rather than hard-coding numbers.
class GroundStateProfile {
public:
    /// Builds the spline over uniform samples q[i] = Q(i * dr).
    GroundStateProfile(std::vector<double> q, double dr, double b,
                       double mass, double energy);

    /// Q(r), spline-interpolated; 0 beyond r_max (tail there is < 1e-10).
    double operator()(double r) const;

    double b() const { return b_; }              ///< Q(0), the shooting parameter
    double mass() const { return mass_; }        ///< M(Q) = 2 pi int Q^2 r dr
    double energy() const { return energy_; }    ///< E(Q), equals M(Q)/2 by Pohozaev
    double gn_constant() const { return 2.0 / mass_; }  ///< sharp ratio 2/M(Q)
    double dr() const { return dr_; }
    double r_max() const { return dr_ * static_cast<double>(q_.size() - 1); }
    /// Smallest sampled r with Q(r) < 1e-3; the sampling box must hold four
    /// of these radii.
    double decay_radius() const { return decay_radius_; }
    const std::vector<double>& samples() const { return q_; }

private:
    std::vector<double> q_;   // Q at r = i * dr
    std::vector<double> m2_;  // spline second derivatives at the nodes
    double dr_ = 0.0;
    double b_ = 0.0;
    double mass_ = 0.0;
    double energy_ = 0.0;
    double decay_radius_ = 0.0;
};

/// Bisection shooting for the separatrix between sign-crossing and
/// blow-down trajectories of Q'' + Q'/r = Q - Q^3, Q'(0) = 0.  `tol` bounds
/// the ODE residual of the returned samples (and sets the bisection width);
/// accepted range [1e-12, 1e-6].  The r-interval starts at 20 and extends
/// until Q(r_max) < 1e-10 via the Bessel-K0 far field.
GroundStateProfile solve_ground_state(double tol = 1e-9);

/// Sup norm of Q'' + Q'/r - Q + Q^3 reconstructed from the stored samples
/// by centered finite differences (independent of the integrator's own
/// derivative values).
double ode_residual_sup(const GroundStateProfile& Qp);

/// Samples Q(|x - center|) on the grid.  Errors when the box cannot hold
/// four decay radii around the center.
RealField2D sample_on_grid(const GroundStateProfile& Qp, const Grid2D& g,
                           std::array<double, 2> center = {0.0, 0.0});

/// The Gagliardo-Nirenberg functional ||f||_4^4 / (||f||_2^2 ||grad f||_2^2);
/// maximized by Q at the value 2/M(Q).  Rejects the zero field.
double gn_ratio(const RealField2D& f);

/// Newton iteration (inner MINRES solves) driving a near-stationary sample
/// to an equilibrium of the dealiased semidiscretization:
/// -Laplacian u + u + mu * dealias(u^3) = 0.  Starting time-marching tests
/// from the refined field isolates solver error from sampling error.
RealField2D refine_stationary(const RealField2D& seed, double mu,
                              double tol = 1e-12);

/// Persist the profile as CSV rows (r, Q) plus a JSON constants sidecar.
void save_profile(const GroundStateProfile& Qp, const std::string& csv_path,
                  const std::string& json_path);
/// Reload a profile saved by save_profile.
GroundStateProfile load_profile(const std::string& csv_path,
                                const std::string& json_path);

}  // namespace kg2d
