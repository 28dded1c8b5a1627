#pragma once
/**
 * @file boost_ops.hpp
 * @brief Lorentz boosts acting on initial data, spatial dilations, and the
 * boost/translation commutation relations.
 *
 * Frequency-side boost: with tilde-xi = l_nu(xi) = xi_perp + <nu> xi_par
 * - nu <xi>, the boosted data g satisfies
 *     ghat(tilde-xi) = <xi> <tilde-xi>^{-1} fhat(xi),
 * an H^{1/2} isometry.  On the grid this needs fhat at off-lattice points;
 * we use exact semidiscrete trigonometric interpolation where affordable
 * (axis-aligned nu at any size, general nu up to n = 128) and a tensor
 * cubic-spline fallback above that.  Spectral content whose image leaves
 * the resolved frequency square is dropped, with a warning when the dropped
 * mass is non-negligible.
 */

#include <array>

#include "kg2d/grid.hpp"

namespace kg2d {

/// Boost parameter nu in frequency units; the physical velocity is
/// nu / <nu> with <nu> = sqrt(1 + |nu|^2), always subluminal.
struct BoostParams {
    std::array<double, 2> nu{0.0, 0.0};

    double gamma() const;                    ///< <nu>
    std::array<double, 2> velocity() const;  ///< nu / <nu>
    BoostParams negated() const { return {{-nu[0], -nu[1]}}; }
};

/// l_nu(xi) = xi_perp + <nu> xi_par - nu <xi>.  The inverse map is
/// lorentz_map with negated parameters: l_{-nu}(l_nu(xi)) = xi.
std::array<double, 2> lorentz_map(const BoostParams& nu, const std::array<double, 2>& xi);

/// L_nu on spacetime (t, x1, x2), row-major:
/// t' = <nu> t - nu.x,  x' = x_perp + <nu> x_par - nu t.  Determinant one.
std::array<std::array<double, 3>, 3> lorentz_matrix(const BoostParams& nu);

/// Matrix-vector action on a spacetime point (t, x1, x2).
std::array<double, 3> lorentz_apply(const std::array<std::array<double, 3>, 3>& m,
                                    const std::array<double, 3>& point);

enum class BoostDirection {
    forward,  ///< source frequency l_{+nu}(tilde-xi)
    inverse   ///< source frequency l_{-nu}(tilde-xi); this is the data boost
              ///< whose output travels with velocity -nu/<nu>
};

/// Boost the data f.  Warns when the input spectrum is not resolved (mass
/// fraction above 0.75 Nyquist exceeds 1e-8) or when boosted content exits
/// the frequency square.  Output is in the same representation as the input.
ComplexField2D boost_data(const BoostParams& nu, const ComplexField2D& f, BoostDirection dir);

/// D_lambda f = lambda^{-1} f(x / lambda), lambda >= 1; an L^2 isometry.
/// Evaluated exactly from the spectrum (chirp synthesis, O(n^3)).  Warns
/// when the dilated field leaks into the outer frame of the box.
ComplexField2D dilate(double lambda, const ComplexField2D& f);
RealField2D dilate(double lambda, const RealField2D& f);

/// Both sides of the identity
///   Boost_nu^{-1} T_y e^{i tau <nabla>} = T_{y~} e^{i tau~ <nabla>} Boost_nu^{-1}
/// with (tau~, y~) = L_nu(tau, y), applied to a test field.
struct CommutationReport {
    double tau_tilde = 0.0;
    std::array<double, 2> y_tilde{0.0, 0.0};
    double discrepancy = 0.0;  ///< relative L^2 gap between the two sides
};

CommutationReport commutation_check(const BoostParams& nu, const std::array<double, 2>& y,
                                    double tau, const ComplexField2D& test_field);
/// Same, on a built-in smooth compact-spectrum Gaussian test field.
CommutationReport commutation_check(const BoostParams& nu, const std::array<double, 2>& y,
                                    double tau);

}  // namespace kg2d
