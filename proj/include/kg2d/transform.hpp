#pragma once
/**
 * @file transform.hpp
 * @brief FFT between physical and spectral representations, plus norms.
 *
 * Conventions (see grid.hpp): the forward transform divides by n^2 and
 * applies the phase that refers coefficients to physical coordinates, so
 * fhat_k = n^-2 sum_j f_j exp(-i xi_k . x_j) and the zero mode is the mean.
 * Parseval then reads ||f||_2 = L * sqrt(sum |fhat|^2), which is what the
 * norm routines use.  inverse(forward(f)) == f to machine precision.
 */

#include "kg2d/grid.hpp"

namespace kg2d {

/// In-place physical -> spectral. Errors if the field is already spectral.
void forward_transform(ComplexField2D& f);
/// In-place spectral -> physical. Errors if the field is already physical.
void inverse_transform(ComplexField2D& f);

/// Copying variants.
ComplexField2D forward_copy(const ComplexField2D& f);
ComplexField2D inverse_copy(const ComplexField2D& f);
/// Spectral coefficients of a real field (promotes, transforms).
ComplexField2D spectrum_of(const RealField2D& f);

/// L^p norm, p in {2, 4} or p = 0 meaning L^infinity (sup of |f|).
/// Physical fields: ((L/n)^(2/p) * sum |f|^p)^(1/p).  Spectral fields admit
/// p = 2 only (via Parseval).
double lp_norm(const RealField2D& f, int p);
double lp_norm(const ComplexField2D& f, int p);

/// Sobolev norm H^s, s in [-2, 4]: L * sqrt(sum <xi>^(2s) |fhat|^2).
double sobolev_norm(const RealField2D& f, double s);
double sobolev_norm(const ComplexField2D& f, double s);

/// Fraction of squared spectral mass above 0.75 * Nyquist (in |xi|_inf).
/// Health metric for marginal resolution.
double spectral_tail_fraction(const ComplexField2D& f);
double spectral_tail_fraction(const RealField2D& f);

namespace detail {
/// Unnormalized in-place c2c DFT on a raw buffer (FFTW order), used by
/// internal fast paths. sign = -1 forward, +1 backward.
void raw_c2c(int n, cplx* data, int sign);
/// Unnormalized r2c / c2r between an n*n real buffer and an n*(n/2+1)
/// packed half-spectrum.  c2r destroys the input spectrum (FFTW semantics),
/// so callers pass a scratch copy when they need to keep it.
void raw_r2c(int n, const double* in, cplx* out);
void raw_c2r(int n, cplx* in, double* out);
}  // namespace detail

}  // namespace kg2d
