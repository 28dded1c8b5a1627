#pragma once
/**
 * @file symbols.hpp
 * @brief Fourier multipliers and the operators built from them: Bessel
 * powers <xi>^s, dyadic (Littlewood-Paley) band projections, angular tube
 * projections, translations, and the free Klein-Gordon and Schrodinger
 * propagators.
 *
 * All operators here are diagonal in frequency: they scale the coefficient
 * at lattice frequency xi by a scalar symbol m(xi).
 */

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "kg2d/grid.hpp"

namespace kg2d {

/// A diagonal Fourier multiplier: acts on a field by scaling the spectral
/// coefficient at xi by rule(xi1, xi2).  Hermitian-symmetric rules
/// (m(-xi) = conj m(xi)) map real fields to real fields.
class MultiplierSymbol {
public:
    using Rule = std::function<cplx(double, double)>;

    MultiplierSymbol(std::string tag, Rule rule);

    const std::string& tag() const { return tag_; }
    cplx operator()(double xi1, double xi2) const { return rule_(xi1, xi2); }

    /// Largest |m| over the frequency lattice of g.
    double lattice_bound(const Grid2D& g) const;
    /// True when m(-xi) == conj m(xi) at every lattice frequency of g whose
    /// negative is also on the lattice (checked to 1e-12).
    bool hermitian_on(const Grid2D& g) const;

private:
    std::string tag_;
    Rule rule_;
};

/// Scale every spectral coefficient of f by m(xi).  Physical input is
/// transformed, scaled, and transformed back; spectral input stays spectral.
ComplexField2D apply_multiplier(const MultiplierSymbol& m, const ComplexField2D& f);
/// Real-field version.  Errors if the symbol does not map real fields to
/// real fields (checked on the output, which also catches Nyquist-row
/// asymmetries the lattice test cannot see).
RealField2D apply_multiplier(const MultiplierSymbol& m, const RealField2D& f);

// ---- scalar cutoff profiles -------------------------------------------------

/// Radial cutoff: 1 for r <= 1, 0 for r >= 2, smooth (C-infinity) on the
/// octave between, with radial_cutoff(1 + t) + radial_cutoff(2 - t) == 1.
double radial_cutoff(double r);
/// Angular bump in sector units: 1 on |u| <= 0.4, supported in |u| <= 0.6,
/// and sum_k angular_bump(u - k) == 1 exactly for every u.
double angular_bump(double u);

// ---- named symbols ----------------------------------------------------------

/// <xi>^s = (1 + |xi|^2)^(s/2).
MultiplierSymbol bessel_power(double s);
/// Low-pass radial_cutoff(|xi| / cutoff); cutoff > 0.
MultiplierSymbol lowpass_symbol(double cutoff);
/// Dyadic band: radial_cutoff(|xi|) at N = 1, else
/// radial_cutoff(|xi|/N) - radial_cutoff(2|xi|/N).
MultiplierSymbol dyadic_symbol(double N);
/// Phase e^{-i y.xi} implementing f -> f(. - y).
MultiplierSymbol translation_symbol(const std::array<double, 2>& y);
/// Phase e^{-it<xi>} of the half-Klein-Gordon group.
MultiplierSymbol kg_phase_symbol(double t);
/// Phase e^{-it|xi|^2/2} of the Schrodinger group e^{it Laplacian / 2}.
MultiplierSymbol schrodinger_phase_symbol(double t);

/// One angular sector of a dyadic band.  Level N = 1 has the single sector
/// k = 0 covering the whole unit ball; level N >= 2 has 20N sectors.
struct TubeIndex {
    double N = 1.0;  ///< dyadic level >= 1
    int k = 0;       ///< sector index, 0 <= k < 20N

    /// Sector center: the origin at N = 1; radius 3N/4 at angle
    /// 2 pi k / (20 N) for N >= 2.
    std::array<double, 2> center() const;
};
/// Sector symbol: the dyadic band symbol times the angular bump at sector k
/// (periodic in the angle).  Summing over k at fixed N recovers the band.
MultiplierSymbol tube_symbol(const TubeIndex& t);

// ---- projections and propagators --------------------------------------------

/// Dyadic band projection P_N f; N must be a power of two >= 1.
ComplexField2D littlewood_paley(double N, const ComplexField2D& f);
RealField2D littlewood_paley(double N, const RealField2D& f);

/// Angular-sector restriction of the level-N band of f.
ComplexField2D tube_projection(const TubeIndex& t, const ComplexField2D& f);

/// Number of sectors at level N: 1 at N = 1, else 20N.
int tube_count(double N);

/// Dyadic levels 1, 2, 4, ... up to the first level whose band symbol is
/// identically 1 over the whole lattice tail, so that summing
/// littlewood_paley over these levels reconstructs any grid field.
std::vector<double> resolved_dyadic_levels(const Grid2D& g);

/// f(. - y).
ComplexField2D translate(const std::array<double, 2>& y, const ComplexField2D& f);
RealField2D translate(const std::array<double, 2>& y, const RealField2D& f);

/// Half-Klein-Gordon group e^{-it<nabla>}.
ComplexField2D free_propagate_kg(double t, const ComplexField2D& f);
/// Schrodinger group e^{it Laplacian / 2}.
ComplexField2D free_propagate_schrodinger(double t, const ComplexField2D& f);

}  // namespace kg2d
