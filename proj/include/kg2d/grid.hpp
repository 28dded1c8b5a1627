#pragma once
/**
 * @file grid.hpp
 * @brief Periodic square grid and the field containers that live on it.
 *
 * Physical samples sit at x_j = -L/2 + j*h, h = L/n, j = 0..n-1 (both axes).
 * Spectral coefficients use the frequency lattice xi = dk * s, dk = 2*pi/L,
 * with signed index s = j for j < n/2 and s = j - n for j >= n/2 (FFT order).
 * A field in spectral space stores true Fourier coefficients with respect to
 * the physical coordinates: f(x) = sum_k fhat_k exp(i xi_k . x), so the
 * zero mode is the mean of the samples.
 */

#include <cstdint>

#include "kg2d/common.hpp"

namespace kg2d {

struct Grid2D {
    int n = 0;                ///< points per axis (power of two, 8..4096)
    double box_length = 0.0;  ///< L; the box is [-L/2, L/2)^2

    static Grid2D make(int n, double box_length);

    double h() const { return box_length / n; }
    double dk() const { return 2.0 * pi / box_length; }
    double nyquist() const { return pi * n / box_length; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }

    int signed_index(int i) const { return i < n / 2 ? i : i - n; }
    double freq(int i) const { return dk() * signed_index(i); }
    double coord(int i) const { return -0.5 * box_length + h() * i; }

    bool operator==(const Grid2D& o) const {
        return n == o.n && box_length == o.box_length;
    }
};

enum class Space { physical, spectral };

/// Complex scalar field; carries which representation the samples are in.
class ComplexField2D {
public:
    ComplexField2D() = default;
    ComplexField2D(const Grid2D& g, Space s)
        : grid_(g), space_(s), data_(g.size(), cplx{0.0, 0.0}) {}

    const Grid2D& grid() const { return grid_; }
    Space space() const { return space_; }
    void set_space(Space s) { space_ = s; }

    cplx& at(int i, int j) { return data_[static_cast<std::size_t>(i) * grid_.n + j]; }
    const cplx& at(int i, int j) const { return data_[static_cast<std::size_t>(i) * grid_.n + j]; }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }
    AlignedVec<cplx>& raw() { return data_; }
    const AlignedVec<cplx>& raw() const { return data_; }

private:
    Grid2D grid_;
    Space space_ = Space::physical;
    AlignedVec<cplx> data_;
};

/// Real scalar field (physical samples).
class RealField2D {
public:
    RealField2D() = default;
    explicit RealField2D(const Grid2D& g) : grid_(g), data_(g.size(), 0.0) {}

    const Grid2D& grid() const { return grid_; }

    double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * grid_.n + j]; }
    const double& at(int i, int j) const { return data_[static_cast<std::size_t>(i) * grid_.n + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }
    AlignedVec<double>& raw() { return data_; }
    const AlignedVec<double>& raw() const { return data_; }

private:
    Grid2D grid_;
    AlignedVec<double> data_;
};

/// Promote real samples to a complex physical field.
ComplexField2D to_complex(const RealField2D& f);
/// Pointwise real part (field must be physical).
RealField2D real_part(const ComplexField2D& f);
/// Pointwise imaginary part (field must be physical).
RealField2D imag_part(const ComplexField2D& f);

/// Fraction of the squared L2 mass in the outer 10% frame of the box
/// (points with max(|x1|,|x2|) > 0.9 * L/2).  Health metric.
double boundary_mass_fraction(const RealField2D& f);
double boundary_mass_fraction(const ComplexField2D& f);

}  // namespace kg2d
