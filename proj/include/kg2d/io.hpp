#pragma once
/**
 * @file io.hpp
 * @brief KGF1 binary field snapshots with JSON metadata sidecars.
 *
 * File layout (little-endian throughout):
 *   bytes 0..3   magic "KGF1"
 *   u32          n          (grid points per side)
 *   f64          L          (box length)
 *   f64          t          (field time)
 *   u8           kind       (0 = real, 1 = complex)
 *   payload      n^2 f64 values (real) or 2 n^2 (complex, re/im
 *                interleaved), row-major
 *
 * A sidecar `<name>.meta.json` next to each snapshot records the content
 * tag, mu where applicable, and basic diagnostics.  Round trips are
 * bit-exact: payloads are the raw IEEE-754 bytes of the field.
 */

#include <string>

#include "kg2d/grid.hpp"
#include "kg2d/kg_dynamics.hpp"

namespace kg2d {

/// What a loaded KGF1 file contained.
struct LoadedField {
    RealField2D real;       ///< filled when complex_valued is false
    ComplexField2D cplx;    ///< filled when complex_valued is true
    bool complex_valued = false;
    double t = 0.0;
};

/// Writes one physical-space field (kind 0).  The sidecar records the
/// content tag and the field's L2 norm.
void save_field(const RealField2D& f, double t, const std::string& path);
/// Writes one physical-space complex field (kind 1).
void save_field(const ComplexField2D& f, double t, const std::string& path);

/// Reads any KGF1 file.  Errors on bad magic, truncation, or an n outside
/// the supported grid range.
LoadedField load_field(const std::string& path);
/// As above but additionally errors when the stored grid differs from the
/// expected one.
LoadedField load_field(const std::string& path, const Grid2D& expect);

/// Writes a full state as one complex snapshot with re = u, im = u_t
/// (bit-exact, no transform involved); the sidecar records mu, the content
/// tag "kg-state", and conserved-quantity diagnostics.
void save_snapshot(const KGState& s, const std::string& path);

/// Reloads a state written by save_snapshot.  Requires the complex kind,
/// the "kg-state" sidecar tag, and a mu entry in the sidecar.
KGState load_snapshot(const std::string& path);
KGState load_snapshot(const std::string& path, const Grid2D& expect);

/// Sidecar path of a snapshot: `<stem>.meta.json` (the `.kgf1` extension,
/// when present, is replaced).
std::string meta_path_for(const std::string& path);

}  // namespace kg2d
