// projector.hpp - parallel-beam line-integral projector A and its adjoint.
//
// 3-D parallel beam is modeled as independent 2-D fans of parallel rays, one
// per detector row: every ray travels in an x-y plane at the fixed height of
// its row.  For view angle theta, detector column c and row r:
//   direction   d = (cos theta, sin theta, 0)
//   lateral     u = (-sin theta, cos theta, 0)
//   offset      s = (c - (n_cols-1)/2) * det_pitch
//   height      z = (r - (n_rows-1)/2) * det_pitch
//   ray(t)      = s*u + z*ez + t*d
// Line integrals use exact voxel intersection lengths (Siddon walk); the
// adjoint reuses identical weights, so <Ax,y> == <x,A^t y> to rounding.
#pragma once

#include <vector>

#include "core/volume.hpp"

namespace mpf {

struct ScanGeometry {
    int n_views = 0;
    std::vector<double> angles; // radians, strictly increasing, in [0, 2pi)
    int n_det_rows = 0;
    int n_det_cols = 0;
    double det_pitch = 0.0; // mm
    // beam: parallel (only supported value)

    std::size_t ray_count() const {
        return static_cast<std::size_t>(n_views) * n_det_rows * n_det_cols;
    }
    std::size_t ray_index(int view, int row, int col) const {
        return (static_cast<std::size_t>(view) * n_det_rows + row) * n_det_cols + col;
    }
    // Evenly spaced views over [start, start+range).
    static std::vector<double> even_angles(int n_views, double start, double range);
    void validate() const;
};

struct Sinogram {
    ScanGeometry geom;
    std::vector<double> values;  // line integrals, mm^-1 * mm
    std::vector<double> weights; // diagonal of Lambda, >= 0

    Sinogram() = default;
    explicit Sinogram(ScanGeometry g)
        : geom(std::move(g)), values(geom.ray_count(), 0.0),
          weights(geom.ray_count(), 1.0) {}
    void validate() const;
};

Sinogram project(const ScanGeometry& g, const Volume& v);
Volume backproject(const Sinogram& s, const GridSpec& grid);
// A^t Lambda A v; ray_weights == nullptr means Lambda = I.  Computed literally
// as backproject(weighted(project(v))) so the unit-weight case matches the
// composition bit-exactly.
Volume gram_apply(const ScanGeometry& g, const Volume& v,
                  const std::vector<double>* ray_weights = nullptr);

// Transmission-weighted Lambda heuristic: exp(-y) clamped to [1e-4, 1].
std::vector<double> transmission_weights(const std::vector<double>& line_integrals);

} // namespace mpf
