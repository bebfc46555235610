// transform.hpp - rigid pose transforms T_k with grid resampling.
//
// A PoseTransform maps a point p in the common reconstruction frame to
// q = R*p + t in the posed frame (rotation about the grid center, which is
// the coordinate origin).  Resampling keeps the output on the input grid;
// samples falling outside the domain read as 0.0 (air).
//
// Interpolation modes:
//   trilinear     - 8-neighbour interpolation, valid for any rigid map.
//   exact_lattice - rotation must be a signed permutation of the axes
//                   (multiples of 90 degrees) and the translation an integer
//                   number of voxels; the resample is then a bit-exact
//                   permutation of voxel indices.
#pragma once

#include <array>

#include "core/volume.hpp"

namespace mpf {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

enum class Interp { Trilinear, ExactLattice };

class PoseTransform {
  public:
    static PoseTransform identity();
    // R = Rz(rz) * Ry(ry) * Rx(rx), angles in radians.
    static PoseTransform from_euler(double rx, double ry, double rz,
                                    const Vec3& translation_mm, Interp interp);
    static PoseTransform from_axis_angle(const Vec3& axis, double angle,
                                         const Vec3& translation_mm, Interp interp);
    static PoseTransform from_matrix(const Mat3& rotation,
                                     const Vec3& translation_mm, Interp interp);

    PoseTransform inverse() const;
    // (a.compose(b))(p) == a(b(p))
    PoseTransform compose(const PoseTransform& inner) const;

    const Mat3& rotation() const { return rot_; }
    const Vec3& translation() const { return trans_; }
    Interp interp() const { return interp_; }
    bool is_identity() const;

  private:
    PoseTransform(const Mat3& r, const Vec3& t, Interp m);
    Mat3 rot_;
    Vec3 trans_;
    Interp interp_;
};

// Resample v onto its own grid under the posed->common sampling rule:
// output(q) = v(R^-1 (q - t)).
Volume apply_transform(const PoseTransform& t, const Volume& v);
// Approximate inverse: output(p) = v(R p + t).  Exact-lattice transforms
// invert bit-exactly; trilinear round trips are approximate.
Volume apply_inverse(const PoseTransform& t, const Volume& v);

// ||T v|| / ||v||.  Exact-lattice transforms that permute the grid onto
// itself return exactly 1.0.  Zero-norm input is an error.
double transform_norm_ratio(const PoseTransform& t, const Volume& v);

// Matrix/vector helpers shared with other modules.
Vec3 mat_apply(const Mat3& m, const Vec3& v);
Mat3 mat_mul(const Mat3& a, const Mat3& b);
Mat3 mat_transpose(const Mat3& m);

} // namespace mpf
