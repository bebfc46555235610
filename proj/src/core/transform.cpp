#include "core/transform.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace mpf {

namespace {

constexpr double kOrthoTol = 1e-9;   // orthonormality of R
constexpr double kDetTol = 1e-12;    // determinant +1
constexpr double kLatticeTol = 1e-9; // snapping to signed permutations / integers

double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

void check_rotation(const Mat3& r, Interp interp) {
    // R^T R == I within tolerance.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += r[k][i] * r[k][j];
            double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(s - want) > kOrthoTol)
                fail(ErrorCode::InvalidTransform, "rotation is not orthonormal");
        }
    }
    if (std::abs(det3(r) - 1.0) > kDetTol)
        fail(ErrorCode::InvalidTransform, "rotation determinant is not +1");
    if (interp == Interp::ExactLattice) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = r[i][j];
                if (std::abs(v) > kLatticeTol && std::abs(std::abs(v) - 1.0) > kLatticeTol)
                    fail(ErrorCode::InvalidTransform,
                         "exact-lattice transform requires a signed axis permutation "
                         "(rotation angles must be multiples of 90 degrees)");
            }
    }
}

} // namespace

PoseTransform::PoseTransform(const Mat3& r, const Vec3& t, Interp m)
    : rot_(r), trans_(t), interp_(m) {
    check_rotation(rot_, interp_);
    for (double c : trans_)
        if (!std::isfinite(c))
            fail(ErrorCode::InvalidTransform, "translation is not finite");
}

PoseTransform PoseTransform::identity() {
    return PoseTransform({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, {0, 0, 0},
                         Interp::ExactLattice);
}

PoseTransform PoseTransform::from_euler(double rx, double ry, double rz,
                                        const Vec3& t, Interp interp) {
    const double cx = std::cos(rx), sx = std::sin(rx);
    const double cy = std::cos(ry), sy = std::sin(ry);
    const double cz = std::cos(rz), sz = std::sin(rz);
    Mat3 mx = {{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
    Mat3 my = {{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
    Mat3 mz = {{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
    return PoseTransform(mat_mul(mz, mat_mul(my, mx)), t, interp);
}

PoseTransform PoseTransform::from_axis_angle(const Vec3& axis, double angle,
                                             const Vec3& t, Interp interp) {
    double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (!(n > 0.0))
        fail(ErrorCode::InvalidTransform, "axis-angle rotation needs a nonzero axis");
    const double ux = axis[0] / n, uy = axis[1] / n, uz = axis[2] / n;
    const double c = std::cos(angle), s = std::sin(angle), t1 = 1.0 - c;
    Mat3 r = {{{c + ux * ux * t1, ux * uy * t1 - uz * s, ux * uz * t1 + uy * s},
               {uy * ux * t1 + uz * s, c + uy * uy * t1, uy * uz * t1 - ux * s},
               {uz * ux * t1 - uy * s, uz * uy * t1 + ux * s, c + uz * uz * t1}}};
    return PoseTransform(r, t, interp);
}

PoseTransform PoseTransform::from_matrix(const Mat3& r, const Vec3& t, Interp interp) {
    return PoseTransform(r, t, interp);
}

PoseTransform PoseTransform::inverse() const {
    Mat3 rt = mat_transpose(rot_);
    Vec3 ti = mat_apply(rt, trans_);
    return PoseTransform(rt, {-ti[0], -ti[1], -ti[2]}, interp_);
}

PoseTransform PoseTransform::compose(const PoseTransform& inner) const {
    Mat3 r = mat_mul(rot_, inner.rot_);
    Vec3 t = mat_apply(rot_, inner.trans_);
    Interp m = (interp_ == Interp::ExactLattice && inner.interp_ == Interp::ExactLattice)
                   ? Interp::ExactLattice
                   : Interp::Trilinear;
    return PoseTransform(r, {t[0] + trans_[0], t[1] + trans_[1], t[2] + trans_[2]}, m);
}

bool PoseTransform::is_identity() const {
    for (int i = 0; i < 3; ++i) {
        if (trans_[i] != 0.0)
            return false;
        for (int j = 0; j < 3; ++j)
            if (rot_[i][j] != (i == j ? 1.0 : 0.0))
                return false;
    }
    return true;
}

Vec3 mat_apply(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += a[i][k] * b[k][j];
            out[i][j] = s;
        }
    return out;
}

Mat3 mat_transpose(const Mat3& m) {
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out[i][j] = m[j][i];
    return out;
}

namespace {

// Affine map from output voxel index to continuous input index:
// u = A*i + d per axis.  Valid lattice maps have A a signed permutation and
// d integral.
struct LatticeMap {
    std::array<std::array<long long, 3>, 3> a;
    std::array<long long, 3> d;
};

// Continuous input index of output index i under sample point p = M*q + b.
static std::array<double, 3> continuous_index(const GridSpec& g, const Mat3& m,
                                              const Vec3& b, const Vec3& i) {
    Vec3 q;
    for (int ax = 0; ax < 3; ++ax)
        q[ax] = (i[ax] + 0.5 - 0.5 * g.dims[ax]) * g.spacing[ax];
    Vec3 p = mat_apply(m, q);
    std::array<double, 3> u;
    for (int ax = 0; ax < 3; ++ax)
        u[ax] = (p[ax] + b[ax]) / g.spacing[ax] + 0.5 * g.dims[ax] - 0.5;
    return u;
}

static LatticeMap lattice_map(const GridSpec& g, const Mat3& m, const Vec3& b) {
    LatticeMap lm{};
    auto u0 = continuous_index(g, m, b, {0, 0, 0});
    std::array<std::array<double, 3>, 3> cols;
    for (int c = 0; c < 3; ++c) {
        Vec3 e{0, 0, 0};
        e[c] = 1.0;
        auto uc = continuous_index(g, m, b, e);
        for (int r = 0; r < 3; ++r)
            cols[c][r] = uc[r] - u0[r];
    }
    for (int r = 0; r < 3; ++r) {
        double dr = u0[r];
        double drr = std::round(dr);
        if (std::abs(dr - drr) > kLatticeTol)
            fail(ErrorCode::InvalidTransform,
                 "exact-lattice transform requires integer voxel offsets "
                 "(offset " + std::to_string(dr) + " on axis " + std::to_string(r) + ")");
        lm.d[r] = static_cast<long long>(drr);
        for (int c = 0; c < 3; ++c) {
            double a = cols[c][r];
            double ar = std::round(a);
            if (std::abs(a - ar) > kLatticeTol || std::abs(ar) > 1.0)
                fail(ErrorCode::InvalidTransform,
                     "exact-lattice transform incompatible with grid spacing");
            lm.a[r][c] = static_cast<long long>(ar);
        }
    }
    return lm;
}

// Does the lattice map send the index box bijectively onto itself?
static bool lattice_bijective(const GridSpec& g, const LatticeMap& lm) {
    for (int r = 0; r < 3; ++r) {
        long long lo = lm.d[r], hi = lm.d[r];
        for (int c = 0; c < 3; ++c) {
            long long span = lm.a[r][c] * (g.dims[c] - 1);
            if (span > 0)
                hi += span;
            else
                lo += span;
        }
        if (lo != 0 || hi != g.dims[r] - 1)
            return false;
    }
    return true;
}

static Volume resample(const Volume& v, const Mat3& m, const Vec3& b, Interp interp) {
    v.validate("resample input");
    const GridSpec& g = v.grid;
    Volume out(g);
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];

    if (interp == Interp::ExactLattice) {
        LatticeMap lm = lattice_map(g, m, b);
#pragma omp parallel for
        for (int z = 0; z < nz; ++z) {
            for (int y = 0; y < ny; ++y)
                for (int x = 0; x < nx; ++x) {
                    long long ix = lm.a[0][0] * x + lm.a[0][1] * y + lm.a[0][2] * z + lm.d[0];
                    long long iy = lm.a[1][0] * x + lm.a[1][1] * y + lm.a[1][2] * z + lm.d[1];
                    long long iz = lm.a[2][0] * x + lm.a[2][1] * y + lm.a[2][2] * z + lm.d[2];
                    double val = 0.0;
                    if (ix >= 0 && ix < nx && iy >= 0 && iy < ny && iz >= 0 && iz < nz)
                        val = v.values[v.index(static_cast<int>(ix), static_cast<int>(iy),
                                               static_cast<int>(iz))];
                    out.values[out.index(x, y, z)] = val;
                }
        }
        return out;
    }

#pragma omp parallel for
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                auto u = continuous_index(g, m, b,
                                          {static_cast<double>(x), static_cast<double>(y),
                                           static_cast<double>(z)});
                int i0[3];
                double f[3];
                for (int ax = 0; ax < 3; ++ax) {
                    double fl = std::floor(u[ax]);
                    i0[ax] = static_cast<int>(fl);
                    f[ax] = u[ax] - fl;
                }
                double acc = 0.0;
                for (int cz = 0; cz < 2; ++cz) {
                    int zz = i0[2] + cz;
                    if (zz < 0 || zz >= nz)
                        continue;
                    double wz = cz ? f[2] : 1.0 - f[2];
                    for (int cy = 0; cy < 2; ++cy) {
                        int yy = i0[1] + cy;
                        if (yy < 0 || yy >= ny)
                            continue;
                        double wy = cy ? f[1] : 1.0 - f[1];
                        for (int cx = 0; cx < 2; ++cx) {
                            int xx = i0[0] + cx;
                            if (xx < 0 || xx >= nx)
                                continue;
                            double wx = cx ? f[0] : 1.0 - f[0];
                            acc += wz * wy * wx * v.values[v.index(xx, yy, zz)];
                        }
                    }
                }
                out.values[out.index(x, y, z)] = acc;
            }
    }
    return out;
}

} // namespace

Volume apply_transform(const PoseTransform& t, const Volume& v) {
    if (t.is_identity())
        return v;
    // sample point for output q: p = R^T q - R^T t
    Mat3 rt = mat_transpose(t.rotation());
    Vec3 bt = mat_apply(rt, t.translation());
    return resample(v, rt, {-bt[0], -bt[1], -bt[2]}, t.interp());
}

Volume apply_inverse(const PoseTransform& t, const Volume& v) {
    if (t.is_identity())
        return v;
    return resample(v, t.rotation(), t.translation(), t.interp());
}

double transform_norm_ratio(const PoseTransform& t, const Volume& v) {
    double n = norm2(v);
    if (!(n > 0.0))
        fail(ErrorCode::Numeric, "transform_norm_ratio: zero-norm input volume");
    if (t.interp() == Interp::ExactLattice) {
        Mat3 rt = mat_transpose(t.rotation());
        Vec3 bt = mat_apply(rt, t.translation());
        LatticeMap lm = lattice_map(v.grid, rt, {-bt[0], -bt[1], -bt[2]});
        // A grid permutation preserves the multiset of values, hence the norm.
        if (lattice_bijective(v.grid, lm))
            return 1.0;
    }
    Volume tv = apply_transform(t, v);
    return norm2(tv) / n;
}

} // namespace mpf
