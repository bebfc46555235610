#include "core/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace mpf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Exact 2-D ray/grid intersection walk.  Visits cells in increasing ray
// parameter order and calls fn(ix, iy, length_mm).  The grid spans
// [-nx*sx/2, nx*sx/2] x [-ny*sy/2, ny*sy/2]; the ray is o + t*d with |d|=1.
template <typename Fn>
inline void traverse_ray_2d(int nx, int ny, double sx, double sy, double ox,
                            double oy, double dx, double dy, Fn&& fn) {
    const double x_lo = -0.5 * nx * sx, x_hi = 0.5 * nx * sx;
    const double y_lo = -0.5 * ny * sy, y_hi = 0.5 * ny * sy;
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();

    if (dx != 0.0) {
        double ta = (x_lo - ox) / dx, tb = (x_hi - ox) / dx;
        t0 = std::max(t0, std::min(ta, tb));
        t1 = std::min(t1, std::max(ta, tb));
    } else if (ox < x_lo || ox >= x_hi) {
        return;
    }
    if (dy != 0.0) {
        double ta = (y_lo - oy) / dy, tb = (y_hi - oy) / dy;
        t0 = std::max(t0, std::min(ta, tb));
        t1 = std::min(t1, std::max(ta, tb));
    } else if (oy < y_lo || oy >= y_hi) {
        return;
    }
    if (!(t0 < t1))
        return;

    const int step_x = dx > 0.0 ? 1 : -1;
    const int step_y = dy > 0.0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();

    int ix = static_cast<int>(std::floor((ox + t0 * dx - x_lo) / sx));
    int iy = static_cast<int>(std::floor((oy + t0 * dy - y_lo) / sy));
    ix = std::clamp(ix, 0, nx - 1);
    iy = std::clamp(iy, 0, ny - 1);

    // Parameter of the next boundary crossing per axis.
    double tmx = inf, dtx = inf;
    if (dx != 0.0) {
        int plane = dx > 0.0 ? ix + 1 : ix;
        tmx = (x_lo + plane * sx - ox) / dx;
        dtx = sx / std::abs(dx);
    }
    double tmy = inf, dty = inf;
    if (dy != 0.0) {
        int plane = dy > 0.0 ? iy + 1 : iy;
        tmy = (y_lo + plane * sy - oy) / dy;
        dty = sy / std::abs(dy);
    }

    double t = t0;
    while (true) {
        double tn = std::min(std::min(tmx, tmy), t1);
        if (tn > t)
            fn(ix, iy, tn - t);
        t = tn;
        if (t >= t1)
            break;
        if (tmx <= tmy) {
            ix += step_x;
            tmx += dtx;
            if (ix < 0 || ix >= nx)
                break;
        } else {
            iy += step_y;
            tmy += dty;
            if (iy < 0 || iy >= ny)
                break;
        }
    }
}

// Detector row r -> volume slice index, or -1 if the ray plane misses the grid.
inline int row_slice(const GridSpec& g, const ScanGeometry& geo, int row) {
    double z = (row - 0.5 * (geo.n_det_rows - 1)) * geo.det_pitch;
    double k = std::floor(z / g.spacing[2] + 0.5 * g.dims[2]);
    if (k < 0.0 || k >= static_cast<double>(g.dims[2]))
        return -1;
    return static_cast<int>(k);
}

void check_compatible(const ScanGeometry& g, const GridSpec& grid) {
    g.validate();
    grid.validate("projector grid");
    // Detector columns must span the in-plane footprint of the volume.
    double width = g.n_det_cols * g.det_pitch;
    double need = std::max(grid.dims[0] * grid.spacing[0], grid.dims[1] * grid.spacing[1]);
    if (width + 1e-12 < need)
        fail(ErrorCode::Dimension,
             "detector width " + std::to_string(width) +
                 " mm does not span the volume footprint (" + std::to_string(need) + " mm)");
}

} // namespace

std::vector<double> ScanGeometry::even_angles(int n_views, double start, double range) {
    std::vector<double> a(static_cast<std::size_t>(std::max(n_views, 0)));
    for (int i = 0; i < n_views; ++i)
        a[i] = start + range * i / n_views;
    return a;
}

void ScanGeometry::validate() const {
    if (n_views < 1 || n_det_rows < 1 || n_det_cols < 1)
        fail(ErrorCode::Dimension, "scan geometry counts must be >= 1");
    if (!(det_pitch > 0.0))
        fail(ErrorCode::Dimension, "detector pitch must be positive");
    if (static_cast<int>(angles.size()) != n_views)
        fail(ErrorCode::Dimension, "n_views does not match the angle list");
    for (int i = 0; i < n_views; ++i) {
        if (!(angles[i] >= 0.0) || !(angles[i] < kTwoPi))
            fail(ErrorCode::Dimension, "view angles must lie in [0, 2pi)");
        if (i > 0 && !(angles[i] > angles[i - 1]))
            fail(ErrorCode::Dimension, "view angles must be strictly increasing");
    }
}

void Sinogram::validate() const {
    geom.validate();
    if (values.size() != geom.ray_count() || weights.size() != geom.ray_count())
        fail(ErrorCode::Dimension, "sinogram arrays do not match geometry");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || !std::isfinite(weights[i]))
            fail(ErrorCode::Numeric, "sinogram contains non-finite entries");
        if (weights[i] < 0.0)
            fail(ErrorCode::InvalidWeights, "sinogram weights must be nonnegative");
    }
}

Sinogram project(const ScanGeometry& g, const Volume& v) {
    v.validate("project input");
    check_compatible(g, v.grid);
    const int nx = v.grid.dims[0], ny = v.grid.dims[1];
    const double sx = v.grid.spacing[0], sy = v.grid.spacing[1];
    Sinogram out(g);

#pragma omp parallel for collapse(2) schedule(static)
    for (int view = 0; view < g.n_views; ++view) {
        for (int row = 0; row < g.n_det_rows; ++row) {
            const double c = std::cos(g.angles[view]);
            const double s = std::sin(g.angles[view]);
            const int slice = row_slice(v.grid, g, row);
            if (slice < 0)
                continue;
            const double* sl = v.values.data() +
                               static_cast<std::size_t>(slice) * nx * ny;
            for (int col = 0; col < g.n_det_cols; ++col) {
                double off = (col - 0.5 * (g.n_det_cols - 1)) * g.det_pitch;
                double ox = -off * s, oy = off * c;
                double sum = 0.0;
                traverse_ray_2d(nx, ny, sx, sy, ox, oy, c, s,
                                [&](int ix, int iy, double len) {
                                    sum += len * sl[static_cast<std::size_t>(iy) * nx + ix];
                                });
                out.values[g.ray_index(view, row, col)] = sum;
            }
        }
    }
    return out;
}

Volume backproject(const Sinogram& s, const GridSpec& grid) {
    s.validate();
    check_compatible(s.geom, grid);
    const ScanGeometry& g = s.geom;
    const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
    const double sx = grid.spacing[0], sy = grid.spacing[1];
    Volume out(grid);

    // Rays of one detector row land in exactly one z slice, so accumulation
    // can be grouped per slice; the order inside each slice is fixed, which
    // keeps the reduction deterministic under any thread count.
    std::vector<std::vector<int>> rows_of_slice(static_cast<std::size_t>(nz));
    for (int row = 0; row < g.n_det_rows; ++row) {
        int k = row_slice(grid, g, row);
        if (k >= 0)
            rows_of_slice[static_cast<std::size_t>(k)].push_back(row);
    }

#pragma omp parallel for schedule(static)
    for (int k = 0; k < nz; ++k) {
        double* sl = out.values.data() + static_cast<std::size_t>(k) * nx * ny;
        for (int row : rows_of_slice[static_cast<std::size_t>(k)]) {
            for (int view = 0; view < g.n_views; ++view) {
                const double c = std::cos(g.angles[view]);
                const double sn = std::sin(g.angles[view]);
                for (int col = 0; col < g.n_det_cols; ++col) {
                    double val = s.values[g.ray_index(view, row, col)];
                    if (val == 0.0)
                        continue;
                    double off = (col - 0.5 * (g.n_det_cols - 1)) * g.det_pitch;
                    double ox = -off * sn, oy = off * c;
                    traverse_ray_2d(nx, ny, sx, sy, ox, oy, c, sn,
                                    [&](int ix, int iy, double len) {
                                        sl[static_cast<std::size_t>(iy) * nx + ix] +=
                                            len * val;
                                    });
                }
            }
        }
    }
    return out;
}

Volume gram_apply(const ScanGeometry& g, const Volume& v,
                  const std::vector<double>* ray_weights) {
    Sinogram s = project(g, v);
    if (ray_weights) {
        if (ray_weights->size() != s.values.size())
            fail(ErrorCode::Dimension, "gram_apply: ray weight count mismatch");
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            double w = (*ray_weights)[i];
            if (!(w >= 0.0) || !std::isfinite(w))
                fail(ErrorCode::InvalidWeights, "gram_apply: ray weights must be >= 0");
            s.values[i] *= w;
        }
    }
    return backproject(s, v.grid);
}

std::vector<double> transmission_weights(const std::vector<double>& line_integrals) {
    std::vector<double> w(line_integrals.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::clamp(std::exp(-line_integrals[i]), 1e-4, 1.0);
    return w;
}

} // namespace mpf
