#include "core/volume.hpp"

#include <cmath>

#include "core/error.hpp"

namespace mpf {

void GridSpec::validate(const std::string& what) const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1)
            fail(ErrorCode::Dimension, what + ": dims must be >= 1 on every axis");
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
            fail(ErrorCode::Dimension, what + ": spacing must be strictly positive");
    }
}

void Volume::validate(const std::string& what) const {
    grid.validate(what);
    if (values.size() != grid.voxel_count())
        fail(ErrorCode::Dimension, what + ": values length does not match dims");
}

void Volume::ensure_finite(const std::string& what) const {
    for (double v : values)
        if (!std::isfinite(v))
            fail(ErrorCode::Numeric, what + ": volume contains non-finite values");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }
double norm2(const Volume& v) { return norm2(v.values); }

void require_same_grid(const Volume& a, const Volume& b, const std::string& what) {
    if (!(a.grid == b.grid))
        fail(ErrorCode::Dimension, what + ": volumes are on different grids");
}

} // namespace mpf
