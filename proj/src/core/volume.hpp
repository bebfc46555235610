// volume.hpp - raster image/volume model.
//
// A Volume is a dense grid of attenuation coefficients in mm^-1 stored
// row-major with x fastest: values[(z*ny + y)*nx + x].  The grid is centered
// on the coordinate origin; voxel (i,j,k) has its center at
// ((i + 0.5 - nx/2)*sx, (j + 0.5 - ny/2)*sy, (k + 0.5 - nz/2)*sz) in mm.
// 2-D problems use nz = 1.
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace mpf {

struct GridSpec {
    std::array<int, 3> dims{0, 0, 0};         // nx, ny, nz
    std::array<double, 3> spacing{1.0, 1.0, 1.0}; // mm per axis

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }
    bool operator==(const GridSpec& o) const {
        return dims == o.dims && spacing == o.spacing;
    }
    void validate(const std::string& what) const;
};

struct Volume {
    GridSpec grid;
    std::vector<double> values;

    Volume() = default;
    Volume(GridSpec g, double fill = 0.0)
        : grid(g), values(g.voxel_count(), fill) {}

    std::size_t size() const { return values.size(); }
    std::size_t index(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * grid.dims[1] + y) * grid.dims[0] + x;
    }
    double& at(int x, int y, int z) { return values[index(x, y, z)]; }
    double at(int x, int y, int z) const { return values[index(x, y, z)]; }

    // Physical coordinate of a voxel center along one axis, mm.
    double coord(int axis, int i) const {
        return (i + 0.5 - 0.5 * grid.dims[axis]) * grid.spacing[axis];
    }

    void validate(const std::string& what) const;       // shape + spacing
    void ensure_finite(const std::string& what) const;  // no NaN/Inf
};

// Vector math on the flattened values (all require equal sizes).
double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
double norm2(const Volume& v);

void require_same_grid(const Volume& a, const Volume& b, const std::string& what);

} // namespace mpf
