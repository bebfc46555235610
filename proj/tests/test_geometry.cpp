#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/transform.hpp"
#include "core/volume.hpp"
#include "support/oracles.hpp"

using namespace mpf;

namespace {

const double kHalfPi = 1.5707963267948966;

GridSpec cube_grid(int n, double s = 0.25) {
    return GridSpec{{n, n, n}, {s, s, s}};
}

Volume disk_phantom(const GridSpec& g, double radius_mm, double value) {
    Volume v(g);
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                double px = v.coord(0, x), py = v.coord(1, y);
                if (px * px + py * py <= radius_mm * radius_mm)
                    v.at(x, y, z) = value;
            }
    return v;
}

Volume gaussian_blob(const GridSpec& g, double sigma_mm) {
    Volume v(g);
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                double px = v.coord(0, x), py = v.coord(1, y), pz = v.coord(2, z);
                v.at(x, y, z) = std::exp(-0.5 * (px * px + py * py + pz * pz) /
                                         (sigma_mm * sigma_mm));
            }
    return v;
}

double rel_l2(const Volume& a, const Volume& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a.values[i] - b.values[i];
        num += d * d;
        den += b.values[i] * b.values[i];
    }
    return std::sqrt(num / den);
}

double voxel_sum(const Volume& v) {
    double s = 0.0;
    for (double x : v.values)
        s += x;
    return s;
}

} // namespace

TEST_CASE("identity transform returns the input unchanged") {
    Volume v = oracle::random_volume(cube_grid(8), 11);
    for (Interp m : {Interp::Trilinear, Interp::ExactLattice}) {
        PoseTransform t = PoseTransform::from_euler(0, 0, 0, {0, 0, 0}, m);
        CHECK(apply_transform(t, v).values == v.values);
        CHECK(apply_inverse(t, v).values == v.values);
    }
}

TEST_CASE("exact-lattice quarter turn applied four times is the identity") {
    Volume v = oracle::random_volume(cube_grid(10), 12);
    PoseTransform t =
        PoseTransform::from_euler(0, 0, kHalfPi, {0, 0, 0}, Interp::ExactLattice);
    Volume r = v;
    for (int i = 0; i < 4; ++i)
        r = apply_transform(t, r);
    CHECK(r.values == v.values);
}

namespace {

// Random values on the central core only, so translated copies stay inside
// the grid and no content is lost to the zero fill.
Volume interior_volume(const GridSpec& g, std::uint64_t seed, int margin) {
    Volume v(g);
    Volume r = oracle::random_volume(g, seed, -1.0, 1.0);
    for (int z = margin; z < g.dims[2] - margin; ++z)
        for (int y = margin; y < g.dims[1] - margin; ++y)
            for (int x = margin; x < g.dims[0] - margin; ++x)
                v.at(x, y, z) = r.at(x, y, z);
    return v;
}

} // namespace

TEST_CASE("exact-lattice inverse round trip is bit-exact") {
    SUBCASE("pure quarter-turn rotation, any content") {
        Volume v = oracle::random_volume(cube_grid(12), 13);
        PoseTransform t =
            PoseTransform::from_euler(kHalfPi, 0, 0, {0, 0, 0}, Interp::ExactLattice);
        Volume round = apply_inverse(t, apply_transform(t, v));
        CHECK(round.values == v.values);
    }
    SUBCASE("rotation plus integer-voxel shift, interior content") {
        Volume v = interior_volume(cube_grid(12), 13, 4);
        PoseTransform t = PoseTransform::from_euler(kHalfPi, 0, 0, {0.25, -0.5, 0.75},
                                                    Interp::ExactLattice);
        Volume round = apply_inverse(t, apply_transform(t, v));
        CHECK(round.values == v.values);
    }
}

TEST_CASE("trilinear 30 degree rotation conserves mass within 1%") {
    GridSpec g = cube_grid(48);
    Volume v = disk_phantom(g, 3.0, 1.0); // well inside the 12 mm field
    PoseTransform t = PoseTransform::from_euler(0, 0, 0.5235987755982988, {0, 0, 0},
                                                Interp::Trilinear);
    Volume r = apply_transform(t, v);
    double mass_in = voxel_sum(v) * g.voxel_volume();
    double mass_out = voxel_sum(r) * g.voxel_volume();
    CHECK(std::abs(mass_out - mass_in) / mass_in < 0.01);
}

TEST_CASE("trilinear 30 degree round trip error on a smooth blob is small") {
    GridSpec g = cube_grid(32);
    Volume v = gaussian_blob(g, 1.5);
    PoseTransform t = PoseTransform::from_euler(0, 0, 0.5235987755982988, {0, 0, 0},
                                                Interp::Trilinear);
    Volume round = apply_inverse(t, apply_transform(t, v));
    double err = rel_l2(round, v);
    CHECK(err <= 0.05);

    // The independent resampler agrees on the forward leg.
    Volume ref = oracle::reference_transform(v, t.rotation(), t.translation());
    CHECK(rel_l2(apply_transform(t, v), ref) < 1e-12);
}

TEST_CASE("transform_norm_ratio") {
    Volume v = oracle::random_volume(cube_grid(10), 14, 0.1, 1.0);

    SUBCASE("exact-lattice rotations return exactly 1.0") {
        for (const PoseTransform& t : oracle::lattice_rotations())
            CHECK(transform_norm_ratio(t, v) == 1.0);
    }
    SUBCASE("identity returns 1.0") {
        CHECK(transform_norm_ratio(PoseTransform::identity(), v) == 1.0);
    }
    SUBCASE("trilinear 45 degree rotation of white noise smooths (< 1)") {
        Volume noise = oracle::random_volume(cube_grid(16), 15, -1.0, 1.0);
        PoseTransform t = PoseTransform::from_euler(0, 0, 0.7853981633974483,
                                                    {0, 0, 0}, Interp::Trilinear);
        double ratio = transform_norm_ratio(t, noise);
        CHECK(ratio < 1.0);
        // regression baseline, recorded from the first verified run
        CHECK(ratio == doctest::Approx(0.596491425732).epsilon(1e-9));
    }
    SUBCASE("zero-norm input is an error") {
        Volume zero(cube_grid(4));
        CHECK_THROWS_AS((void)transform_norm_ratio(PoseTransform::identity(), zero),
                        Error);
    }
}

TEST_CASE("all 24 lattice rotations satisfy the inverse and isometry conditions") {
    auto rotations = oracle::lattice_rotations();
    CHECK(rotations.size() == 24);
    GridSpec g = cube_grid(8);
    for (int trial = 0; trial < 10; ++trial) {
        Volume v = oracle::random_volume(g, 100 + trial, -1.0, 1.0);
        for (const PoseTransform& t : rotations) {
            Volume tv = apply_transform(t, v);
            CHECK(apply_inverse(t, tv).values == v.values); // T^-1 T = I
            CHECK(norm2(tv) == doctest::Approx(norm2(v)).epsilon(1e-14));
        }
    }
}

TEST_CASE("apply_transform is linear in the volume") {
    GridSpec g = cube_grid(10);
    Volume u = oracle::random_volume(g, 21, -1, 1);
    Volume v = oracle::random_volume(g, 22, -1, 1);
    const double a = 0.37, b = -1.25;
    for (Interp m : {Interp::Trilinear, Interp::ExactLattice}) {
        PoseTransform t = m == Interp::Trilinear
                              ? PoseTransform::from_euler(0.2, -0.1, 0.4, {0.3, 0, 0}, m)
                              : PoseTransform::from_euler(kHalfPi, 0, kHalfPi, {0, 0, 0}, m);
        Volume mix(g);
        for (std::size_t i = 0; i < mix.size(); ++i)
            mix.values[i] = a * u.values[i] + b * v.values[i];
        Volume lhs = apply_transform(t, mix);
        Volume tu = apply_transform(t, u), tv = apply_transform(t, v);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            double rhs = a * tu.values[i] + b * tv.values[i];
            num += (lhs.values[i] - rhs) * (lhs.values[i] - rhs);
            den += rhs * rhs;
        }
        CHECK(std::sqrt(num) <= 1e-10 * std::sqrt(den));
    }
}

TEST_CASE("composition of exact-lattice transforms matches the composed transform") {
    SUBCASE("pure rotations, any content") {
        GridSpec g = cube_grid(8);
        Volume v = oracle::random_volume(g, 31);
        PoseTransform t1 =
            PoseTransform::from_euler(kHalfPi, 0, 0, {0, 0, 0}, Interp::ExactLattice);
        PoseTransform t2 =
            PoseTransform::from_euler(0, kHalfPi, kHalfPi, {0, 0, 0}, Interp::ExactLattice);
        Volume two_step = apply_transform(t2, apply_transform(t1, v));
        Volume one_step = apply_transform(t2.compose(t1), v);
        CHECK(two_step.values == one_step.values);
    }
    SUBCASE("with integer-voxel shifts, interior content") {
        GridSpec g = cube_grid(12);
        Volume v = interior_volume(g, 31, 4);
        PoseTransform t1 = PoseTransform::from_euler(kHalfPi, 0, 0, {0.25, 0, -0.25},
                                                     Interp::ExactLattice);
        PoseTransform t2 = PoseTransform::from_euler(0, kHalfPi, kHalfPi, {0, 0.25, 0},
                                                     Interp::ExactLattice);
        Volume two_step = apply_transform(t2, apply_transform(t1, v));
        Volume one_step = apply_transform(t2.compose(t1), v);
        CHECK(two_step.values == one_step.values);
    }
}

TEST_CASE("exact-lattice rejects non-lattice parameters") {
    CHECK_THROWS_AS(PoseTransform::from_euler(0.3, 0, 0, {0, 0, 0}, Interp::ExactLattice),
                    Error);
    // 90 degrees but a fractional-voxel translation
    PoseTransform t = PoseTransform::from_euler(0, 0, kHalfPi, {0.1, 0, 0},
                                                Interp::ExactLattice);
    Volume v(cube_grid(8));
    v.values[0] = 1.0;
    CHECK_THROWS_AS((void)apply_transform(t, v), Error);
}

TEST_CASE("from_matrix validates orthonormality") {
    Mat3 bad = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1.1}}};
    CHECK_THROWS_AS(PoseTransform::from_matrix(bad, {0, 0, 0}, Interp::Trilinear), Error);
    Mat3 reflect = {{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; // det -1
    CHECK_THROWS_AS(PoseTransform::from_matrix(reflect, {0, 0, 0}, Interp::Trilinear),
                    Error);
}

TEST_CASE("MPFVOL1 round trip is byte-exact") {
    namespace fs = std::filesystem;
    fs::create_directories("ctest_tmp");
    GridSpec g{{5, 4, 3}, {0.25, 0.3, 1.0}};
    Volume v = oracle::random_volume(g, 41, -2.0, 2.0);

    const std::string p1 = "ctest_tmp/vol_a.vol", p2 = "ctest_tmp/vol_b.vol";
    write_volume(v, p1);
    Volume r = read_volume(p1);
    CHECK(r.grid.dims == g.dims);
    CHECK(r.grid.spacing == g.spacing);
    write_volume(r, p2);

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    CHECK(!s1.empty());
}

TEST_CASE("MPFVOL1 rejects malformed files") {
    namespace fs = std::filesystem;
    fs::create_directories("ctest_tmp");
    {
        std::ofstream os("ctest_tmp/bad_magic.vol", std::ios::binary);
        os << "NOTAVOL\n";
    }
    CHECK_THROWS_AS((void)read_volume("ctest_tmp/bad_magic.vol"), Error);
    {
        std::ofstream os("ctest_tmp/truncated.vol", std::ios::binary);
        os << "MPFVOL1\ndims 4 4 4\nspacing 1 1 1\ndtype f32le\n\nxx";
    }
    CHECK_THROWS_AS((void)read_volume("ctest_tmp/truncated.vol"), Error);
    CHECK_THROWS_AS((void)read_volume("ctest_tmp/nonexistent.vol"), Error);
}
