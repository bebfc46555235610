// simulate.hpp - synthetic phantoms and polychromatic multi-pose acquisition.
//
// Phantoms are a plastic body (cylinder or box) holding removable metal
// disks.  Acquisition integrates per-energy-bin attenuation along each ray,
// mixes bin transmissions by the source spectrum, converts back to an
// effective line integral, and adds transmission-dependent pseudo-Gaussian
// noise.  The spectral mismatch between this model and the linear
// reconstruction operators is what produces metal artifacts.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/projector.hpp"
#include "core/transform.hpp"
#include "core/volume.hpp"

namespace mpf {

struct Material {
    std::string name;
    std::vector<double> attenuation; // mm^-1 at each spectrum bin
};

struct Spectrum {
    std::vector<double> bin_energies;  // keV, strictly increasing
    std::vector<double> bin_fractions; // nonnegative, sums to 1
    double mean_energy() const;
    void validate() const;
};

// Attenuation of a material at an arbitrary energy, linearly interpolated
// between spectrum bins (clamped at the ends).
double attenuation_at(const Material& m, const Spectrum& s, double energy_kev);

enum class BodyShape { Cylinder, Box };

struct Disk {
    std::array<double, 3> center_mm{0, 0, 0};
    double radius_mm = 0.0;
    double thickness_mm = 0.0; // along z
    std::string material;
};

struct PhantomSpec {
    GridSpec grid;
    BodyShape body_shape = BodyShape::Cylinder;
    std::array<double, 2> body_center_mm{0, 0}; // in-plane
    double body_radius_mm = 0.0;                // cylinder radius / box half-width
    double body_half_depth_mm = 0.0;            // box half-extent in y (box only)
    double body_z_min_mm = 0.0, body_z_max_mm = 0.0;
    std::string body_material;
    std::vector<Disk> disks;
    std::uint64_t seed = 0; // noise seed carried with the spec
    void validate() const;
};

// Labels: 0 air, 1 plastic (body), 2 metal (disks).
constexpr double kLabelAir = 0.0;
constexpr double kLabelBody = 1.0;
constexpr double kLabelMetal = 2.0;

struct PhantomBuild {
    Volume truth;  // attenuation at the spectrum's mean energy, mm^-1
    Volume labels; // integer-valued label map on the same grid
};

PhantomBuild build_phantom(const PhantomSpec& spec,
                           const std::vector<Material>& materials,
                           const Spectrum& spectrum);

// Simulate one posed scan.  dose = +inf disables noise.  Transmission is
// clamped at 1e-8 before the log.  A single-bin spectrum reduces to
// project(apply_transform(t, reference)) plus noise.
Sinogram acquire(const Volume& labels, const std::vector<Material>& materials,
                 const Spectrum& spectrum, const ScanGeometry& g,
                 const PoseTransform& t, double dose, std::uint64_t seed);

// Per-bin attenuation volume for a label map (used by acquire and tests).
Volume label_attenuation(const Volume& labels, const std::vector<Material>& materials,
                         std::size_t bin);

} // namespace mpf
