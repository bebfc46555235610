#include "core/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mpf {

void Spectrum::validate() const {
    if (bin_energies.empty() || bin_energies.size() != bin_fractions.size())
        fail(ErrorCode::Config, "spectrum bins and fractions must match and be nonempty");
    double sum = 0.0;
    for (std::size_t i = 0; i < bin_energies.size(); ++i) {
        if (i > 0 && !(bin_energies[i] > bin_energies[i - 1]))
            fail(ErrorCode::Config, "spectrum energies must be strictly increasing");
        if (bin_fractions[i] < 0.0)
            fail(ErrorCode::Config, "spectrum fractions must be nonnegative");
        sum += bin_fractions[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        fail(ErrorCode::Config, "spectrum fractions must sum to 1");
}

double Spectrum::mean_energy() const {
    double e = 0.0;
    for (std::size_t i = 0; i < bin_energies.size(); ++i)
        e += bin_energies[i] * bin_fractions[i];
    return e;
}

double attenuation_at(const Material& m, const Spectrum& s, double energy_kev) {
    if (m.attenuation.size() != s.bin_energies.size())
        fail(ErrorCode::Config,
             "material '" + m.name + "' does not define attenuation at every bin");
    for (double a : m.attenuation)
        if (!(a >= 0.0))
            fail(ErrorCode::Config, "material '" + m.name + "' has negative attenuation");
    const auto& e = s.bin_energies;
    if (energy_kev <= e.front())
        return m.attenuation.front();
    if (energy_kev >= e.back())
        return m.attenuation.back();
    std::size_t hi = 1;
    while (e[hi] < energy_kev)
        ++hi;
    double t = (energy_kev - e[hi - 1]) / (e[hi] - e[hi - 1]);
    return (1.0 - t) * m.attenuation[hi - 1] + t * m.attenuation[hi];
}

void PhantomSpec::validate() const {
    grid.validate("phantom grid");
    if (!(body_radius_mm > 0.0))
        fail(ErrorCode::Config, "phantom body radius must be > 0");
    if (!(body_z_max_mm > body_z_min_mm))
        fail(ErrorCode::Config, "phantom body z range is empty");
    if (body_shape == BodyShape::Box && !(body_half_depth_mm > 0.0))
        fail(ErrorCode::Config, "box body needs a positive half depth");
    for (const Disk& d : disks) {
        if (!(d.radius_mm > 0.0) || !(d.thickness_mm > 0.0))
            fail(ErrorCode::Config, "disk radius and thickness must be > 0");
        double dx = d.center_mm[0] - body_center_mm[0];
        double dy = d.center_mm[1] - body_center_mm[1];
        bool inside_xy;
        if (body_shape == BodyShape::Cylinder) {
            inside_xy = std::sqrt(dx * dx + dy * dy) + d.radius_mm <= body_radius_mm + 1e-12;
        } else {
            inside_xy = std::abs(dx) + d.radius_mm <= body_radius_mm + 1e-12 &&
                        std::abs(dy) + d.radius_mm <= body_half_depth_mm + 1e-12;
        }
        bool inside_z = d.center_mm[2] - 0.5 * d.thickness_mm >= body_z_min_mm - 1e-12 &&
                        d.center_mm[2] + 0.5 * d.thickness_mm <= body_z_max_mm + 1e-12;
        if (!inside_xy || !inside_z)
            fail(ErrorCode::Config, "disk at (" + std::to_string(d.center_mm[0]) + ", " +
                                        std::to_string(d.center_mm[1]) + ", " +
                                        std::to_string(d.center_mm[2]) +
                                        ") lies outside the body");
    }
}

namespace {

const Material& find_material(const std::vector<Material>& materials,
                              const std::string& name) {
    for (const Material& m : materials)
        if (m.name == name)
            return m;
    fail(ErrorCode::Config, "unknown material '" + name + "'");
}

} // namespace

PhantomBuild build_phantom(const PhantomSpec& spec,
                           const std::vector<Material>& materials,
                           const Spectrum& spectrum) {
    spec.validate();
    spectrum.validate();
    const Material& body = find_material(materials, spec.body_material);
    const Material* disk_mat = nullptr;
    for (const Disk& d : spec.disks) {
        const Material& m = find_material(materials, d.material);
        if (disk_mat && disk_mat != &m)
            fail(ErrorCode::Config,
                 "all disks must share one material (the label map has a single "
                 "metal label)");
        disk_mat = &m;
    }

    const double e_mean = spectrum.mean_energy();
    const double mu_body = attenuation_at(body, spectrum, e_mean);
    const double mu_metal = disk_mat ? attenuation_at(*disk_mat, spectrum, e_mean) : 0.0;

    PhantomBuild out;
    out.truth = Volume(spec.grid);
    out.labels = Volume(spec.grid);
    const int nx = spec.grid.dims[0], ny = spec.grid.dims[1], nz = spec.grid.dims[2];
    for (int z = 0; z < nz; ++z) {
        double pz = out.truth.coord(2, z);
        for (int y = 0; y < ny; ++y) {
            double py = out.truth.coord(1, y);
            for (int x = 0; x < nx; ++x) {
                double px = out.truth.coord(0, x);
                double label = kLabelAir;
                double bx = px - spec.body_center_mm[0];
                double by = py - spec.body_center_mm[1];
                bool in_body;
                if (spec.body_shape == BodyShape::Cylinder)
                    in_body = bx * bx + by * by <= spec.body_radius_mm * spec.body_radius_mm;
                else
                    in_body = std::abs(bx) <= spec.body_radius_mm &&
                              std::abs(by) <= spec.body_half_depth_mm;
                in_body = in_body && pz >= spec.body_z_min_mm && pz <= spec.body_z_max_mm;
                if (in_body) {
                    label = kLabelBody;
                    for (const Disk& d : spec.disks) {
                        double ddx = px - d.center_mm[0];
                        double ddy = py - d.center_mm[1];
                        if (ddx * ddx + ddy * ddy <= d.radius_mm * d.radius_mm &&
                            std::abs(pz - d.center_mm[2]) <= 0.5 * d.thickness_mm) {
                            label = kLabelMetal;
                            break;
                        }
                    }
                }
                std::size_t i = out.truth.index(x, y, z);
                out.labels.values[i] = label;
                out.truth.values[i] =
                    label == kLabelMetal ? mu_metal : (label == kLabelBody ? mu_body : 0.0);
            }
        }
    }
    return out;
}

Volume label_attenuation(const Volume& labels, const std::vector<Material>& materials,
                         std::size_t bin) {
    labels.validate("label map");
    Volume out(labels.grid);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double l = labels.values[i];
        double li = std::round(l);
        if (l != li || li < 0.0 || li > static_cast<double>(materials.size()))
            fail(ErrorCode::Config, "label map entries must be integers in [0, " +
                                        std::to_string(materials.size()) + "]");
        if (li == 0.0) {
            out.values[i] = 0.0;
        } else {
            const Material& m = materials[static_cast<std::size_t>(li) - 1];
            if (bin >= m.attenuation.size())
                fail(ErrorCode::Config, "material '" + m.name + "' missing bin " +
                                            std::to_string(bin));
            out.values[i] = m.attenuation[bin];
        }
    }
    return out;
}

Sinogram acquire(const Volume& labels, const std::vector<Material>& materials,
                 const Spectrum& spectrum, const ScanGeometry& g,
                 const PoseTransform& t, double dose, std::uint64_t seed) {
    spectrum.validate();
    if (!(dose > 0.0))
        fail(ErrorCode::Config, "dose must be > 0 (use +inf for noise-free scans)");
    const std::size_t n_bins = spectrum.bin_energies.size();

    // Per-bin posed projections.
    std::vector<Sinogram> bin_sino;
    bin_sino.reserve(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        Volume mu = label_attenuation(labels, materials, b);
        Volume posed = apply_transform(t, mu);
        bin_sino.push_back(project(g, posed));
    }

    Sinogram out(g);
    const std::size_t n = out.values.size();
    std::vector<double> transmission(n);
    for (std::size_t i = 0; i < n; ++i) {
        double trans = 0.0;
        for (std::size_t b = 0; b < n_bins; ++b)
            trans += spectrum.bin_fractions[b] * std::exp(-bin_sino[b].values[i]);
        trans = std::max(trans, 1e-8); // underflow clamp before the log
        transmission[i] = trans;
        out.values[i] = -std::log(trans);
    }

    if (!std::isinf(dose)) {
        // Noise variance 1/(dose * transmission); one stream per view so
        // per-view simulation can run concurrently without changing bytes.
        for (int view = 0; view < g.n_views; ++view) {
            NormalStream stream(seed ^ static_cast<std::uint64_t>(view));
            for (int row = 0; row < g.n_det_rows; ++row)
                for (int col = 0; col < g.n_det_cols; ++col) {
                    std::size_t i = g.ray_index(view, row, col);
                    out.values[i] += stream.next() / std::sqrt(dose * transmission[i]);
                }
        }
    }

    out.weights = transmission_weights(out.values);
    out.validate();
    return out;
}

} // namespace mpf
