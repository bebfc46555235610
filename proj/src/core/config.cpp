#include "core/config.hpp"

#include <cmath>

#include <yaml-cpp/yaml.h>

#include "core/error.hpp"

namespace mpf {

namespace {

const YAML::Node require(const YAML::Node& n, const std::string& key,
                         const std::string& where) {
    YAML::Node child = n[key];
    if (!child)
        fail(ErrorCode::Config, where + ": missing key '" + key + "'");
    return child;
}

template <typename T>
T get(const YAML::Node& n, const std::string& key, const std::string& where) {
    try {
        return require(n, key, where).as<T>();
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::Config, where + "." + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const YAML::Node& n, const std::string& key, T fallback,
         const std::string& where) {
    if (!n || !n[key])
        return fallback;
    try {
        return n[key].as<T>();
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::Config, where + "." + key + ": " + e.what());
    }
}

std::array<double, 3> get_vec3(const YAML::Node& n, const std::string& key,
                               const std::string& where) {
    auto v = get<std::vector<double>>(n, key, where);
    if (v.size() != 3)
        fail(ErrorCode::Config, where + "." + key + ": expected 3 components");
    return {v[0], v[1], v[2]};
}

ScanGeometry parse_geometry(const YAML::Node& n, const std::string& where) {
    ScanGeometry g;
    g.n_det_rows = get<int>(n, "n_det_rows", where);
    g.n_det_cols = get<int>(n, "n_det_cols", where);
    g.det_pitch = get<double>(n, "det_pitch", where);
    if (n["angles"]) {
        g.angles = get<std::vector<double>>(n, "angles", where);
        g.n_views = static_cast<int>(g.angles.size());
    } else {
        g.n_views = get<int>(n, "n_views", where);
        double start = get_or<double>(n, "angle_start", 0.0, where);
        double range = get_or<double>(n, "angle_range", 3.14159265358979323846, where);
        g.angles = ScanGeometry::even_angles(g.n_views, start, range);
    }
    g.validate();
    return g;
}

Interp parse_interp(const std::string& s, const std::string& where) {
    if (s == "trilinear")
        return Interp::Trilinear;
    if (s == "exact-lattice")
        return Interp::ExactLattice;
    fail(ErrorCode::Config,
         where + ": interpolation must be 'trilinear' or 'exact-lattice', got '" + s + "'");
}

} // namespace

std::vector<PoseTransform> ExperimentConfig::transforms() const {
    std::vector<PoseTransform> out;
    out.reserve(poses.size());
    for (const auto& p : poses)
        out.push_back(p.transform);
    return out;
}

std::vector<ScanGeometry> ExperimentConfig::geometries() const {
    std::vector<ScanGeometry> out;
    out.reserve(poses.size());
    for (const auto& p : poses)
        out.push_back(p.geometry);
    return out;
}

void ExperimentConfig::validate() const {
    phantom.validate();
    spectrum.validate();
    if (materials.empty())
        fail(ErrorCode::Config, "config: at least one material is required");
    for (const Material& m : materials) {
        if (m.attenuation.size() != spectrum.bin_energies.size())
            fail(ErrorCode::Config, "material '" + m.name +
                                        "' must define attenuation at every spectrum bin");
        for (double a : m.attenuation)
            if (!(a >= 0.0))
                fail(ErrorCode::Config, "material '" + m.name + "' has negative attenuation");
    }
    if (poses.empty())
        fail(ErrorCode::Config, "config: at least one pose is required");
    for (const auto& p : poses)
        p.geometry.validate();
    if (!(dose > 0.0))
        fail(ErrorCode::Config, "config: dose must be > 0 (use .inf to disable noise)");
    recon.prox.validate();
    if (!(recon.beta > 0.0))
        fail(ErrorCode::Config, "config: reconstruction.beta must be > 0");
    if (!(recon.rho > 0.0 && recon.rho < 1.0))
        fail(ErrorCode::Config, "config: reconstruction.rho must lie in (0,1)");
    if (recon.max_iters < 1 || recon.init_cg_iters < 1)
        fail(ErrorCode::Config, "config: iteration caps must be >= 1");
    if (!(recon.stop_tol > 0.0) || !(recon.init_cg_tol > 0.0))
        fail(ErrorCode::Config, "config: tolerances must be > 0");
    if (recon.denoiser_scale < 0.0)
        fail(ErrorCode::Config, "config: denoiser_scale must be >= 0");
    if (!(weighting.tau_metal > weighting.tau_object) || !(weighting.tau_object > 0.0))
        fail(ErrorCode::Config, "config: need tau_metal > tau_object > 0");
    if (weighting.alpha < 0.0)
        fail(ErrorCode::Config, "config: weighting.alpha must be >= 0");
    if (!(weighting.epsilon_rel > 0.0))
        fail(ErrorCode::Config, "config: weighting.epsilon_rel must be > 0");
    if (output_dir.empty())
        fail(ErrorCode::Config, "config: output.dir must not be empty");
}

ExperimentConfig load_config(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        fail(ErrorCode::Io, path + ": cannot open config file");
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::Config,
             path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }

    try {
        ExperimentConfig cfg;

        YAML::Node ph = require(root, "phantom", path);
        auto dims = get<std::vector<int>>(ph, "dims", "phantom");
        auto spac = get<std::vector<double>>(ph, "spacing", "phantom");
        if (dims.size() != 3 || spac.size() != 3)
            fail(ErrorCode::Config, "phantom.dims and phantom.spacing need 3 entries");
        cfg.phantom.grid.dims = {dims[0], dims[1], dims[2]};
        cfg.phantom.grid.spacing = {spac[0], spac[1], spac[2]};

        YAML::Node body = require(ph, "body", "phantom");
        std::string shape = get<std::string>(body, "shape", "phantom.body");
        if (shape == "cylinder")
            cfg.phantom.body_shape = BodyShape::Cylinder;
        else if (shape == "box")
            cfg.phantom.body_shape = BodyShape::Box;
        else
            fail(ErrorCode::Config, "phantom.body.shape must be 'cylinder' or 'box'");
        auto bc = get<std::vector<double>>(body, "center", "phantom.body");
        if (bc.size() != 2)
            fail(ErrorCode::Config, "phantom.body.center needs 2 in-plane entries");
        cfg.phantom.body_center_mm = {bc[0], bc[1]};
        cfg.phantom.body_radius_mm = get<double>(body, "radius", "phantom.body");
        cfg.phantom.body_half_depth_mm =
            get_or<double>(body, "half_depth", 0.0, "phantom.body");
        cfg.phantom.body_z_min_mm = get<double>(body, "z_min", "phantom.body");
        cfg.phantom.body_z_max_mm = get<double>(body, "z_max", "phantom.body");
        cfg.phantom.body_material = get<std::string>(body, "material", "phantom.body");

        if (ph["disks"]) {
            for (const auto& dn : ph["disks"]) {
                Disk d;
                auto c = dn["center"].as<std::vector<double>>();
                if (c.size() != 3)
                    fail(ErrorCode::Config, "disk center needs 3 entries");
                d.center_mm = {c[0], c[1], c[2]};
                d.radius_mm = get<double>(dn, "radius", "phantom.disks[]");
                d.thickness_mm = get<double>(dn, "thickness", "phantom.disks[]");
                d.material = get<std::string>(dn, "material", "phantom.disks[]");
                cfg.phantom.disks.push_back(d);
            }
        }

        for (const auto& mn : require(root, "materials", path)) {
            Material m;
            m.name = get<std::string>(mn, "name", "materials[]");
            m.attenuation = get<std::vector<double>>(mn, "attenuation", "materials[]");
            cfg.materials.push_back(m);
        }

        YAML::Node sp = require(root, "spectrum", path);
        cfg.spectrum.bin_energies =
            get<std::vector<double>>(sp, "bin_energies", "spectrum");
        cfg.spectrum.bin_fractions =
            get<std::vector<double>>(sp, "bin_fractions", "spectrum");

        YAML::Node shared_geom = root["geometry"];
        ScanGeometry default_geom;
        bool have_default = false;
        if (shared_geom) {
            default_geom = parse_geometry(shared_geom, "geometry");
            have_default = true;
        }

        YAML::Node poses = require(root, "poses", path);
        if (!poses.IsSequence() || poses.size() == 0)
            fail(ErrorCode::Config, "config: at least one pose is required");
        for (const auto& pn : poses) {
            PoseConfig pc;
            auto rot = get_vec3(pn, "rotation", "poses[]"); // Euler rx, ry, rz, radians
            auto trans = get_vec3(pn, "translation", "poses[]");
            Interp interp = parse_interp(
                get_or<std::string>(pn, "interpolation", "trilinear", "poses[]"),
                "poses[]");
            pc.transform =
                PoseTransform::from_euler(rot[0], rot[1], rot[2], trans, interp);
            if (pn["geometry"])
                pc.geometry = parse_geometry(pn["geometry"], "poses[].geometry");
            else if (have_default)
                pc.geometry = default_geom;
            else
                fail(ErrorCode::Config,
                     "poses[]: no geometry given and no shared geometry section");
            cfg.poses.push_back(pc);
        }

        YAML::Node sim = root["simulation"];
        cfg.dose = get_or<double>(sim, "dose", cfg.dose, "simulation");
        cfg.seed = get_or<std::uint64_t>(sim, "seed", cfg.seed, "simulation");
        cfg.phantom.seed = cfg.seed;

        YAML::Node rc = root["reconstruction"];
        cfg.recon.prox.sigma = get_or<double>(rc, "sigma", cfg.recon.prox.sigma, "reconstruction");
        cfg.recon.prox.cg_tol = get_or<double>(rc, "cg_tol", cfg.recon.prox.cg_tol, "reconstruction");
        cfg.recon.prox.cg_max_iters =
            get_or<int>(rc, "cg_max_iters", cfg.recon.prox.cg_max_iters, "reconstruction");
        cfg.recon.beta = get_or<double>(rc, "beta", cfg.recon.beta, "reconstruction");
        cfg.recon.rho = get_or<double>(rc, "rho", cfg.recon.rho, "reconstruction");
        cfg.recon.max_iters = get_or<int>(rc, "max_iters", cfg.recon.max_iters, "reconstruction");
        cfg.recon.stop_tol = get_or<double>(rc, "stop_tol", cfg.recon.stop_tol, "reconstruction");
        cfg.recon.denoiser_scale =
            get_or<double>(rc, "denoiser_scale", cfg.recon.denoiser_scale, "reconstruction");
        cfg.recon.init_cg_iters =
            get_or<int>(rc, "init_cg_iters", cfg.recon.init_cg_iters, "reconstruction");
        cfg.recon.init_cg_tol =
            get_or<double>(rc, "init_cg_tol", cfg.recon.init_cg_tol, "reconstruction");

        // Threshold defaults sit midway between the shipped materials'
        // attenuation levels at the spectrum's mean energy.
        {
            double e_mean = cfg.spectrum.mean_energy();
            double mu_body = 0.0, mu_metal = 0.0;
            for (const Material& m : cfg.materials) {
                if (m.name == cfg.phantom.body_material)
                    mu_body = attenuation_at(m, cfg.spectrum, e_mean);
                if (!cfg.phantom.disks.empty() &&
                    m.name == cfg.phantom.disks[0].material)
                    mu_metal = attenuation_at(m, cfg.spectrum, e_mean);
            }
            cfg.weighting.tau_object = 0.5 * mu_body;
            cfg.weighting.tau_metal =
                mu_metal > mu_body ? 0.5 * (mu_body + mu_metal) : 2.0 * mu_body;
        }

        YAML::Node wt = root["weighting"];
        cfg.weighting.tau_metal = get_or<double>(wt, "tau_metal", cfg.weighting.tau_metal, "weighting");
        cfg.weighting.tau_object =
            get_or<double>(wt, "tau_object", cfg.weighting.tau_object, "weighting");
        cfg.weighting.alpha = get_or<double>(wt, "alpha", cfg.weighting.alpha, "weighting");
        cfg.weighting.epsilon_rel =
            get_or<double>(wt, "epsilon_rel", cfg.weighting.epsilon_rel, "weighting");

        YAML::Node outn = root["output"];
        cfg.output_dir = get_or<std::string>(outn, "dir", cfg.output_dir, "output");

        cfg.validate();
        return cfg;
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::Config,
             path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

} // namespace mpf
