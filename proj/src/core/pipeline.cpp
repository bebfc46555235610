#include "core/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>

#include "core/cg.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/mace.hpp"
#include "core/png.hpp"
#include "core/textio.hpp"

namespace fs = std::filesystem;

namespace mpf {

Method parse_method(const std::string& name) {
    if (name == "wls-single")
        return Method::WlsSingle;
    if (name == "pnp-single")
        return Method::PnpSingle;
    if (name == "avg")
        return Method::Avg;
    if (name == "pw-avg")
        return Method::PwAvg;
    if (name == "mpf-baseline")
        return Method::MpfBaseline;
    if (name == "mpf-pixelweighted")
        return Method::MpfPixelweighted;
    fail(ErrorCode::Usage,
         "unknown method '" + name +
             "' (expected wls-single, pnp-single, avg, pw-avg, mpf-baseline or "
             "mpf-pixelweighted)");
}

std::string method_name(Method m) {
    switch (m) {
    case Method::WlsSingle:
        return "wls-single";
    case Method::PnpSingle:
        return "pnp-single";
    case Method::Avg:
        return "avg";
    case Method::PwAvg:
        return "pw-avg";
    case Method::MpfBaseline:
        return "mpf-baseline";
    case Method::MpfPixelweighted:
        return "mpf-pixelweighted";
    }
    fail(ErrorCode::Usage, "unknown method enum value");
}

Volume wls_reconstruct(const Sinogram& s, const GridSpec& grid, double tol,
                       int max_iters) {
    // A^t Lambda A x = A^t Lambda y, truncated CG from zero.
    Sinogram wy = s;
    for (std::size_t i = 0; i < wy.values.size(); ++i)
        wy.values[i] *= wy.weights[i];
    Volume b = backproject(wy, grid);
    Volume x(grid);
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        Volume tmp;
        tmp.grid = grid;
        tmp.values = in;
        out = gram_apply(s.geom, tmp, &s.weights).values;
    };
    cg_solve(apply, b.values, x.values, tol, max_iters);
    x.ensure_finite("wls_reconstruct output");
    return x;
}

namespace {

std::uint64_t pose_seed(std::uint64_t seed, int pose) {
    return seed ^ (static_cast<std::uint64_t>(pose) * 0x9E3779B97F4A7C15ULL);
}

std::string pose_path(const std::string& dir, int pose) {
    return dir + "/pose_" + std::to_string(pose) + ".sin";
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        fail(ErrorCode::Io, dir + ": cannot create output directory (" + ec.message() + ")");
}

Sinogram load_pose_sinogram(const std::string& dir, int pose) {
    std::string p = pose_path(dir, pose);
    if (!fs::exists(p))
        fail(ErrorCode::Io, p + ": sinogram not found (run `simulate` first)");
    return read_sinogram(p);
}

// Compute-and-write unless the file already exists, then read it back, so
// downstream math always consumes the f32 on-disk representation.
Volume ensure_volume(const std::string& path, const std::function<Volume()>& make,
                     std::vector<std::string>& files) {
    if (!fs::exists(path)) {
        write_volume(make(), path);
        files.push_back(path);
    }
    return read_volume(path);
}

void write_meta(const std::string& recon_path, const std::string& method,
                const MaceDiagnostics* diag, std::vector<std::string>& files) {
    std::string path = recon_path + ".meta";
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(ErrorCode::Io, path + ": cannot open for writing");
    os << "method=" << method << "\n";
    if (diag) {
        os << "iterations=" << diag->iterations << "\n";
        os << "converged=" << (diag->converged ? 1 : 0) << "\n";
        os << "equilibrium_residual=" << format_double(diag->equilibrium_residual)
           << "\n";
    }
    files.push_back(path);
}

void write_diag_table(const std::string& recon_path, const MaceDiagnostics& diag,
                      std::vector<std::string>& files) {
    std::string path = recon_path + ".diag.txt";
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(ErrorCode::Io, path + ": cannot open for writing");
    os << diag.table();
    files.push_back(path);
}

struct ReconContext {
    const ExperimentConfig& cfg;
    std::string dir;
    std::vector<std::string>* files;

    std::string vol_path(const std::string& stem) const {
        return dir + "/" + stem + ".vol";
    }

    // Pose-frame WLS initializer for pose k.
    Volume wls_posed(int k) const {
        return ensure_volume(vol_path("wls_pose" + std::to_string(k) + "_posed"),
                             [&] {
                                 Sinogram s = load_pose_sinogram(dir, k);
                                 return wls_reconstruct(s, cfg.phantom.grid,
                                                        cfg.recon.init_cg_tol,
                                                        cfg.recon.init_cg_iters);
                             },
                             *files);
    }

    Volume wls_common(int k) const {
        return ensure_volume(vol_path("wls_pose" + std::to_string(k)),
                             [&] {
                                 return apply_inverse(cfg.poses[k].transform,
                                                      wls_posed(k));
                             },
                             *files);
    }

    // Single-pose plug-and-play in the pose frame: MACE with K = 1 whose only
    // data agent sees the pose sinogram in scanner coordinates.
    Volume pnp_posed(int k, MaceDiagnostics* diag_out) const {
        std::string path = vol_path("pnp_pose" + std::to_string(k) + "_posed");
        if (!fs::exists(path)) {
            auto sino = std::make_shared<Sinogram>(load_pose_sinogram(dir, k));
            Volume x0 = wls_posed(k);
            std::vector<Agent> agents;
            agents.push_back(Agent::pose_prox(sino, PoseTransform::identity(),
                                              cfg.recon.prox));
            agents.push_back(Agent::denoiser(cfg.recon.denoiser_scale));
            ConsensusConfig mc;
            mc.beta = cfg.recon.beta;
            mc.rho = cfg.recon.rho;
            mc.max_iters = cfg.recon.max_iters;
            mc.stop_tol = cfg.recon.stop_tol;
            MaceResult res = solve_mace(x0, agents, mc);
            write_volume(res.reconstruction, path);
            files->push_back(path);
            write_meta(path, "pnp-single", &res.diagnostics, *files);
            write_diag_table(path, res.diagnostics, *files);
            if (diag_out)
                *diag_out = res.diagnostics;
        }
        return read_volume(path);
    }

    Volume pnp_common(int k, MaceDiagnostics* diag_out) const {
        return ensure_volume(vol_path("pnp_pose" + std::to_string(k)),
                             [&] {
                                 return apply_inverse(cfg.poses[k].transform,
                                                      pnp_posed(k, diag_out));
                             },
                             *files);
    }

    // Weights are always recomputed from the (file round-tripped) initial
    // reconstruction; the weight_<k>.vol exports are for inspection only,
    // since the f32 format cannot hold a partition of unity to 1e-9.
    WeightSet pose_weights() const {
        Volume x0 = wls_common(0);
        WeightSet w = compute_pose_weights(x0, cfg.transforms(), cfg.geometries(),
                                           cfg.weighting);
        for (int k = 0; k < w.pose_count(); ++k) {
            std::string path = vol_path("weight_" + std::to_string(k));
            write_volume(w.diagonals[static_cast<std::size_t>(k)], path);
            files->push_back(path);
        }
        return w;
    }

    MaceResult run_multipose(const WeightSet& weights, double beta) const {
        Volume x0 = wls_common(0);
        std::vector<Agent> agents;
        for (int k = 0; k < cfg.pose_count(); ++k) {
            auto sino = std::make_shared<Sinogram>(load_pose_sinogram(dir, k));
            agents.push_back(
                Agent::pose_prox(sino, cfg.poses[k].transform, cfg.recon.prox));
        }
        agents.push_back(Agent::denoiser(cfg.recon.denoiser_scale));
        ConsensusConfig mc;
        mc.beta = beta;
        mc.rho = cfg.recon.rho;
        mc.max_iters = cfg.recon.max_iters;
        mc.stop_tol = cfg.recon.stop_tol;
        mc.weight_set = weights;
        return solve_mace(x0, agents, mc);
    }
};

} // namespace

CommandResult run_simulate(const ExperimentConfig& cfg_in, const std::string& out_dir,
                           std::optional<std::uint64_t> seed_override) {
    auto t_start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = cfg_in;
    if (seed_override)
        cfg.seed = *seed_override;
    cfg.validate();
    std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
    ensure_out_dir(dir);

    CommandResult out;
    PhantomBuild built = build_phantom(cfg.phantom, cfg.materials, cfg.spectrum);
    write_volume(built.truth, dir + "/truth.vol");
    out.files_written.push_back(dir + "/truth.vol");
    write_volume(built.labels, dir + "/labels.vol");
    out.files_written.push_back(dir + "/labels.vol");

    // Label-ordered materials: label 1 -> body, label 2 -> disk metal.
    std::vector<Material> ordered;
    for (const Material& m : cfg.materials)
        if (m.name == cfg.phantom.body_material)
            ordered.push_back(m);
    if (ordered.empty())
        fail(ErrorCode::Config, "body material not found in materials list");
    if (!cfg.phantom.disks.empty()) {
        for (const Material& m : cfg.materials)
            if (m.name == cfg.phantom.disks[0].material)
                ordered.push_back(m);
        if (ordered.size() < 2)
            fail(ErrorCode::Config, "disk material not found in materials list");
    }

    for (int k = 0; k < cfg.pose_count(); ++k) {
        Sinogram s = acquire(built.labels, ordered, cfg.spectrum, cfg.poses[k].geometry,
                             cfg.poses[k].transform, cfg.dose, pose_seed(cfg.seed, k));
        std::string p = pose_path(dir, k);
        write_sinogram(s, p);
        out.files_written.push_back(p);
    }
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

CommandResult run_reconstruct(const ExperimentConfig& cfg_in, Method method, int pose,
                              const std::string& out_dir,
                              std::optional<std::uint64_t> seed_override) {
    auto t_start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = cfg_in;
    if (seed_override)
        cfg.seed = *seed_override;
    cfg.validate();
    std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
    ensure_out_dir(dir);

    CommandResult out;
    ReconContext ctx{cfg, dir, &out.files_written};
    const int n_poses = cfg.pose_count();

    auto check_pose = [&](int k) {
        if (k < 0 || k >= n_poses)
            fail(ErrorCode::Usage, "pose " + std::to_string(k) + " out of range [0, " +
                                       std::to_string(n_poses) + ")");
    };

    switch (method) {
    case Method::WlsSingle: {
        check_pose(pose);
        ctx.wls_common(pose);
        break;
    }
    case Method::PnpSingle: {
        check_pose(pose);
        MaceDiagnostics diag;
        ctx.pnp_common(pose, &diag);
        out.iterations = diag.iterations > 0 ? diag.iterations : -1;
        break;
    }
    case Method::Avg: {
        Volume acc;
        for (int k = 0; k < n_poses; ++k) {
            Volume v = ctx.pnp_common(k, nullptr);
            if (k == 0) {
                acc = v;
            } else {
                require_same_grid(acc, v, "avg");
                for (std::size_t i = 0; i < acc.size(); ++i)
                    acc.values[i] += v.values[i];
            }
        }
        for (double& v : acc.values)
            v /= n_poses;
        std::string p = ctx.vol_path("avg");
        write_volume(acc, p);
        out.files_written.push_back(p);
        write_meta(p, "avg", nullptr, out.files_written);
        break;
    }
    case Method::PwAvg: {
        std::vector<Volume> posed;
        for (int k = 0; k < n_poses; ++k)
            posed.push_back(ctx.pnp_posed(k, nullptr));
        WeightSet w = ctx.pose_weights();
        Volume fused = postprocess_fuse(posed, cfg.transforms(), w);
        std::string p = ctx.vol_path("pw_avg");
        write_volume(fused, p);
        out.files_written.push_back(p);
        write_meta(p, "pw-avg", nullptr, out.files_written);
        break;
    }
    case Method::MpfBaseline: {
        // Equally weighted agents: M_k = I/K together with beta = 1/K, so
        // every effective weight is 1/(K+1).
        WeightSet uniform = WeightSet::uniform(n_poses, cfg.phantom.grid);
        MaceResult res = ctx.run_multipose(uniform, 1.0 / n_poses);
        std::string p = ctx.vol_path("mpf_baseline");
        write_volume(res.reconstruction, p);
        out.files_written.push_back(p);
        out.iterations = res.diagnostics.iterations;
        write_meta(p, "mpf-baseline", &res.diagnostics, out.files_written);
        write_diag_table(p, res.diagnostics, out.files_written);
        break;
    }
    case Method::MpfPixelweighted: {
        WeightSet w = ctx.pose_weights();
        MaceResult res = ctx.run_multipose(w, cfg.recon.beta);
        std::string p = ctx.vol_path("mpf_pixelweighted");
        write_volume(res.reconstruction, p);
        out.files_written.push_back(p);
        out.iterations = res.diagnostics.iterations;
        write_meta(p, "mpf-pixelweighted", &res.diagnostics, out.files_written);
        write_diag_table(p, res.diagnostics, out.files_written);
        break;
    }
    }
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

MetricsReport run_metrics(const std::string& truth_path, const std::string& labels_path,
                          const std::vector<std::string>& recon_paths,
                          const std::string& report_path) {
    Volume truth = read_volume(truth_path);
    Volume labels = read_volume(labels_path);
    MetricsReport report;
    for (const std::string& rp : recon_paths) {
        Volume recon = read_volume(rp);
        std::string name = fs::path(rp).stem().string();
        ReconMetrics m = compute_metrics(name, truth, labels, recon);
        // Iteration counts come from the deterministic .meta sidecar if present.
        std::ifstream meta(rp + ".meta");
        std::string line;
        while (meta && std::getline(meta, line)) {
            const std::string key = "iterations=";
            if (line.rfind(key, 0) == 0)
                m.iterations = static_cast<int>(
                    parse_int(line.substr(key.size()), rp + ".meta"));
        }
        report.entries.push_back(m);
    }
    if (!report_path.empty()) {
        std::ofstream os(report_path, std::ios::binary);
        if (!os)
            fail(ErrorCode::Io, report_path + ": cannot open for writing");
        os << report.key_values();
    }
    return report;
}

void run_export_png(const std::string& volume_path, const std::string& axis,
                    int index, double window_min, double window_max,
                    const std::string& png_path) {
    int ax;
    if (axis == "x")
        ax = 0;
    else if (axis == "y")
        ax = 1;
    else if (axis == "z")
        ax = 2;
    else
        fail(ErrorCode::Usage, "axis must be x, y or z, got '" + axis + "'");
    Volume v = read_volume(volume_path);
    export_png(v, ax, index, window_min, window_max, png_path);
}

} // namespace mpf
