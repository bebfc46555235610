// mpfct_main.cpp - command line front end for the reconstruction engine.
// Talks to the engine exclusively through the public C API.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpf/mpf.h"

namespace {

int exit_code(mpf_status rc) {
    switch (rc) {
    case MPF_OK:
        return 0;
    case MPF_ERR_SOLVER:
    case MPF_ERR_NUMERIC:
        return 3;
    default:
        return 2;
    }
}

int finish(mpf_status rc, const char* what) {
    if (rc != MPF_OK)
        std::fprintf(stderr, "mpfct: %s failed: %s\n", what, mpf_last_error());
    return exit_code(rc);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-pose fusion CT reconstruction engine"};
    app.require_subcommand(1);

    std::string config_path, out_dir, method = "mpf-pixelweighted";
    std::uint64_t seed = 0;
    bool have_seed = false;
    int pose = -1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* copt = cmd->add_option("--config", config_path, "experiment config file");
        if (needs_config)
            copt->required();
        cmd->add_option("--out", out_dir, "output directory (defaults to config output.dir)");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { have_seed = true; });
    };

    auto* sim = app.add_subcommand("simulate", "generate phantom, labels and per-pose sinograms");
    add_common(sim, true);

    auto* rec = app.add_subcommand("reconstruct", "reconstruct from simulated sinograms");
    add_common(rec, true);
    rec->add_option("--method", method,
                    "wls-single | pnp-single | avg | pw-avg | mpf-baseline | mpf-pixelweighted")
        ->required();
    rec->add_option("--pose", pose, "pose index for single-pose methods (default 0)");

    std::string truth_path, labels_path, report_path;
    std::vector<std::string> recon_paths;
    auto* met = app.add_subcommand("metrics", "ground-truth RMSE report for reconstructions");
    met->add_option("--truth", truth_path, "ground-truth volume")->required();
    met->add_option("--labels", labels_path, "label map volume")->required();
    met->add_option("--report", report_path, "write machine-readable key=value report here");
    met->add_option("recons", recon_paths, "reconstruction volumes")->required();

    std::string volume_path, axis = "z", png_path;
    int slice_index = 0;
    double window_min = 0.0, window_max = 1.0;
    auto* png = app.add_subcommand("export-png", "export a windowed 8-bit grayscale slice");
    png->add_option("volume", volume_path, "input volume")->required();
    png->add_option("--axis", axis, "slice axis: x, y or z (default z)");
    png->add_option("--index", slice_index, "slice index")->required();
    png->add_option("--min", window_min, "window minimum")->required();
    png->add_option("--max", window_max, "window maximum")->required();
    png->add_option("--png", png_path, "output PNG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::uint64_t* seed_ptr = have_seed ? &seed : nullptr;
    const char* out_ptr = out_dir.empty() ? nullptr : out_dir.c_str();

    if (sim->parsed())
        return finish(mpf_simulate(config_path.c_str(), out_ptr, seed_ptr), "simulate");

    if (rec->parsed())
        return finish(mpf_reconstruct(config_path.c_str(), method.c_str(), pose,
                                      out_ptr, seed_ptr),
                      "reconstruct");

    if (met->parsed()) {
        std::vector<const char*> paths;
        paths.reserve(recon_paths.size());
        for (const auto& p : recon_paths)
            paths.push_back(p.c_str());
        char* table = nullptr;
        mpf_status rc = mpf_metrics(truth_path.c_str(), labels_path.c_str(),
                                    paths.data(), paths.size(),
                                    report_path.empty() ? nullptr : report_path.c_str(),
                                    &table);
        if (rc == MPF_OK && table)
            std::fputs(table, stdout);
        mpf_string_free(table);
        return finish(rc, "metrics");
    }

    if (png->parsed())
        return finish(mpf_export_png(volume_path.c_str(), axis.c_str(), slice_index,
                                     window_min, window_max, png_path.c_str()),
                      "export-png");

    return 2;
}
