// pipeline.hpp - command drivers behind the CLI and the C API: simulate,
// reconstruct (six methods), metrics, PNG export.
//
// All artifacts are deterministic functions of config + seed.  Intermediate
// volumes consumed by later stages are always round-tripped through their
// on-disk f32 representation, so outputs do not depend on which files already
// existed when a command ran.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/metrics.hpp"

namespace mpf {

enum class Method {
    WlsSingle,        // plain weighted least squares, one pose
    PnpSingle,        // plug-and-play (MACE with K = 1), one pose
    Avg,              // unweighted average of the single-pose PnP results
    PwAvg,            // pixel-weighted post-processing fusion
    MpfBaseline,      // multi-pose MACE, equally weighted agents
    MpfPixelweighted, // multi-pose MACE with softmax pixel weights
};

Method parse_method(const std::string& name); // Usage error on unknown names
std::string method_name(Method m);

struct CommandResult {
    std::vector<std::string> files_written;
    int iterations = -1;
    double runtime_seconds = 0.0;
};

CommandResult run_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                           std::optional<std::uint64_t> seed_override);

CommandResult run_reconstruct(const ExperimentConfig& cfg, Method method, int pose,
                              const std::string& out_dir,
                              std::optional<std::uint64_t> seed_override);

MetricsReport run_metrics(const std::string& truth_path, const std::string& labels_path,
                          const std::vector<std::string>& recon_paths,
                          const std::string& report_path); // empty = don't write

void run_export_png(const std::string& volume_path, const std::string& axis,
                    int index, double window_min, double window_max,
                    const std::string& png_path);

// Truncated-CG weighted least squares reconstruction in the pose frame.
Volume wls_reconstruct(const Sinogram& s, const GridSpec& grid, double tol,
                       int max_iters);

} // namespace mpf
