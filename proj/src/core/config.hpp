// config.hpp - experiment configuration file (YAML with nested sections).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/agents.hpp"
#include "core/projector.hpp"
#include "core/simulate.hpp"
#include "core/transform.hpp"
#include "core/weights.hpp"

namespace mpf {

struct PoseConfig {
    PoseTransform transform = PoseTransform::identity();
    ScanGeometry geometry; // per-pose; usually copied from the shared section
};

struct ReconstructionConfig {
    ProxParams prox;
    double beta = 0.5;
    double rho = 0.5;
    int max_iters = 50;
    double stop_tol = 1e-6;
    double denoiser_scale = 0.8;
    int init_cg_iters = 50;    // truncated-CG weighted least squares initializer
    double init_cg_tol = 1e-4;
};

struct ExperimentConfig {
    PhantomSpec phantom;
    std::vector<Material> materials;
    Spectrum spectrum;
    std::vector<PoseConfig> poses;
    double dose = 1e4;
    std::uint64_t seed = 0;
    ReconstructionConfig recon;
    WeightParams weighting;
    std::string output_dir = "out";

    int pose_count() const { return static_cast<int>(poses.size()); }
    std::vector<PoseTransform> transforms() const;
    std::vector<ScanGeometry> geometries() const;
    void validate() const;
};

ExperimentConfig load_config(const std::string& path);

} // namespace mpf
