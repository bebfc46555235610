// weights.hpp - pixel-wise weight construction for metal artifact reduction
// and pixel-weighted post-processing fusion.
#pragma once

#include <vector>

#include "core/projector.hpp"
#include "core/transform.hpp"
#include "core/volume.hpp"

namespace mpf {

struct MaskPair {
    Volume metal;  // {0,1}-valued
    Volume object; // {0,1}-valued, metal is a subset
    double tau_metal = 0.0;  // mm^-1
    double tau_object = 0.0; // mm^-1
};

struct DistortionImage {
    Volume values; // >= 0, in the pose frame
    double epsilon = 0.0;
};

// K diagonal weight volumes; per pixel they are in [0,1] and sum to 1.
struct WeightSet {
    std::vector<Volume> diagonals;
    double alpha = 0.0; // softmax sharpness used to build them (0 = uniform)

    int pose_count() const { return static_cast<int>(diagonals.size()); }
    static WeightSet uniform(int n_poses, const GridSpec& grid);
    void validate() const; // partition of unity within 1e-9, entries in [0,1]
};

// Strict-greater thresholding of an initial reconstruction.
MaskPair make_masks(const Volume& x0, double tau_metal, double tau_object);

// Transform both masks to a measurement pose.  Trilinear outputs are
// re-binarized at 0.5 so downstream math keeps indicator semantics.
MaskPair pose_masks(const MaskPair& m, const PoseTransform& t);

// [D]_i = [A^t A metal]_i / ([A^t A object]_i + epsilon)
DistortionImage distortion_image(const ScanGeometry& g, const MaskPair& posed,
                                 double epsilon);

// epsilon_rel * median of the strictly positive entries of A^t A object;
// the shipped default for the absolute epsilon above.
double relative_epsilon(const ScanGeometry& g, const MaskPair& posed,
                        double epsilon_rel);

// Per-pixel softmax over poses of the back-transformed distortion images.
WeightSet softmax_weights(const std::vector<DistortionImage>& distortions,
                          const std::vector<PoseTransform>& transforms,
                          double alpha);

// sum_k M_k * T_k^-1 x_k for pose-frame reconstructions x_k.
Volume postprocess_fuse(const std::vector<Volume>& recons,
                        const std::vector<PoseTransform>& transforms,
                        const WeightSet& weights);

struct WeightParams {
    double tau_metal = 0.0;
    double tau_object = 0.0;
    double alpha = 4.0;
    double epsilon_rel = 1e-6;
};

// mask -> pose -> distortion -> softmax, one call per experiment; a pure
// composition of the operations above.
WeightSet compute_pose_weights(const Volume& x0,
                               const std::vector<PoseTransform>& transforms,
                               const std::vector<ScanGeometry>& geometries,
                               const WeightParams& params);

} // namespace mpf
