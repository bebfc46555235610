#include "core/weights.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace mpf {

namespace {
constexpr double kPartitionTol = 1e-9;
}

WeightSet WeightSet::uniform(int n_poses, const GridSpec& grid) {
    if (n_poses < 1)
        fail(ErrorCode::Config, "weight set needs at least one pose");
    WeightSet w;
    w.alpha = 0.0;
    w.diagonals.assign(static_cast<std::size_t>(n_poses), Volume(grid, 1.0 / n_poses));
    return w;
}

void WeightSet::validate() const {
    if (diagonals.empty())
        fail(ErrorCode::InvalidWeights, "weight set has no poses");
    const GridSpec& g = diagonals[0].grid;
    for (const Volume& d : diagonals) {
        d.validate("weight diagonal");
        if (!(d.grid == g))
            fail(ErrorCode::Dimension, "weight diagonals are on different grids");
    }
    const std::size_t n = diagonals[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const Volume& d : diagonals) {
            double v = d.values[i];
            if (!(v >= 0.0) || !(v <= 1.0))
                fail(ErrorCode::InvalidWeights, "weight entries must lie in [0, 1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kPartitionTol)
            fail(ErrorCode::InvalidWeights,
                 "weights do not sum to 1 per pixel (got " + std::to_string(sum) + ")");
    }
}

MaskPair make_masks(const Volume& x0, double tau_metal, double tau_object) {
    x0.validate("mask input");
    if (!(tau_metal > tau_object) || !(tau_object > 0.0))
        fail(ErrorCode::Config, "thresholds must satisfy tau_metal > tau_object > 0");
    MaskPair m;
    m.tau_metal = tau_metal;
    m.tau_object = tau_object;
    m.metal = Volume(x0.grid);
    m.object = Volume(x0.grid);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        m.metal.values[i] = x0.values[i] > tau_metal ? 1.0 : 0.0;
        m.object.values[i] = x0.values[i] > tau_object ? 1.0 : 0.0;
    }
    return m;
}

namespace {
void binarize(Volume& v) {
    for (double& x : v.values)
        x = x > 0.5 ? 1.0 : 0.0;
}
} // namespace

MaskPair pose_masks(const MaskPair& m, const PoseTransform& t) {
    MaskPair out;
    out.tau_metal = m.tau_metal;
    out.tau_object = m.tau_object;
    out.metal = apply_transform(t, m.metal);
    out.object = apply_transform(t, m.object);
    if (t.interp() == Interp::Trilinear) {
        binarize(out.metal);
        binarize(out.object);
    }
    return out;
}

DistortionImage distortion_image(const ScanGeometry& g, const MaskPair& posed,
                                 double epsilon) {
    if (!(epsilon > 0.0))
        fail(ErrorCode::Config, "distortion epsilon must be > 0");
    require_same_grid(posed.metal, posed.object, "distortion masks");
    Volume num = gram_apply(g, posed.metal);
    Volume den = gram_apply(g, posed.object);
    DistortionImage d;
    d.epsilon = epsilon;
    d.values = Volume(num.grid);
    for (std::size_t i = 0; i < num.size(); ++i)
        d.values.values[i] = num.values[i] / (den.values[i] + epsilon);
    d.values.ensure_finite("distortion image");
    return d;
}

double relative_epsilon(const ScanGeometry& g, const MaskPair& posed,
                        double epsilon_rel) {
    if (!(epsilon_rel > 0.0))
        fail(ErrorCode::Config, "epsilon_rel must be > 0");
    Volume den = gram_apply(g, posed.object);
    std::vector<double> positive;
    positive.reserve(den.size());
    for (double v : den.values)
        if (v > 0.0)
            positive.push_back(v);
    if (positive.empty())
        return epsilon_rel; // empty object mask: any positive epsilon works
    std::size_t mid = positive.size() / 2;
    std::nth_element(positive.begin(), positive.begin() + mid, positive.end());
    return epsilon_rel * positive[mid];
}

WeightSet softmax_weights(const std::vector<DistortionImage>& distortions,
                          const std::vector<PoseTransform>& transforms,
                          double alpha) {
    const std::size_t k = distortions.size();
    if (k == 0)
        fail(ErrorCode::Config, "softmax_weights needs at least one pose");
    if (transforms.size() != k)
        fail(ErrorCode::Config, "softmax_weights: transform count mismatch");
    if (alpha < 0.0)
        fail(ErrorCode::Config, "softmax alpha must be >= 0");

    // Back-transform each distortion image to the reconstruction frame.
    std::vector<Volume> d(k);
    for (std::size_t i = 0; i < k; ++i) {
        d[i] = apply_inverse(transforms[i], distortions[i].values);
        if (i > 0)
            require_same_grid(d[0], d[i], "distortion images");
    }

    WeightSet w;
    w.alpha = alpha;
    w.diagonals.assign(k, Volume(d[0].grid));
    const std::size_t n = d[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        // softmax of -alpha*d with max subtraction for stability
        double m = -alpha * d[0].values[i];
        for (std::size_t j = 1; j < k; ++j)
            m = std::max(m, -alpha * d[j].values[i]);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            sum += std::exp(-alpha * d[j].values[i] - m);
        for (std::size_t j = 0; j < k; ++j)
            w.diagonals[j].values[i] = std::exp(-alpha * d[j].values[i] - m) / sum;
    }
    w.validate();
    return w;
}

Volume postprocess_fuse(const std::vector<Volume>& recons,
                        const std::vector<PoseTransform>& transforms,
                        const WeightSet& weights) {
    const std::size_t k = recons.size();
    if (k == 0 || transforms.size() != k ||
        static_cast<std::size_t>(weights.pose_count()) != k)
        fail(ErrorCode::Dimension, "postprocess_fuse: list length mismatch");
    weights.validate();

    Volume out(weights.diagonals[0].grid);
    for (std::size_t j = 0; j < k; ++j) {
        Volume common = apply_inverse(transforms[j], recons[j]);
        require_same_grid(common, out, "postprocess_fuse");
        for (std::size_t i = 0; i < out.size(); ++i)
            out.values[i] += weights.diagonals[j].values[i] * common.values[i];
    }
    out.ensure_finite("postprocess_fuse output");
    return out;
}

WeightSet compute_pose_weights(const Volume& x0,
                               const std::vector<PoseTransform>& transforms,
                               const std::vector<ScanGeometry>& geometries,
                               const WeightParams& params) {
    if (transforms.empty() || geometries.size() != transforms.size())
        fail(ErrorCode::Config, "compute_pose_weights: pose list mismatch");
    MaskPair masks = make_masks(x0, params.tau_metal, params.tau_object);
    std::vector<DistortionImage> d;
    d.reserve(transforms.size());
    for (std::size_t k = 0; k < transforms.size(); ++k) {
        MaskPair posed = pose_masks(masks, transforms[k]);
        double eps = relative_epsilon(geometries[k], posed, params.epsilon_rel);
        d.push_back(distortion_image(geometries[k], posed, eps));
    }
    return softmax_weights(d, transforms, params.alpha);
}

} // namespace mpf
