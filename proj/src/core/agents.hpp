// agents.hpp - the consensus agents: data-fidelity proximal maps (in scanner
// and in conjugated pose coordinates), a quadratic smoothness prox, and
// plug-and-play denoisers.
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "core/projector.hpp"
#include "core/transform.hpp"
#include "core/volume.hpp"

namespace mpf {

struct ProxParams {
    double sigma = 0.1;      // proximal strength, image units
    double cg_tol = 1e-6;    // relative residual tolerance
    int cg_max_iters = 200;
    void validate() const;
};

// argmin_x 1/2 ||y - A x||^2_Lambda + 1/(2 sigma^2) ||x - v||^2, solved by CG
// on (A^t Lambda A + I/sigma^2) x = A^t Lambda y + v/sigma^2, warm started at v.
Volume prox_data(const Volume& v, const Sinogram& y, const ProxParams& p);

// T^-1 prox_data(T v); the pose-conjugated proximal map, kept as the literal
// composition so the transform-equivalence property stays testable.
Volume prox_conjugate(const Volume& v, const Sinogram& y, const PoseTransform& t,
                      const ProxParams& p);

// argmin_x lambda/2 ||D x||^2 + 1/(2 sigma^2) ||x - v||^2 with D the
// first-difference operator across each axis.  lambda = 0 returns v exactly.
Volume prox_prior(const Volume& v, double lambda, const ProxParams& p);

// Separable Gaussian smoothing, std dev `scale` voxels, periodic boundary.
// The kernel is normalized, so constants and the volume mean are preserved.
// scale = 0 is the identity.
Volume denoise(const Volume& v, double scale);

using DenoiseFn = std::function<Volume(const Volume&, double scale)>;

class Agent {
  public:
    enum class Kind { ConjugateProx, PriorProx, Denoiser };

    static Agent pose_prox(std::shared_ptr<const Sinogram> sino, PoseTransform t,
                           ProxParams p);
    static Agent prior_prox(double lambda, ProxParams p);
    static Agent denoiser(double scale);
    static Agent denoiser(double scale, DenoiseFn fn); // plug in an alternative

    Volume apply(const Volume& v) const;
    Kind kind() const { return kind_; }

  private:
    Agent() = default;
    Kind kind_ = Kind::Denoiser;
    std::shared_ptr<const Sinogram> sino_;
    PoseTransform transform_ = PoseTransform::identity();
    ProxParams prox_;
    double lambda_ = 0.0;
    double scale_ = 0.0;
    DenoiseFn fn_;
};

} // namespace mpf
