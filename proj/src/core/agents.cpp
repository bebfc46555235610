#include "core/agents.hpp"

#include <cmath>

#include "core/cg.hpp"
#include "core/error.hpp"

namespace mpf {

void ProxParams::validate() const {
    if (!(sigma > 0.0))
        fail(ErrorCode::Config, "prox sigma must be > 0");
    if (!(cg_tol > 0.0 && cg_tol < 1.0))
        fail(ErrorCode::Config, "prox cg_tol must lie in (0, 1)");
    if (cg_max_iters < 1)
        fail(ErrorCode::Config, "prox cg_max_iters must be >= 1");
}

Volume prox_data(const Volume& v, const Sinogram& y, const ProxParams& p) {
    p.validate();
    v.validate("prox_data input");
    y.validate();
    const double inv_s2 = 1.0 / (p.sigma * p.sigma);
    const GridSpec grid = v.grid;
    const ScanGeometry& g = y.geom;

    // b = A^t Lambda y + v / sigma^2
    Sinogram wy = y;
    for (std::size_t i = 0; i < wy.values.size(); ++i)
        wy.values[i] *= wy.weights[i];
    Volume b = backproject(wy, grid);
    for (std::size_t i = 0; i < b.size(); ++i)
        b.values[i] += v.values[i] * inv_s2;

    Volume x = v; // warm start
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        Volume tmp;
        tmp.grid = grid;
        tmp.values = in;
        Volume ata = gram_apply(g, tmp, &y.weights);
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i)
            out[i] = ata.values[i] + in[i] * inv_s2;
    };
    cg_solve(apply, b.values, x.values, p.cg_tol, p.cg_max_iters);
    x.ensure_finite("prox_data output");
    return x;
}

Volume prox_conjugate(const Volume& v, const Sinogram& y, const PoseTransform& t,
                      const ProxParams& p) {
    return apply_inverse(t, prox_data(apply_transform(t, v), y, p));
}

Volume prox_prior(const Volume& v, double lambda, const ProxParams& p) {
    p.validate();
    v.validate("prox_prior input");
    if (lambda < 0.0)
        fail(ErrorCode::Config, "prox_prior lambda must be >= 0");
    if (lambda == 0.0)
        return v;

    const double c = lambda * p.sigma * p.sigma;
    const int nx = v.grid.dims[0], ny = v.grid.dims[1], nz = v.grid.dims[2];
    // (I + c D^t D) x = v;  D^t D is the path-graph Laplacian per axis.
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        out.assign(in.size(), 0.0);
        for (int z = 0; z < nz; ++z)
            for (int y = 0; y < ny; ++y)
                for (int x = 0; x < nx; ++x) {
                    std::size_t i = (static_cast<std::size_t>(z) * ny + y) * nx + x;
                    double lap = 0.0;
                    if (x > 0)
                        lap += in[i] - in[i - 1];
                    if (x + 1 < nx)
                        lap += in[i] - in[i + 1];
                    if (y > 0)
                        lap += in[i] - in[i - nx];
                    if (y + 1 < ny)
                        lap += in[i] - in[i + nx];
                    if (z > 0)
                        lap += in[i] - in[i - static_cast<std::size_t>(nx) * ny];
                    if (z + 1 < nz)
                        lap += in[i] - in[i + static_cast<std::size_t>(nx) * ny];
                    out[i] = in[i] + c * lap;
                }
    };
    Volume x = v;
    cg_solve(apply, v.values, x.values, p.cg_tol, p.cg_max_iters);
    x.ensure_finite("prox_prior output");
    return x;
}

namespace {

std::vector<double> gaussian_kernel(double scale) {
    int radius = std::max(1, static_cast<int>(std::ceil(4.0 * scale)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        double w = std::exp(-0.5 * (j / scale) * (j / scale));
        k[static_cast<std::size_t>(j + radius)] = w;
        sum += w;
    }
    for (double& w : k)
        w /= sum;
    return k;
}

// Circular convolution along one axis with stride/extent taken from the grid.
void convolve_axis(Volume& v, int axis, const std::vector<double>& kernel) {
    const int n = v.grid.dims[axis];
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    const int nx = v.grid.dims[0], ny = v.grid.dims[1], nz = v.grid.dims[2];
    Volume out(v.grid);

#pragma omp parallel for collapse(2) schedule(static)
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                int idx3[3] = {x, y, z};
                double acc = 0.0;
                for (int j = -radius; j <= radius; ++j) {
                    int pos = idx3[axis] + j;
                    pos %= n;
                    if (pos < 0)
                        pos += n;
                    int c[3] = {x, y, z};
                    c[axis] = pos;
                    acc += kernel[static_cast<std::size_t>(j + radius)] *
                           v.at(c[0], c[1], c[2]);
                }
                out.at(x, y, z) = acc;
            }
        }
    }
    v = std::move(out);
}

} // namespace

Volume denoise(const Volume& v, double scale) {
    v.validate("denoise input");
    if (scale < 0.0)
        fail(ErrorCode::Config, "denoise scale must be >= 0");
    if (scale == 0.0)
        return v;
    auto kernel = gaussian_kernel(scale);
    Volume out = v;
    for (int axis = 0; axis < 3; ++axis)
        if (v.grid.dims[axis] > 1)
            convolve_axis(out, axis, kernel);
    return out;
}

Agent Agent::pose_prox(std::shared_ptr<const Sinogram> sino, PoseTransform t,
                       ProxParams p) {
    if (!sino)
        fail(ErrorCode::Config, "pose agent needs a sinogram");
    sino->validate();
    p.validate();
    Agent a;
    a.kind_ = Kind::ConjugateProx;
    a.sino_ = std::move(sino);
    a.transform_ = t;
    a.prox_ = p;
    return a;
}

Agent Agent::prior_prox(double lambda, ProxParams p) {
    if (lambda < 0.0)
        fail(ErrorCode::Config, "prior agent lambda must be >= 0");
    p.validate();
    Agent a;
    a.kind_ = Kind::PriorProx;
    a.lambda_ = lambda;
    a.prox_ = p;
    return a;
}

Agent Agent::denoiser(double scale) {
    return denoiser(scale, [](const Volume& v, double s) { return denoise(v, s); });
}

Agent Agent::denoiser(double scale, DenoiseFn fn) {
    if (scale < 0.0)
        fail(ErrorCode::Config, "denoiser scale must be >= 0");
    Agent a;
    a.kind_ = Kind::Denoiser;
    a.scale_ = scale;
    a.fn_ = std::move(fn);
    return a;
}

Volume Agent::apply(const Volume& v) const {
    switch (kind_) {
    case Kind::ConjugateProx:
        return prox_conjugate(v, *sino_, transform_, prox_);
    case Kind::PriorProx:
        return prox_prior(v, lambda_, prox_);
    case Kind::Denoiser:
        return fn_(v, scale_);
    }
    fail(ErrorCode::Config, "unknown agent kind");
}

} // namespace mpf
