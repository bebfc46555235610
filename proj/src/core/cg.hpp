// cg.hpp - conjugate gradient for SPD operator equations.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/volume.hpp"

namespace mpf {

struct CgResult {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

// Solves A x = b for SPD A given as apply(x, out).  x is the warm start and
// receives the solution.  Stops when ||r|| <= tol * ||b|| or at max_iters.
// Ten consecutive iterations of residual growth raise a Solver error, as does
// a direction of nonpositive curvature.
template <typename ApplyFn>
CgResult cg_solve(ApplyFn&& apply, const std::vector<double>& b,
                  std::vector<double>& x, double tol, int max_iters) {
    const std::size_t n = b.size();
    if (x.size() != n)
        fail(ErrorCode::Dimension, "cg_solve: warm start size mismatch");
    double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {0, 0.0, true};
    }

    std::vector<double> r(n), p(n), ap(n);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = b[i] - ap[i];
    p = r;
    double rr = dot(r, r);
    double rnorm = std::sqrt(rr);
    double prev_rnorm = rnorm;
    int growth_streak = 0;

    CgResult res;
    res.rel_residual = rnorm / bnorm;
    if (res.rel_residual <= tol) {
        res.converged = true;
        return res;
    }

    for (int it = 1; it <= max_iters; ++it) {
        apply(p, ap);
        double pap = dot(p, ap);
        if (!(pap > 0.0))
            fail(ErrorCode::Solver,
                 "cg_solve: nonpositive curvature at iteration " + std::to_string(it) +
                     " (operator not positive definite)");
        double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_next = dot(r, r);
        rnorm = std::sqrt(rr_next);
        if (!std::isfinite(rnorm))
            fail(ErrorCode::Solver, "cg_solve: non-finite residual at iteration " +
                                        std::to_string(it));
        growth_streak = rnorm > prev_rnorm ? growth_streak + 1 : 0;
        if (growth_streak >= 10)
            fail(ErrorCode::Solver,
                 "cg_solve: residual grew for 10 consecutive iterations (" +
                     std::to_string(rnorm / bnorm) + " relative at iteration " +
                     std::to_string(it) + ")");
        prev_rnorm = rnorm;
        res.iterations = it;
        res.rel_residual = rnorm / bnorm;
        if (res.rel_residual <= tol) {
            res.converged = true;
            return res;
        }
        double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = r[i] + beta * p[i];
    }
    return res;
}

} // namespace mpf
