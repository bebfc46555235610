// mace.hpp - consensus equilibrium over K pose agents plus one prior agent.
//
// The state stacks K+1 candidate reconstructions.  F applies one agent per
// component; G replaces every component with the pixel-weighted average
//   xbar = 1/(1+beta) * sum_k M_k x_k + beta/(1+beta) * x_K.
// The equilibrium F(x*) = G(x*) is found by Mann iteration on the reflected
// composition (2G - I)(2F - I):
//   x <- F(w);  z <- G(2x - w);  w <- w + 2 rho (z - x).
#pragma once

#include <string>
#include <vector>

#include "core/agents.hpp"
#include "core/volume.hpp"
#include "core/weights.hpp"

namespace mpf {

struct MaceState {
    std::vector<Volume> components; // K+1 volumes on one grid

    static MaceState replicate(const Volume& v, int count);
    void validate() const;
};

struct ConsensusConfig {
    double beta = 0.5;     // prior weight, > 0
    double rho = 0.5;      // Mann step, in (0,1)
    int max_iters = 50;
    double stop_tol = 1e-6; // relative state update threshold
    WeightSet weight_set;   // empty diagonals -> uniform 1/K
    void validate() const;
};

struct MaceIterRecord {
    int iteration = 0;
    double mann_residual = 0.0;           // ||w_new - w_old|| / ||w_old||
    std::vector<double> agent_change;     // ||F_i(w_i) - w_i|| per agent
};

struct MaceDiagnostics {
    std::vector<MaceIterRecord> history;
    int iterations = 0;
    bool converged = false;
    double equilibrium_residual = 0.0; // ||F(w) - G(w)|| / ||w|| at the final state
    std::string table() const;         // plain-text: iter, residual, per-agent norms
};

MaceState apply_F(const MaceState& state, const std::vector<Agent>& agents);
Volume weighted_average(const MaceState& state, const WeightSet& weights, double beta);
MaceState apply_G(const MaceState& state, const WeightSet& weights, double beta);

struct MaceResult {
    Volume reconstruction;
    MaceDiagnostics diagnostics;
};

MaceResult solve_mace(const Volume& x0, const std::vector<Agent>& agents,
                      const ConsensusConfig& cfg);

} // namespace mpf
