#include "core/mace.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"

namespace mpf {

MaceState MaceState::replicate(const Volume& v, int count) {
    if (count < 2)
        fail(ErrorCode::Config, "MACE state needs at least two components (K >= 1)");
    MaceState s;
    s.components.assign(static_cast<std::size_t>(count), v);
    return s;
}

void MaceState::validate() const {
    if (components.size() < 2)
        fail(ErrorCode::Config, "MACE state needs at least two components (K >= 1)");
    for (const Volume& c : components) {
        c.validate("MACE state component");
        if (!(c.grid == components[0].grid))
            fail(ErrorCode::Dimension, "MACE state components are on different grids");
    }
}

void ConsensusConfig::validate() const {
    if (!(beta > 0.0))
        fail(ErrorCode::Config, "beta must be > 0");
    if (!(rho > 0.0 && rho < 1.0))
        fail(ErrorCode::Config, "rho must lie in (0, 1)");
    if (max_iters < 1)
        fail(ErrorCode::Config, "max_iters must be >= 1");
    if (!(stop_tol > 0.0))
        fail(ErrorCode::Config, "stop_tol must be > 0");
}

MaceState apply_F(const MaceState& state, const std::vector<Agent>& agents) {
    state.validate();
    if (agents.size() != state.components.size())
        fail(ErrorCode::Config, "agent count does not match MACE state size");
    MaceState out;
    out.components.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
        out.components.push_back(agents[i].apply(state.components[i]));
    return out;
}

Volume weighted_average(const MaceState& state, const WeightSet& weights, double beta) {
    state.validate();
    if (!(beta > 0.0))
        fail(ErrorCode::Config, "beta must be > 0");
    const std::size_t k = state.components.size() - 1;
    if (static_cast<std::size_t>(weights.pose_count()) != k)
        fail(ErrorCode::Config, "weight set size does not match pose agent count");
    for (const Volume& d : weights.diagonals)
        require_same_grid(d, state.components[0], "weighted_average");
    weights.validate();

    const double data_scale = 1.0 / (1.0 + beta);
    const double prior_scale = beta / (1.0 + beta);
    Volume out(state.components[0].grid);
    const std::size_t n = out.size();
    for (std::size_t j = 0; j < k; ++j) {
        const auto& m = weights.diagonals[j].values;
        const auto& x = state.components[j].values;
        for (std::size_t i = 0; i < n; ++i)
            out.values[i] += m[i] * x[i];
    }
    const auto& prior = state.components[k].values;
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = data_scale * out.values[i] + prior_scale * prior[i];
    return out;
}

MaceState apply_G(const MaceState& state, const WeightSet& weights, double beta) {
    Volume avg = weighted_average(state, weights, beta);
    MaceState out;
    out.components.assign(state.components.size(), avg);
    return out;
}

namespace {

double state_norm(const MaceState& s) {
    double acc = 0.0;
    for (const Volume& c : s.components)
        acc += dot(c.values, c.values);
    return std::sqrt(acc);
}

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6e", v);
    return buf;
}

} // namespace

std::string MaceDiagnostics::table() const {
    std::ostringstream os;
    os << "iter  mann_residual";
    std::size_t agents = history.empty() ? 0 : history[0].agent_change.size();
    for (std::size_t i = 0; i < agents; ++i)
        os << "  agent" << i << "_change";
    os << "\n";
    for (const auto& rec : history) {
        os << rec.iteration << "  " << fmt_sci(rec.mann_residual);
        for (double c : rec.agent_change)
            os << "  " << fmt_sci(c);
        os << "\n";
    }
    os << "equilibrium_residual " << fmt_sci(equilibrium_residual) << "\n";
    os << "iterations " << iterations << "\n";
    os << "converged " << (converged ? 1 : 0) << "\n";
    return os.str();
}

MaceResult solve_mace(const Volume& x0, const std::vector<Agent>& agents,
                      const ConsensusConfig& cfg) {
    cfg.validate();
    x0.validate("solve_mace x0");
    if (agents.size() < 2)
        fail(ErrorCode::Config, "solve_mace needs K >= 1 pose agents plus a prior agent");
    const int n_components = static_cast<int>(agents.size());
    const int n_poses = n_components - 1;

    WeightSet weights = cfg.weight_set;
    if (weights.diagonals.empty())
        weights = WeightSet::uniform(n_poses, x0.grid);
    if (weights.pose_count() != n_poses)
        fail(ErrorCode::Config, "weight set size does not match pose agent count");

    MaceState w = MaceState::replicate(x0, n_components);
    MaceState x;
    MaceDiagnostics diag;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        x = apply_F(w, agents);

        MaceIterRecord rec;
        rec.iteration = iter;
        rec.agent_change.reserve(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i) {
            double acc = 0.0;
            const auto& a = x.components[i].values;
            const auto& b = w.components[i].values;
            for (std::size_t j = 0; j < a.size(); ++j)
                acc += (a[j] - b[j]) * (a[j] - b[j]);
            rec.agent_change.push_back(std::sqrt(acc));
        }

        // Equilibrium residual ||F(w) - G(w)|| / ||w|| at the current state,
        // reusing x = F(w).
        double w_norm = state_norm(w);
        Volume gbar = weighted_average(w, weights, cfg.beta);
        double eq_acc = 0.0;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const auto& a = x.components[i].values;
            for (std::size_t j = 0; j < a.size(); ++j)
                eq_acc += (a[j] - gbar.values[j]) * (a[j] - gbar.values[j]);
        }
        diag.equilibrium_residual =
            w_norm > 0.0 ? std::sqrt(eq_acc) / w_norm : std::sqrt(eq_acc);

        // z = G(2x - w)
        MaceState mid;
        mid.components.reserve(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i) {
            Volume t = x.components[i];
            const auto& wi = w.components[i].values;
            for (std::size_t j = 0; j < t.size(); ++j)
                t.values[j] = 2.0 * t.values[j] - wi[j];
            mid.components.push_back(std::move(t));
        }
        Volume zbar = weighted_average(mid, weights, cfg.beta);

        double update = 0.0;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            auto& wi = w.components[i].values;
            const auto& xi = x.components[i].values;
            for (std::size_t j = 0; j < wi.size(); ++j) {
                double dw = 2.0 * cfg.rho * (zbar.values[j] - xi[j]);
                wi[j] += dw;
                update += dw * dw;
            }
        }
        update = std::sqrt(update);
        rec.mann_residual = w_norm > 0.0 ? update / w_norm : update;
        diag.history.push_back(rec);
        diag.iterations = iter;

        for (const Volume& c : w.components)
            for (double v : c.values)
                if (!std::isfinite(v))
                    fail(ErrorCode::Solver, "solve_mace diverged to non-finite values at iteration " +
                                                std::to_string(iter));

        if (rec.mann_residual <= cfg.stop_tol) {
            diag.converged = true;
            break;
        }
    }

    MaceResult res;
    res.reconstruction = weighted_average(x, weights, cfg.beta);
    res.diagnostics = std::move(diag);
    res.reconstruction.ensure_finite("solve_mace reconstruction");
    return res;
}

} // namespace mpf
