#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/mace.hpp"
#include "support/oracles.hpp"

using namespace mpf;

namespace {

const double kPi = 3.14159265358979323846;

ScanGeometry make_geom(int views, int rows, int cols, double pitch) {
    ScanGeometry g;
    g.n_views = views;
    g.n_det_rows = rows;
    g.n_det_cols = cols;
    g.det_pitch = pitch;
    g.angles = ScanGeometry::even_angles(views, 0.0, kPi);
    return g;
}

// A scalar data agent: prox of 1/2 (x - target)^2 realized through the real
// projector on a 1x1x1 grid (A = [1]).
Agent scalar_agent(double target, double sigma) {
    ScanGeometry g = make_geom(1, 1, 1, 1.0);
    auto s = std::make_shared<Sinogram>(g);
    s->values[0] = target;
    ProxParams p;
    p.sigma = sigma;
    p.cg_tol = 1e-14;
    p.cg_max_iters = 50;
    return Agent::pose_prox(s, PoseTransform::identity(), p);
}

WeightSet normalized_weights(const std::vector<Volume>& raw) {
    WeightSet w;
    w.diagonals = raw;
    const std::size_t n = raw[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const Volume& d : w.diagonals)
            sum += d.values[i];
        for (Volume& d : w.diagonals)
            d.values[i] /= sum;
    }
    return w;
}

MaceState random_state(const GridSpec& g, int count, std::uint64_t seed) {
    MaceState s;
    for (int i = 0; i < count; ++i)
        s.components.push_back(oracle::random_volume(g, seed + i, -1.0, 1.0));
    return s;
}

double state_rel_diff(const MaceState& a, const MaceState& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.components.size(); ++i)
        for (std::size_t j = 0; j < a.components[i].size(); ++j) {
            double d = a.components[i].values[j] - b.components[i].values[j];
            num += d * d;
            den += b.components[i].values[j] * b.components[i].values[j];
        }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("apply_F") {
    GridSpec g{{6, 6, 1}, {1, 1, 1}};
    SUBCASE("identity agents leave the state unchanged") {
        MaceState s = random_state(g, 3, 10);
        std::vector<Agent> agents(3, Agent::denoiser(0.0));
        MaceState out = apply_F(s, agents);
        for (int i = 0; i < 3; ++i)
            CHECK(out.components[i].values == s.components[i].values);
    }
    SUBCASE("components match individually computed agent outputs") {
        ScanGeometry geom = make_geom(4, 1, 9, 1.0);
        auto sino = std::make_shared<Sinogram>(project(geom, oracle::random_volume(g, 11)));
        ProxParams p;
        p.sigma = 0.5;
        p.cg_tol = 1e-10;
        p.cg_max_iters = 200;
        std::vector<Agent> agents = {Agent::pose_prox(sino, PoseTransform::identity(), p),
                                     Agent::denoiser(0.0)};
        MaceState s = random_state(g, 2, 12);
        MaceState out = apply_F(s, agents);
        CHECK(out.components[0].values ==
              prox_data(s.components[0], *sino, p).values);
        CHECK(out.components[1].values == s.components[1].values);
    }
    SUBCASE("component i depends only on input component i") {
        std::vector<Agent> agents = {Agent::denoiser(1.0), Agent::denoiser(1.0)};
        MaceState s = random_state(g, 2, 13);
        MaceState out1 = apply_F(s, agents);
        s.components[1].values[5] += 10.0; // perturb the other component
        MaceState out2 = apply_F(s, agents);
        CHECK(out1.components[0].values == out2.components[0].values);
    }
    SUBCASE("agent count mismatch is a configuration error") {
        MaceState s = random_state(g, 3, 14);
        std::vector<Agent> agents(2, Agent::denoiser(0.0));
        CHECK_THROWS_AS((void)apply_F(s, agents), Error);
    }
}

TEST_CASE("weighted_average") {
    GridSpec g{{4, 4, 1}, {1, 1, 1}};
    SUBCASE("scalar example") {
        // K = 2: x0 = 1, x1 = 3, prior = 0, M0 = 0.25, M1 = 0.75, beta = 1
        // -> (0.25*1 + 0.75*3)/2 + (1/2)*0 = 1.25
        GridSpec one{{1, 1, 1}, {1, 1, 1}};
        MaceState s;
        s.components = {Volume(one, 1.0), Volume(one, 3.0), Volume(one, 0.0)};
        WeightSet w;
        w.diagonals = {Volume(one, 0.25), Volume(one, 0.75)};
        Volume out = weighted_average(s, w, 1.0);
        CHECK(out.values[0] == doctest::Approx(1.25).epsilon(1e-15));
    }
    SUBCASE("equal components pass through exactly for dyadic weights") {
        MaceState s;
        s.components.assign(3, Volume(g, 0.731));
        WeightSet w;
        w.diagonals = {Volume(g, 0.25), Volume(g, 0.75)};
        Volume out = weighted_average(s, w, 1.0);
        CHECK(out.values == s.components[0].values);
    }
    SUBCASE("equal components pass through to rounding for any valid weights") {
        MaceState s;
        s.components.assign(4, Volume(g, -1.37));
        WeightSet w = normalized_weights({oracle::random_volume(g, 20, 0.1, 1.0),
                                          oracle::random_volume(g, 21, 0.1, 1.0),
                                          oracle::random_volume(g, 22, 0.1, 1.0)});
        Volume out = weighted_average(s, w, 0.7);
        for (double v : out.values)
            CHECK(v == doctest::Approx(-1.37).epsilon(1e-14));
    }
    SUBCASE("large beta returns the prior component") {
        MaceState s = random_state(g, 3, 30);
        WeightSet w = WeightSet::uniform(2, g);
        Volume out = weighted_average(s, w, 1e9);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            double d = out.values[i] - s.components[2].values[i];
            num += d * d;
            den += s.components[2].values[i] * s.components[2].values[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-8);
    }
    SUBCASE("broken partition of unity is rejected") {
        MaceState s = random_state(g, 3, 31);
        WeightSet w;
        w.diagonals = {Volume(g, 0.6), Volume(g, 0.6)}; // sums to 1.2
        CHECK_THROWS_AS((void)weighted_average(s, w, 1.0), Error);
    }
    SUBCASE("per-pixel homogeneity: rescaling + renormalizing changes nothing") {
        MaceState s = random_state(g, 3, 32);
        std::vector<Volume> raw = {oracle::random_volume(g, 33, 0.1, 1.0),
                                   oracle::random_volume(g, 34, 0.1, 1.0)};
        WeightSet w1 = normalized_weights(raw);
        // dyadic per-pixel rescale commutes with rounding -> bit-exact
        Volume scale(g);
        for (std::size_t i = 0; i < scale.size(); ++i)
            scale.values[i] = (i % 3 == 0) ? 0.5 : ((i % 3 == 1) ? 2.0 : 4.0);
        std::vector<Volume> scaled = raw;
        for (Volume& d : scaled)
            for (std::size_t i = 0; i < d.size(); ++i)
                d.values[i] *= scale.values[i];
        WeightSet w2 = normalized_weights(scaled);
        Volume a = weighted_average(s, w1, 0.8);
        Volume b = weighted_average(s, w2, 0.8);
        CHECK(a.values == b.values);

        // arbitrary positive rescale agrees to rounding
        for (std::size_t k = 0; k < scaled.size(); ++k)
            for (std::size_t i = 0; i < scaled[k].size(); ++i)
                scaled[k].values[i] = raw[k].values[i] * (1.0 + 0.3 * (i % 7));
        WeightSet w3 = normalized_weights(scaled);
        Volume c = weighted_average(s, w3, 0.8);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num += (c.values[i] - a.values[i]) * (c.values[i] - a.values[i]);
            den += a.values[i] * a.values[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-12);
    }
}

TEST_CASE("apply_G identities") {
    GridSpec g{{5, 5, 2}, {1, 1, 1}};
    for (int trial = 0; trial < 10; ++trial) {
        MaceState s = random_state(g, 3, 100 + 10 * trial);
        WeightSet w = normalized_weights({oracle::random_volume(g, 500 + trial, 0.1, 1.0),
                                          oracle::random_volume(g, 600 + trial, 0.1, 1.0)});
        const double beta = 0.5 + 0.1 * trial;

        MaceState g1 = apply_G(s, w, beta);
        MaceState g2 = apply_G(g1, w, beta);
        CHECK(state_rel_diff(g2, g1) <= 1e-12); // idempotence

        // involution of the reflection: (2G - I)(2G - I) = I
        MaceState r1 = g1;
        for (std::size_t i = 0; i < r1.components.size(); ++i)
            for (std::size_t j = 0; j < r1.components[i].size(); ++j)
                r1.components[i].values[j] =
                    2.0 * g1.components[i].values[j] - s.components[i].values[j];
        MaceState gr = apply_G(r1, w, beta);
        MaceState r2 = gr;
        for (std::size_t i = 0; i < r2.components.size(); ++i)
            for (std::size_t j = 0; j < r2.components[i].size(); ++j)
                r2.components[i].values[j] =
                    2.0 * gr.components[i].values[j] - r1.components[i].values[j];
        CHECK(state_rel_diff(r2, s) <= 1e-12);
    }

    SUBCASE("uniform weights and equal components change nothing") {
        MaceState s;
        s.components.assign(3, oracle::random_volume(g, 700, -1, 1));
        WeightSet w = WeightSet::uniform(2, g);
        MaceState out = apply_G(s, w, 0.5);
        for (const Volume& c : out.components) {
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < c.size(); ++j) {
                double d = c.values[j] - s.components[0].values[j];
                num += d * d;
                den += s.components[0].values[j] * s.components[0].values[j];
            }
            CHECK(std::sqrt(num / den) <= 1e-15);
        }
    }
}

TEST_CASE("solve_mace on the 1-D consensus toy converges to the joint minimizer") {
    // Agents: prox of 1/2 (x-2)^2, prox of 1/2 (x-4)^2, identity prior; all
    // effective weights 1/3 -> equilibrium equals argmin of the sum, x = 3.
    GridSpec one{{1, 1, 1}, {1, 1, 1}};
    std::vector<Agent> agents = {scalar_agent(2.0, 1.0), scalar_agent(4.0, 1.0),
                                 Agent::denoiser(0.0)};
    ConsensusConfig cfg;
    cfg.beta = 0.5;
    cfg.rho = 0.5;
    cfg.max_iters = 500;
    cfg.stop_tol = 1e-12;
    MaceResult res = solve_mace(Volume(one, 0.0), agents, cfg);

    CHECK(res.reconstruction.values[0] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(res.diagnostics.converged);
    // Mann residual contracts by >= 1e6 over the run.
    REQUIRE(res.diagnostics.history.size() >= 2);
    double first = res.diagnostics.history.front().mann_residual;
    double last = res.diagnostics.history.back().mann_residual;
    CHECK(last <= 1e-6 * first);
    // equilibrium residual is reported and small
    CHECK(res.diagnostics.equilibrium_residual <= 1e-8);
}

TEST_CASE("solve_mace with identity agents stops immediately at zero residual") {
    GridSpec g{{6, 6, 1}, {1, 1, 1}};
    Volume x0 = oracle::random_volume(g, 800, -1, 1);
    // K = 1, beta = 1: the averaging weights are dyadic, so the fixed point
    // is exact in floating point.
    std::vector<Agent> agents = {Agent::denoiser(0.0), Agent::denoiser(0.0)};
    ConsensusConfig cfg;
    cfg.beta = 1.0;
    cfg.rho = 0.5;
    cfg.max_iters = 50;
    cfg.stop_tol = 1e-12;
    MaceResult res = solve_mace(x0, agents, cfg);
    CHECK(res.diagnostics.iterations == 1);
    CHECK(res.diagnostics.history[0].mann_residual == 0.0);
    CHECK(res.diagnostics.converged);
    CHECK(res.reconstruction.values == x0.values);
}

namespace {

struct TwoPoseProblem {
    GridSpec grid{{16, 16, 1}, {1, 1, 1}};
    ScanGeometry geom = make_geom(12, 1, 24, 1.0);
    std::vector<PoseTransform> transforms;
    std::vector<std::shared_ptr<Sinogram>> sinos;
    double lambda = 0.5;
    double sigma = 0.4;

    TwoPoseProblem() {
        transforms = {PoseTransform::identity(),
                      PoseTransform::from_euler(0, 0, kPi / 2, {0, 0, 0},
                                                Interp::ExactLattice)};
        Volume obj = oracle::random_volume(grid, 900, 0.0, 0.05);
        for (const auto& t : transforms) {
            Sinogram s = project(geom, apply_transform(t, obj));
            s.weights = transmission_weights(s.values);
            sinos.push_back(std::make_shared<Sinogram>(s));
        }
    }

    std::vector<Agent> agents(bool swap_poses = false) const {
        ProxParams p;
        p.sigma = sigma;
        p.cg_tol = 1e-10;
        p.cg_max_iters = 500;
        std::vector<Agent> out;
        int order[2] = {swap_poses ? 1 : 0, swap_poses ? 0 : 1};
        for (int k : order)
            out.push_back(Agent::pose_prox(sinos[static_cast<std::size_t>(k)],
                                           transforms[static_cast<std::size_t>(k)], p));
        out.push_back(Agent::prior_prox(lambda, p));
        return out;
    }

    Eigen::VectorXd dense_joint_minimizer() const {
        Eigen::MatrixXd a = oracle::dense_projection_matrix(geom, grid);
        Eigen::MatrixXd m = lambda * oracle::dense_laplacian(grid);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m.rows());
        for (std::size_t k = 0; k < transforms.size(); ++k) {
            Eigen::MatrixXd at = a * oracle::dense_transform_matrix(transforms[k], grid);
            Eigen::VectorXd lam = oracle::to_eigen(sinos[k]->weights);
            m += at.transpose() * lam.asDiagonal() * at;
            rhs += at.transpose() * (lam.asDiagonal() * oracle::to_eigen(sinos[k]->values));
        }
        return m.ldlt().solve(rhs);
    }
};

} // namespace

TEST_CASE("solve_mace with all-prox agents matches the dense joint minimizer") {
    TwoPoseProblem prob;
    ConsensusConfig cfg;
    cfg.beta = 0.5; // M_k = I/2 with beta = 1/2: all effective weights 1/3
    cfg.rho = 0.5;
    cfg.max_iters = 200;
    cfg.stop_tol = 1e-10;
    MaceResult res = solve_mace(Volume(prob.grid, 0.0), prob.agents(), cfg);

    Eigen::VectorXd want = prob.dense_joint_minimizer();
    CHECK(oracle::rel_l2_error(res.reconstruction.values, want) <= 1e-4);
    CHECK(res.diagnostics.iterations <= 200);

    SUBCASE("the result is invariant to agent ordering under uniform weights") {
        MaceResult swapped = solve_mace(Volume(prob.grid, 0.0), prob.agents(true), cfg);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < res.reconstruction.size(); ++i) {
            double d = swapped.reconstruction.values[i] - res.reconstruction.values[i];
            num += d * d;
            den += res.reconstruction.values[i] * res.reconstruction.values[i];
        }
        CHECK(std::sqrt(num / den) <= 2.0 * cfg.stop_tol * 100);
    }
}

TEST_CASE("solve_mace reports a divergence error on non-finite blowup") {
    GridSpec one{{1, 1, 1}, {1, 1, 1}};
    std::vector<Agent> agents = {
        Agent::denoiser(1.0, [](const Volume& v, double) {
            Volume out = v;
            for (double& x : out.values)
                x = x * 1e200 + 1e200; // forces inf within a few iterations
            return out;
        }),
        Agent::denoiser(0.0)};
    ConsensusConfig cfg;
    cfg.beta = 1.0;
    cfg.rho = 0.5;
    cfg.max_iters = 50;
    cfg.stop_tol = 1e-12;
    CHECK_THROWS_AS((void)solve_mace(Volume(one, 1.0), agents, cfg), Error);
}

TEST_CASE("diagnostics table lists one row per iteration") {
    GridSpec one{{1, 1, 1}, {1, 1, 1}};
    std::vector<Agent> agents = {scalar_agent(2.0, 1.0), Agent::denoiser(0.0)};
    ConsensusConfig cfg;
    cfg.beta = 1.0;
    cfg.rho = 0.5;
    cfg.max_iters = 20;
    cfg.stop_tol = 1e-3;
    MaceResult res = solve_mace(Volume(one, 0.0), agents, cfg);
    std::string table = res.diagnostics.table();
    CHECK(table.find("mann_residual") != std::string::npos);
    CHECK(table.find("agent0_change") != std::string::npos);
    CHECK(table.find("equilibrium_residual") != std::string::npos);
    // header + one line per iteration + 3 trailing summary lines
    std::size_t lines = std::count(table.begin(), table.end(), '\n');
    CHECK(lines == 1 + res.diagnostics.history.size() + 3);
}
