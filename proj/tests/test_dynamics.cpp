#include <doctest.h>

#include <cmath>
#include <vector>

#include "opdyn/dynamics.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/spectral.hpp"
#include "opdyn/stats.hpp"
#include "opdyn/trust.hpp"

using namespace opdyn;

namespace {

UndirectedGraph er_graph(int n, double p, std::uint64_t seed, bool connected = true) {
    GeneratorConfig c;
    c.params = ErParams{n, p};
    c.seed = seed;
    return connected ? generate_connected(c) : generate(c);
}

// Exactly row-stochastic averaging matrix of a graph (weights 1/k_i).
TrustMatrix stochastic_matrix(const UndirectedGraph& g) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.n, g.n);
    for (int i = 0; i < g.n; ++i) {
        const double w = 1.0 / static_cast<double>(g.degree(i));
        if (g.self_loops) m(i, i) = w;
        for (int j : g.adj[i]) m(i, j) = w;
    }
    return TrustMatrix::from_dense(std::move(m));
}

}  // namespace

TEST_CASE("uniform opinions are a fixed point of deterministic averaging") {
    const UndirectedGraph g = er_graph(12, 0.4, 3);
    const TrustMatrix a = stochastic_matrix(g);
    Rng rng(0);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 3.25);
    const Eigen::VectorXd next = step(ModelSpec::degroot(), a, y, rng);
    for (int i = 0; i < 12; ++i) CHECK(next(i) == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("zero-susceptibility anchored update returns the prejudices") {
    const UndirectedGraph g = er_graph(8, 0.5, 4);
    const TrustMatrix a = trust_matrix(g, 0.01);
    Rng rng(0);
    Eigen::VectorXd rho(8);
    for (int i = 0; i < 8; ++i) rho(i) = 0.5 * i - 2.0;
    Eigen::VectorXd y = Eigen::VectorXd::Random(8);
    const Eigen::VectorXd next = step(ModelSpec::fj(0.0, rho), a, y, rng);
    for (int i = 0; i < 8; ++i) CHECK(next(i) == rho(i));
}

TEST_CASE("step validation") {
    const UndirectedGraph g = er_graph(6, 0.6, 5);
    const TrustMatrix sub = trust_matrix(g, 0.01);
    const TrustMatrix stoch = stochastic_matrix(g);
    Rng rng(1);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(6);

    CHECK_THROWS_AS(step(ModelSpec::degroot(), sub, Eigen::VectorXd::Zero(5), rng),
                    std::invalid_argument);
    // noisy dynamics on a row-stochastic matrix are not stationary
    CHECK_THROWS_AS(step(ModelSpec::degroot(NoiseSpec::iid(1.0)), stoch, y, rng),
                    std::domain_error);
    CHECK_NOTHROW(step(ModelSpec::degroot(NoiseSpec::iid(1.0)), sub, y, rng));
    // FJ step needs explicit prejudices
    CHECK_THROWS_AS(step(ModelSpec::fj_random(0.5, 1.0), sub, y, rng), std::invalid_argument);
}

TEST_CASE("pure-noise single node matches its sampling distribution") {
    // A = 0: the opinion is a fresh Gaussian draw every step.
    const TrustMatrix a = TrustMatrix::from_dense(Eigen::MatrixXd::Zero(1, 1));
    const ModelSpec model = ModelSpec::degroot(NoiseSpec::iid(1.0));
    Rng rng(77);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
    double sum = 0.0, sum_sq = 0.0;
    const int steps = 100000;
    for (int t = 0; t < steps; ++t) {
        y = step(model, a, y, rng);
        sum += y(0);
        sum_sq += y(0) * y(0);
    }
    const double mean = sum / steps;
    const double var = sum_sq / steps - mean * mean;
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("noise variance kernels") {
    const UndirectedGraph g = er_graph(10, 0.5, 6);
    const TrustMatrix a = trust_matrix(g, 0.01);

    SUBCASE("global uniqueness at the mean keeps the full variance") {
        const Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 1.7);  // y_i == mean
        const Eigen::VectorXd v =
            noise_variances(NoiseSpec::global_uniqueness(2.0, 50.0), y, a);
        for (int i = 0; i < 10; ++i) CHECK(v(i) == 2.0);
    }
    SUBCASE("beta = 0 recovers the non-adaptive levels") {
        Eigen::VectorXd y(10);
        for (int i = 0; i < 10; ++i) y(i) = 0.3 * i;
        const Eigen::VectorXd gu = noise_variances(NoiseSpec::global_uniqueness(1.5, 0.0), y, a);
        const Eigen::VectorXd lu = noise_variances(NoiseSpec::local_uniqueness(1.5, 0.0), y, a);
        for (int i = 0; i < 10; ++i) {
            CHECK(gu(i) == 1.5);
            // sum_j A_ij = 1/(1+eta): near-iid but scaled by the slack
            CHECK(lu(i) == doctest::Approx(1.5 / 1.01).epsilon(1e-12));
        }
    }
    SUBCASE("global uniqueness a unit away from the mean is suppressed by e^-beta") {
        Eigen::VectorXd y(2);
        y << -1.0, 1.0;  // mean 0, |y_i - mean| = 1
        UndirectedGraph pair(2, true);
        pair.add_edge(0, 1);
        const TrustMatrix a2 = trust_matrix(pair, 0.01);
        const Eigen::VectorXd v =
            noise_variances(NoiseSpec::global_uniqueness(1.0, 100.0), y, a2);
        for (int i = 0; i < 2; ++i) {
            CHECK(v(i) == doctest::Approx(std::exp(-100.0)).epsilon(1e-12));
            CHECK(v(i) < 1e-40);
        }
    }
}

TEST_CASE("deterministic consensus on a connected stochastic matrix") {
    const UndirectedGraph g = er_graph(20, 0.3, 8);
    const TrustMatrix a = stochastic_matrix(g);
    SimulationConfig cfg;
    cfg.steps = 10000;
    cfg.burn_in = 9999;
    cfg.seed = 42;
    const Trajectory traj = run(ModelSpec::degroot(), a, cfg);
    const Eigen::VectorXd terminal = traj.opinions.row(cfg.steps);
    CHECK(terminal.maxCoeff() - terminal.minCoeff() < 1e-6);
}

TEST_CASE("fixed seeds reproduce trajectories bit for bit") {
    const UndirectedGraph g = er_graph(15, 0.4, 9);
    const TrustMatrix a = trust_matrix(g, 0.01);
    const ModelSpec model = ModelSpec::degroot(NoiseSpec::iid(1.0));
    SimulationConfig cfg;
    cfg.steps = 50;
    cfg.burn_in = 10;
    cfg.seed = 1234;
    const Trajectory t1 = run(model, a, cfg);
    const Trajectory t2 = run(model, a, cfg);
    CHECK((t1.opinions.array() == t2.opinions.array()).all());
}

TEST_CASE("sigma2 = 0 reproduces the deterministic trajectory exactly") {
    const UndirectedGraph g = er_graph(10, 0.5, 10);
    const TrustMatrix a = trust_matrix(g, 0.01);
    SimulationConfig cfg;
    cfg.steps = 40;
    cfg.burn_in = 5;
    cfg.seed = 5;
    cfg.initial_variance = 1.0;  // same start for both models
    const Trajectory noisy = run(ModelSpec::degroot(NoiseSpec::iid(0.0)), a, cfg);
    const Trajectory clean = run(ModelSpec::degroot(NoiseSpec::none()), a, cfg);
    CHECK((noisy.opinions.array() == clean.opinions.array()).all());
}

TEST_CASE("ensemble bookkeeping and single-replica reduction") {
    const UndirectedGraph g = er_graph(12, 0.5, 11);
    const TrustMatrix a = trust_matrix(g, 0.01);
    const ModelSpec model = ModelSpec::degroot(NoiseSpec::iid(1.0));
    SimulationConfig cfg;
    cfg.steps = 60;
    cfg.burn_in = 20;
    cfg.replicas = 5;
    cfg.seed = 77;
    const EnsembleResult ens = run_ensemble(model, a, cfg);
    CHECK(ens.replicas.size() == 5);
    CHECK(ens.pooled_terminal.size() == 5 * 12);

    // replica 0 replays from its recorded seed
    const ReplicaStats replay = run_replica(model, a, cfg, ens.replicas[0].seed);
    CHECK(replay.realized_d == ens.replicas[0].realized_d);
    CHECK(replay.msd_zero == ens.replicas[0].msd_zero);
    CHECK(replay.mad == ens.replicas[0].mad);

    // jobs > 1 yields identical results
    const EnsembleResult par = run_ensemble(model, a, cfg, 4);
    for (std::size_t r = 0; r < ens.replicas.size(); ++r) {
        CHECK(par.replicas[r].realized_d == ens.replicas[r].realized_d);
        CHECK(par.replicas[r].seed == ens.replicas[r].seed);
    }
    CHECK(par.pooled_terminal == ens.pooled_terminal);
}

TEST_CASE("isolated self-looped nodes are independent AR(1) processes") {
    // Pooled terminal opinions must pass a KS test against the AR(1)
    // stationary law N(0, sigma2 / (1 - (1+eta)^-2)) in >= 90% of repetitions.
    const double eta = 0.01;
    const double lambda = 1.0 / (1.0 + eta);
    const double stationary_var = 1.0 / (1.0 - lambda * lambda);
    UndirectedGraph isolated(50, true);
    const TrustMatrix a = trust_matrix(isolated, eta);
    const ModelSpec model = ModelSpec::degroot(NoiseSpec::iid(1.0));

    int passes = 0;
    for (int rep = 0; rep < 100; ++rep) {
        SimulationConfig cfg;
        cfg.steps = 500;
        cfg.burn_in = 400;
        cfg.replicas = 10;
        cfg.seed = derive_seed(31337, rep);
        const EnsembleResult ens = run_ensemble(model, a, cfg);
        const KSResult ks = ks_test(ens.pooled_terminal, 0.0, stationary_var);
        if (ks.p_value > 0.05) ++passes;
    }
    CHECK(passes >= 90);
}

TEST_CASE("stationary opinions of iid ensembles look gaussian with variance d") {
    // Thinned to one rotating node per well-spaced snapshot: opinions within a
    // snapshot share the slow consensus coordinate, so the full pool is not an
    // i.i.d. sample and would over-reject any reference distribution.
    const UndirectedGraph g = er_graph(100, 0.5, 13);
    const TrustMatrix a = trust_matrix(g, 0.01);
    const ModelSpec model = ModelSpec::degroot(NoiseSpec::iid(1.0));
    int passes = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        SimulationConfig cfg;
        cfg.steps = 5000;
        cfg.burn_in = 4900;
        cfg.replicas = 10;
        cfg.pool_snapshots = 12;
        cfg.pool_stride = 375;
        cfg.seed = derive_seed(424242, rep);
        const EnsembleResult ens = run_ensemble(model, a, cfg);
        const std::vector<double> sample = thin_pooled_sample(ens, g.n, 1);
        if (ks_test(sample, 0.0, ens.predicted_d).p_value > 0.05) ++passes;
    }
    CHECK(passes >= 18);  // >= 90%
}

TEST_CASE("windowed diversity shows no drift at stationarity") {
    const UndirectedGraph g = er_graph(50, 0.3, 14);
    const TrustMatrix a = trust_matrix(g, 0.01);
    SimulationConfig cfg;
    cfg.steps = 2000;
    cfg.burn_in = 0;
    cfg.seed = 4;
    const Trajectory traj = run(ModelSpec::degroot(NoiseSpec::iid(1.0)), a, cfg);

    const auto window_mean = [&](int from, int to) {
        double acc = 0.0;
        for (int t = from; t <= to; ++t) {
            const Eigen::VectorXd y = traj.opinions.row(t);
            const double mean = y.mean();
            acc += (y.array() - mean).square().sum() / y.size();
        }
        return acc / (to - from + 1);
    };
    const double first = window_mean(1000, 2000);
    const double second = window_mean(1500, 2000);
    CHECK(std::abs(first - second) / first < 0.10);
}

TEST_CASE("local uniqueness stays below global uniqueness (paired graphs)") {
    const double beta = 5.0;
    const int draws = 50;
    double diff_sum = 0.0, diff_sq = 0.0;
    for (int k = 0; k < draws; ++k) {
        const UndirectedGraph g = er_graph(50, 0.3, derive_seed(60, k));
        const TrustMatrix a = trust_matrix(g, 0.01);
        SimulationConfig cfg;
        cfg.steps = 300;
        cfg.burn_in = 100;
        cfg.replicas = 6;
        cfg.seed = derive_seed(61, k);
        const double d_gu =
            run_ensemble(ModelSpec::degroot(NoiseSpec::global_uniqueness(1.0, beta)), a, cfg)
                .mean_realized_d();
        const double d_lu =
            run_ensemble(ModelSpec::degroot(NoiseSpec::local_uniqueness(1.0, beta)), a, cfg)
                .mean_realized_d();
        const double diff = d_lu - d_gu;
        diff_sum += diff;
        diff_sq += diff * diff;
    }
    const double mean = diff_sum / draws;
    const double var = diff_sq / draws - mean * mean;
    const double se = std::sqrt(var / draws);
    CHECK(mean <= 0.0);
    CHECK(mean < -2.0 * se);  // one-sided: LU is significantly lower
}

TEST_CASE("ensemble mean opinion stays near zero at all recorded times") {
    const UndirectedGraph g = er_graph(50, 0.3, 15);
    const TrustMatrix a = trust_matrix(g, 0.01);
    const ModelSpec model = ModelSpec::degroot(NoiseSpec::iid(1.0));
    const int replicas = 100, steps = 300;
    Eigen::MatrixXd means(replicas, steps + 1);
    for (int r = 0; r < replicas; ++r) {
        SimulationConfig cfg;
        cfg.steps = steps;
        cfg.burn_in = 1;
        cfg.seed = derive_seed(1717, r);
        const Trajectory traj = run(model, a, cfg);
        for (int t = 0; t <= steps; ++t) means(r, t) = traj.opinions.row(t).mean();
    }
    for (int t = 1; t <= steps; ++t) {
        const double m = means.col(t).mean();
        const double sd = std::sqrt((means.col(t).array() - m).square().sum() / (replicas - 1));
        const double se = sd / std::sqrt(static_cast<double>(replicas));
        CHECK(std::abs(m) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("fj fixed point") {
    const UndirectedGraph g = er_graph(10, 0.5, 16);
    const TrustMatrix a = trust_matrix(g, 0.01);
    Eigen::VectorXd rho(10);
    for (int i = 0; i < 10; ++i) rho(i) = std::sin(1.0 + i);

    SUBCASE("zero susceptibility returns the prejudices") {
        const Eigen::VectorXd y = fj_fixed_point(a, 0.0, rho);
        for (int i = 0; i < 10; ++i) CHECK(y(i) == doctest::Approx(rho(i)).epsilon(1e-14));
    }
    SUBCASE("zero prejudices give the zero fixed point") {
        const Eigen::VectorXd y = fj_fixed_point(a, 0.7, Eigen::VectorXd::Zero(10));
        CHECK(y.cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("the fixed point is invariant under the deterministic update") {
        const Eigen::VectorXd y = fj_fixed_point(a, 0.6, rho);
        Rng rng(0);
        const Eigen::VectorXd next = step(ModelSpec::fj(0.6, rho), a, y, rng);
        CHECK((next - y).cwiseAbs().maxCoeff() < 1e-10);
    }
}
