#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <set>

#include "opdyn/graph.hpp"
#include "opdyn/rng.hpp"
#include "opdyn/trust.hpp"
#include "oracles.hpp"

using namespace opdyn;

namespace {

GeneratorConfig er_config(int n, double p, std::uint64_t seed) {
    GeneratorConfig c;
    c.params = ErParams{n, p};
    c.seed = seed;
    return c;
}

std::set<std::pair<int, int>> edge_set(const UndirectedGraph& g) {
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < g.n; ++i)
        for (int j : g.adj[i])
            if (j > i) edges.insert({i, j});
    return edges;
}

}  // namespace

TEST_CASE("er with p=1 is the complete graph plus self-edges") {
    const UndirectedGraph g = generate(er_config(4, 1.0, 123));
    CHECK(g.n == 4);
    CHECK(g.self_loops);
    CHECK(g.edge_count() == 6);
    for (int i = 0; i < 4; ++i) CHECK(g.degree(i) == 4);  // 3 neighbors + self
    CHECK(g.has_edge(2, 2));
}

TEST_CASE("er with p=0 is empty") {
    const UndirectedGraph g = generate(er_config(5, 0.0, 1));
    CHECK(g.edge_count() == 0);
    CHECK(g.degree(0) == 1);  // the self-edge
}

TEST_CASE("ws q=0 ring lattice is deterministic with degree k and clustering 1/2") {
    GeneratorConfig c;
    c.params = WsParams{20, 4, 0.0};
    c.seed = 7;
    const UndirectedGraph g = generate(c);
    c.seed = 99;  // q=0 consumes no randomness
    const UndirectedGraph h = generate(c);
    CHECK(edge_set(g) == edge_set(h));

    std::vector<std::vector<int>> plain_adj = g.adj;
    for (int i = 0; i < g.n; ++i) {
        CHECK(g.adj[i].size() == 4);
        CHECK(oracles::clustering_bruteforce(i, plain_adj) == doctest::Approx(0.5));
    }
    const NetworkFeatures f = features(g);
    CHECK(f.avg_clustering == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("generator parameter validation") {
    CHECK_THROWS_AS(generate(er_config(10, 1.5, 0)), std::invalid_argument);
    GeneratorConfig ws;
    ws.params = WsParams{10, 3, 0.1};  // odd k
    CHECK_THROWS_AS(generate(ws), std::invalid_argument);
    ws.params = WsParams{10, 10, 0.1};  // k >= n
    CHECK_THROWS_AS(generate(ws), std::invalid_argument);
    GeneratorConfig sbm;
    sbm.params = SbmParams{{5, 5}, {{0.5, 0.2}, {0.3, 0.5}}};  // asymmetric
    CHECK_THROWS_AS(generate(sbm), std::invalid_argument);
}

TEST_CASE("generate_connected retries and reports failure") {
    GeneratorConfig c = er_config(40, 0.15, 5);
    const UndirectedGraph g = generate_connected(c);
    CHECK(g.connected());

    GeneratorConfig impossible = er_config(5, 0.0, 1);
    CHECK_THROWS_AS(generate_connected(impossible, 50), std::runtime_error);
}

TEST_CASE("sbm with uniform block matrix matches the er edge-count law") {
    const int n = 100;
    const double p = 0.3;
    const int draws = 200;
    double total = 0.0;
    for (int d = 0; d < draws; ++d) {
        GeneratorConfig c;
        c.params = SbmParams{{50, 50}, {{p, p}, {p, p}}};
        c.seed = derive_seed(2024, d);
        total += static_cast<double>(generate(c).edge_count());
    }
    const double pairs = n * (n - 1) / 2.0;
    const double expected = pairs * p;
    const double sd = std::sqrt(pairs * p * (1.0 - p));
    CHECK(std::abs(total / draws - expected) <= 3.0 * sd / std::sqrt(draws));
}

TEST_CASE("er edge count concentrates on N(N-1)p/2 over 1000 draws") {
    const int n = 50;
    const double p = 0.3;
    double total = 0.0;
    for (int d = 0; d < 1000; ++d)
        total += static_cast<double>(generate(er_config(n, p, derive_seed(11, d))).edge_count());
    const double pairs = n * (n - 1) / 2.0;
    const double sd = std::sqrt(pairs * p * (1.0 - p));
    CHECK(std::abs(total / 1000.0 - pairs * p) <= 3.0 * sd / std::sqrt(1000.0));
}

TEST_CASE("ws q=1 clustering approaches the er level k/N") {
    // Fully rewired lattices are er-like, not er: each node keeps k/2 stubs,
    // so the clustering mean sits near k/N without matching it exactly. The
    // tolerance band is three single-draw standard deviations.
    const int n = 100, k = 10;
    const int draws = 200;
    double total = 0.0, total_sq = 0.0;
    for (int d = 0; d < draws; ++d) {
        GeneratorConfig c;
        c.params = WsParams{n, k, 1.0};
        c.seed = derive_seed(404, d);
        const double cc = features(generate(c)).avg_clustering;
        total += cc;
        total_sq += cc * cc;
    }
    const double mean = total / draws;
    const double sd = std::sqrt(total_sq / draws - mean * mean);
    CHECK(std::abs(mean - static_cast<double>(k) / n) <= 3.0 * sd);
}

TEST_CASE("sbm with uniform blocks is indistinguishable from er on the degree histogram") {
    // Pool degrees over 200 draws and chi-square them against Binomial(n-1, p).
    const int n = 100;
    const double p = 0.3;
    const int draws = 200;
    std::vector<double> counts(n, 0.0);
    for (int d = 0; d < draws; ++d) {
        GeneratorConfig c;
        c.params = SbmParams{{50, 50}, {{p, p}, {p, p}}};
        c.seed = derive_seed(777, d);
        const UndirectedGraph g = generate(c);
        for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(g.adj[i].size())] += 1.0;
    }
    // Binomial pmf by recurrence.
    std::vector<double> pmf(n, 0.0);
    pmf[0] = std::pow(1.0 - p, n - 1);
    for (int d = 1; d < n; ++d)
        pmf[d] = pmf[d - 1] * (static_cast<double>(n - d) / d) * (p / (1.0 - p));
    const double total = static_cast<double>(draws) * n;

    // Merge bins until every expected count is >= 5.
    double chi2 = 0.0;
    int bins = 0;
    double exp_acc = 0.0, obs_acc = 0.0;
    for (int d = 0; d < n; ++d) {
        exp_acc += pmf[d] * total;
        obs_acc += counts[d];
        if (exp_acc >= 5.0 && (total - 0.0) > 0) {
            chi2 += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
            ++bins;
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
    }
    if (exp_acc > 0.0) {
        chi2 += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
        ++bins;
    }
    boost::math::chi_squared dist(bins - 1);
    const double critical = boost::math::quantile(dist, 0.99);
    CHECK(chi2 <= critical);
}

TEST_CASE("trust matrix weights and row sums") {
    SUBCASE("single node with self-edge") {
        UndirectedGraph g(1, true);
        const TrustMatrix a = trust_matrix(g, 0.01);
        CHECK(a.matrix()(0, 0) == doctest::Approx(1.0 / 1.01).epsilon(1e-15));
    }
    SUBCASE("two-node path with self-edges") {
        UndirectedGraph g(2, true);
        g.add_edge(0, 1);
        const TrustMatrix a = trust_matrix(g, 0.01);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(a.matrix()(i, j) == doctest::Approx(1.0 / 2.02).epsilon(1e-15));
        CHECK(a.row_sums()(0) == doctest::Approx(1.0 / 1.01).epsilon(1e-15));
    }
    SUBCASE("row sums equal 1/(1+eta) to machine precision on random graphs") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const UndirectedGraph g = generate(er_config(60, 0.2, seed));
            const TrustMatrix a = trust_matrix(g, 0.01);
            const Eigen::VectorXd sums = a.row_sums();
            for (int i = 0; i < g.n; ++i) CHECK(std::abs(sums(i) - 1.0 / 1.01) < 1e-12);
            CHECK(std::abs(a.max_row_sum() - 1.0 / 1.01) < 1e-12);
        }
    }
}

TEST_CASE("trust matrix rejects bad inputs") {
    UndirectedGraph g(3, true);
    CHECK_THROWS_AS(trust_matrix(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(trust_matrix(g, -0.5), std::invalid_argument);
    UndirectedGraph isolated(2, false);  // no self-edges, no edges at all
    CHECK_THROWS_AS(trust_matrix(isolated, 0.01), std::invalid_argument);
}

TEST_CASE("features on the complete graph") {
    const UndirectedGraph g = generate(er_config(5, 1.0, 0));
    const NetworkFeatures f = features(g);
    CHECK(f.density == doctest::Approx(1.0));
    CHECK(f.avg_clustering == doctest::Approx(1.0));
    REQUIRE(f.avg_shortest_path.has_value());
    CHECK(*f.avg_shortest_path == doctest::Approx(1.0));
    CHECK(f.connected);
}

TEST_CASE("features on the star graph") {
    UndirectedGraph g(5, true);
    for (int leaf = 1; leaf < 5; ++leaf) g.add_edge(0, leaf);
    const NetworkFeatures f = features(g);
    CHECK(f.density == doctest::Approx(0.4));
    CHECK(f.avg_clustering == doctest::Approx(0.0));
    REQUIRE(f.avg_shortest_path.has_value());
    CHECK(*f.avg_shortest_path == doctest::Approx(1.6));
    CHECK(f.avg_degree == doctest::Approx(1.6));  // 2 * 4 / 5
}

TEST_CASE("features report disconnection by omitting the path length") {
    UndirectedGraph g(4, true);
    g.add_edge(0, 1);  // component {0,1}; nodes 2 and 3 are isolated
    const NetworkFeatures f = features(g);
    CHECK_FALSE(f.connected);
    CHECK_FALSE(f.avg_shortest_path.has_value());
}
