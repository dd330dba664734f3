#include <doctest.h>

#include <cmath>
#include <numeric>

#include "opdyn/graph.hpp"
#include "opdyn/rng.hpp"
#include "opdyn/spectral.hpp"
#include "opdyn/trust.hpp"
#include "oracles.hpp"

using namespace opdyn;

namespace {

UndirectedGraph er_graph(int n, double p, std::uint64_t seed, bool connected = false) {
    GeneratorConfig c;
    c.params = ErParams{n, p};
    c.seed = seed;
    return connected ? generate_connected(c) : generate(c);
}

}  // namespace

TEST_CASE("spectrum of isolated self-looped nodes is 1/(1+eta) repeated") {
    UndirectedGraph g(3, true);
    const TrustMatrix a = trust_matrix(g, 0.01);
    const Spectrum s = spectrum(a);
    REQUIRE(s.size() == 3);
    for (double ev : s.eigenvalues) CHECK(ev == doctest::Approx(1.0 / 1.01).epsilon(1e-14));
    CHECK_FALSE(s.has_complex);
}

TEST_CASE("spectrum of the two-node complete graph with self-edges") {
    UndirectedGraph g(2, true);
    g.add_edge(0, 1);
    const Spectrum s = spectrum(trust_matrix(g, 0.01));
    REQUIRE(s.size() == 2);
    CHECK(s.eigenvalues[0] == doctest::Approx(1.0 / 1.01).epsilon(1e-13));
    CHECK(s.eigenvalues[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
}

TEST_CASE("spectrum matches an independent jacobi eigensolver") {
    const UndirectedGraph g = er_graph(30, 0.3, 42, true);
    const TrustMatrix a = trust_matrix(g, 0.01);
    const Spectrum s = spectrum(a);

    // The oracle diagonalizes the symmetrized similarity transform directly.
    const auto& scale = a.symmetrizing_scale();
    Eigen::MatrixXd m(30, 30);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 30; ++j)
            m(i, j) = std::sqrt(scale[i]) * a.matrix()(i, j) / std::sqrt(scale[j]);
    const auto expected = oracles::jacobi_eigenvalues(m);
    REQUIRE(static_cast<int>(expected.size()) == s.size());
    for (int i = 0; i < s.size(); ++i)
        CHECK(s.eigenvalues[i] == doctest::Approx(expected[i]).epsilon(1e-8));
}

TEST_CASE("eigenvalue sum equals the trace and lambda_1 equals 1/(1+eta)") {
    const UndirectedGraph g = er_graph(50, 0.2, 9, true);
    const TrustMatrix a = trust_matrix(g, 0.01);
    const Spectrum s = spectrum(a);
    const double sum = std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
    CHECK(std::abs(sum - a.matrix().trace()) < 1e-8);
    CHECK(std::abs(s.eigenvalues.front() - 1.0 / 1.01) < 1e-8);
}

TEST_CASE("diversity_degroot closed-form cases") {
    SUBCASE("all-zero spectrum gives d = sigma2") {
        const Spectrum s = Spectrum::from_values({0.0, 0.0, 0.0, 0.0, 0.0});
        CHECK(diversity_degroot(s, 1.0).d == 1.0);
        CHECK(diversity_degroot(s, 2.5).d == 2.5);
    }
    SUBCASE("two-mode spectrum from the 2-node complete graph") {
        const Spectrum s = Spectrum::from_values({1.0 / 1.01, 0.0});
        CHECK(diversity_degroot(s, 1.0).d == doctest::Approx(25.875621890547263).epsilon(1e-12));
    }
    SUBCASE("non-stationary spectra are refused") {
        const Spectrum s = Spectrum::from_values({1.0, 0.0});
        CHECK_THROWS_AS(diversity_degroot(s, 1.0), std::domain_error);
    }
    SUBCASE("complex-flagged spectra are refused") {
        Spectrum s = Spectrum::from_values({0.5, 0.1});
        s.has_complex = true;
        CHECK_THROWS_AS(diversity_degroot(s, 1.0), std::domain_error);
        CHECK_NOTHROW(diversity_directed_bound(s, 1.0));
    }
}

TEST_CASE("diversity_fj endpoints and validation") {
    Rng rng(3);
    std::vector<double> values(40);
    for (double& v : values) v = 0.9 * (2.0 * rng.uniform() - 1.0);
    const Spectrum s = Spectrum::from_values(values);

    SUBCASE("s=0 equals sigma2 + xi2 exactly, independent of the spectrum") {
        CHECK(diversity_fj(s, 0.5, 0.5, 0.0).d == 1.0);
        CHECK(diversity_fj(s, 0.25, 1.75, 0.0).d == 2.0);
    }
    SUBCASE("s=1 reduces to the degroot expression to machine precision") {
        const double fj = diversity_fj(s, 1.3, 7.0, 1.0).d;
        const double deg = diversity_degroot(s, 1.3).d;
        CHECK(fj == doctest::Approx(deg).epsilon(1e-14));
    }
    SUBCASE("susceptibility out of range") {
        CHECK_THROWS_AS(diversity_fj(s, 1.0, 1.0, -0.1), std::domain_error);
        CHECK_THROWS_AS(diversity_fj(s, 1.0, 1.0, 1.1), std::domain_error);
    }
}

TEST_CASE("directed bound dominates and hits the all-zero closed form") {
    SUBCASE("zero spectrum: every term is 1, bound = sigma2 * N") {
        const Spectrum s = Spectrum::from_values({0.0, 0.0, 0.0});
        const auto b = diversity_directed_bound(s, 1.0);
        CHECK(b.d == doctest::Approx(3.0));
        CHECK(b.kind == PredictionKind::UpperBoundDirected);
    }
    SUBCASE("bound >= exact value for symmetric inputs") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const UndirectedGraph g = er_graph(25, 0.3, seed, true);
            const Spectrum s = spectrum(trust_matrix(g, 0.01));
            CHECK(diversity_directed_bound(s, 1.0).d >= diversity_degroot(s, 1.0).d);
        }
    }
}

TEST_CASE("marginal contributions") {
    const Spectrum s = Spectrum::from_values({1.0 / 1.01, 0.5, 0.0});
    const auto c = marginal_contributions(s);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == doctest::Approx(50.75124378109453).epsilon(1e-12));
    CHECK(c[2] == 1.0);

    // The sum scaled by sigma2/N reproduces diversity_degroot exactly: the
    // implementation accumulates the same terms in the same order.
    const double sigma2 = 1.7;
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    CHECK(sigma2 / 3.0 * total == diversity_degroot(s, sigma2).d);
}

TEST_CASE("denser er graphs never have larger predicted diversity (paired draws)") {
    // Pair each graph with a denser one built by adding edges to it.
    const int pairs = 100;
    double diff_sum = 0.0, diff_sq = 0.0;
    for (int k = 0; k < pairs; ++k) {
        UndirectedGraph sparse = er_graph(60, 0.25, derive_seed(55, k), true);
        UndirectedGraph dense = sparse;
        Rng rng(derive_seed(56, k));
        for (int i = 0; i < dense.n; ++i)
            for (int j = i + 1; j < dense.n; ++j)
                if (!dense.has_edge(i, j) && rng.bernoulli(0.15)) dense.add_edge(i, j);
        const double d_sparse = diversity_degroot(spectrum(trust_matrix(sparse, 0.01)), 1.0).d;
        const double d_dense = diversity_degroot(spectrum(trust_matrix(dense, 0.01)), 1.0).d;
        const double diff = d_sparse - d_dense;
        diff_sum += diff;
        diff_sq += diff * diff;
    }
    const double mean = diff_sum / pairs;
    const double var = diff_sq / pairs - mean * mean;
    const double se = std::sqrt(var / pairs);
    CHECK(mean > 0.0);
    CHECK(mean > 2.0 * se);  // significantly positive, not a fluke
}

TEST_CASE("genuinely directed matrices flag complex spectra") {
    // A 3-cycle with unequal weights has a complex eigenvalue pair.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(0, 1) = 0.9;
    m(1, 2) = 0.9;
    m(2, 0) = 0.9;
    const TrustMatrix a = TrustMatrix::from_dense(m);
    CHECK(a.directed());
    const Spectrum s = spectrum(a);
    CHECK(s.has_complex);
    CHECK_THROWS_AS(diversity_degroot(s, 1.0), std::domain_error);
    CHECK_NOTHROW(diversity_directed_bound(s, 1.0));
}
