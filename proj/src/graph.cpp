#include "opdyn/graph.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>

#include "opdyn/rng.hpp"

namespace opdyn {

std::size_t UndirectedGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& nbrs : adj) twice += nbrs.size();
    return twice / 2;
}

bool UndirectedGraph::has_edge(int i, int j) const {
    if (i == j) return self_loops;
    const auto& nbrs = adj[i];
    return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

void UndirectedGraph::add_edge(int i, int j) {
    if (i == j) return;
    auto& a = adj[i];
    auto it = std::lower_bound(a.begin(), a.end(), j);
    if (it != a.end() && *it == j) return;
    a.insert(it, j);
    auto& b = adj[j];
    b.insert(std::lower_bound(b.begin(), b.end(), i), i);
}

bool UndirectedGraph::connected() const {
    if (n <= 1) return true;
    std::vector<char> seen(n, 0);
    std::queue<int> queue;
    queue.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                queue.push(v);
            }
        }
    }
    return reached == n;
}

namespace {

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

UndirectedGraph generate_er(const ErParams& er, bool self_loops, Rng& rng) {
    if (er.n < 1) throw std::invalid_argument("er: n must be >= 1");
    check_probability(er.p, "er: p");
    UndirectedGraph g(er.n, self_loops);
    for (int i = 0; i < er.n; ++i)
        for (int j = i + 1; j < er.n; ++j)
            if (rng.bernoulli(er.p)) g.add_edge(i, j);
    return g;
}

UndirectedGraph generate_ws(const WsParams& ws, bool self_loops, Rng& rng) {
    if (ws.n < 1) throw std::invalid_argument("ws: n must be >= 1");
    if (ws.k < 0 || ws.k % 2 != 0) throw std::invalid_argument("ws: k must be even and >= 0");
    if (ws.k >= ws.n) throw std::invalid_argument("ws: k must be < n");
    check_probability(ws.q, "ws: q");

    UndirectedGraph g(ws.n, self_loops);
    const int half = ws.k / 2;
    for (int m = 1; m <= half; ++m)
        for (int i = 0; i < ws.n; ++i) g.add_edge(i, (i + m) % ws.n);

    if (ws.q > 0.0) {
        // Rewire each lattice edge (i, i+m) with probability q, avoiding
        // self-edges and duplicates; saturated nodes keep their edge.
        for (int m = 1; m <= half; ++m) {
            for (int i = 0; i < ws.n; ++i) {
                if (!rng.bernoulli(ws.q)) continue;
                const int old = (i + m) % ws.n;
                if (static_cast<int>(g.adj[i].size()) >= ws.n - 1) continue;
                if (!g.has_edge(i, old)) continue;  // already rewired away
                int target = i;
                while (target == i || g.has_edge(i, target))
                    target = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(ws.n)));
                auto& a = g.adj[i];
                a.erase(std::lower_bound(a.begin(), a.end(), old));
                auto& b = g.adj[old];
                b.erase(std::lower_bound(b.begin(), b.end(), i));
                g.add_edge(i, target);
            }
        }
    }
    return g;
}

UndirectedGraph generate_sbm(const SbmParams& sbm, bool self_loops, Rng& rng) {
    const std::size_t m = sbm.sizes.size();
    if (m == 0) throw std::invalid_argument("sbm: sizes must be non-empty");
    if (sbm.p.size() != m) throw std::invalid_argument("sbm: P must be m x m");
    long long n = 0;
    for (int s : sbm.sizes) {
        if (s < 0) throw std::invalid_argument("sbm: group sizes must be >= 0");
        n += s;
    }
    if (n < 1) throw std::invalid_argument("sbm: total size must be >= 1");
    for (std::size_t a = 0; a < m; ++a) {
        if (sbm.p[a].size() != m) throw std::invalid_argument("sbm: P must be m x m");
        for (std::size_t b = 0; b < m; ++b) {
            check_probability(sbm.p[a][b], "sbm: P entries");
            if (sbm.p[a][b] != sbm.p[b][a])
                throw std::invalid_argument("sbm: P must be symmetric");
        }
    }

    std::vector<int> group(static_cast<std::size_t>(n));
    int node = 0;
    for (std::size_t a = 0; a < m; ++a)
        for (int s = 0; s < sbm.sizes[a]; ++s) group[node++] = static_cast<int>(a);

    UndirectedGraph g(static_cast<int>(n), self_loops);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(sbm.p[group[i]][group[j]])) g.add_edge(i, j);
    return g;
}

}  // namespace

UndirectedGraph generate(const GeneratorConfig& config) {
    Rng rng(config.seed);
    return std::visit(
        [&](const auto& params) -> UndirectedGraph {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, ErParams>)
                return generate_er(params, config.self_loops, rng);
            else if constexpr (std::is_same_v<T, WsParams>)
                return generate_ws(params, config.self_loops, rng);
            else
                return generate_sbm(params, config.self_loops, rng);
        },
        config.params);
}

UndirectedGraph generate_connected(const GeneratorConfig& config, int max_retries) {
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        GeneratorConfig c = config;
        c.seed = attempt == 0 ? config.seed : derive_seed(config.seed, 0x636f6e6eULL + attempt);
        UndirectedGraph g = generate(c);
        if (g.connected()) return g;
    }
    throw std::runtime_error("generate_connected: no connected sample after " +
                             std::to_string(max_retries) + " retries");
}

NetworkFeatures features(const UndirectedGraph& g) {
    NetworkFeatures f;
    f.size = g.n;
    const double n = static_cast<double>(g.n);
    const double edges = static_cast<double>(g.edge_count());
    f.avg_degree = g.n > 0 ? 2.0 * edges / n : 0.0;
    f.density = g.n > 1 ? 2.0 * edges / (n * (n - 1.0)) : 0.0;

    // Mean local clustering via bitset rows: c_i = (#links among neighbors) /
    // (k_i choose 2), with c_i = 0 for degree < 2. Self-edges excluded.
    const int words = (g.n + 63) / 64;
    std::vector<std::uint64_t> bits(static_cast<std::size_t>(g.n) * words, 0);
    for (int i = 0; i < g.n; ++i)
        for (int j : g.adj[i])
            bits[static_cast<std::size_t>(i) * words + j / 64] |= 1ULL << (j % 64);
    double clustering_sum = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const auto k = g.adj[i].size();
        if (k < 2) continue;
        const std::uint64_t* row_i = &bits[static_cast<std::size_t>(i) * words];
        std::size_t closed = 0;  // ordered neighbor pairs (u, v) with an edge
        for (int u : g.adj[i]) {
            const std::uint64_t* row_u = &bits[static_cast<std::size_t>(u) * words];
            for (int w = 0; w < words; ++w) closed += __builtin_popcountll(row_i[w] & row_u[w]);
        }
        clustering_sum += static_cast<double>(closed) / (static_cast<double>(k) * (k - 1));
    }
    f.avg_clustering = g.n > 0 ? clustering_sum / n : 0.0;

    // Average shortest path over ordered pairs, by BFS from every node.
    f.connected = g.connected();
    if (f.connected) {
        if (g.n <= 1) {
            f.avg_shortest_path = 0.0;
        } else {
            long long total = 0;
            std::vector<int> dist(g.n);
            std::vector<int> frontier;
            for (int s = 0; s < g.n; ++s) {
                std::fill(dist.begin(), dist.end(), -1);
                dist[s] = 0;
                frontier.assign(1, s);
                int depth = 0;
                std::vector<int> next;
                while (!frontier.empty()) {
                    ++depth;
                    next.clear();
                    for (int u : frontier)
                        for (int v : g.adj[u])
                            if (dist[v] < 0) {
                                dist[v] = depth;
                                total += depth;
                                next.push_back(v);
                            }
                    frontier.swap(next);
                }
            }
            f.avg_shortest_path = static_cast<double>(total) / (n * (n - 1.0));
        }
    }
    return f;
}

}  // namespace opdyn
