#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace opdyn {

/// Undirected simple graph with an optional uniform set of self-edges.
/// Neighbor lists exclude the self-edge; degree() counts it when present.
struct UndirectedGraph {
    int n = 0;
    bool self_loops = false;
    std::vector<std::vector<int>> adj;  // sorted, no duplicates, no self entries

    UndirectedGraph() = default;
    UndirectedGraph(int n_, bool self_loops_) : n(n_), self_loops(self_loops_), adj(n_) {}

    /// Degree including the self-edge (counted once) when self_loops is set.
    int degree(int i) const {
        return static_cast<int>(adj[i].size()) + (self_loops ? 1 : 0);
    }

    /// Number of distinct non-self edges.
    std::size_t edge_count() const;

    bool has_edge(int i, int j) const;

    /// Inserts {i, j}; duplicate pairs and i == j are ignored.
    void add_edge(int i, int j);

    bool connected() const;
};

struct ErParams {
    int n = 0;
    double p = 0.0;  // edge probability
};

struct WsParams {
    int n = 0;
    int k = 0;       // even number of lattice neighbors
    double q = 0.0;  // rewiring probability
};

struct SbmParams {
    std::vector<int> sizes;               // group sizes, sum = n
    std::vector<std::vector<double>> p;   // symmetric m x m edge probabilities
};

struct GeneratorConfig {
    std::variant<ErParams, WsParams, SbmParams> params;
    std::uint64_t seed = 0;
    bool self_loops = true;
};

/// One draw from the configured ensemble. Self-edges are attached to every
/// node when config.self_loops is set. Throws std::invalid_argument on bad
/// parameter ranges (p, q outside [0,1], odd k, non-symmetric SBM matrix...).
UndirectedGraph generate(const GeneratorConfig& config);

/// Redraws (with per-attempt derived seeds) until the sample is connected.
/// Throws std::runtime_error after max_retries failures.
UndirectedGraph generate_connected(const GeneratorConfig& config, int max_retries = 1000);

/// Macroscopic topology features. Self-edges are excluded from density,
/// clustering, degree and path computations. avg_shortest_path averages BFS
/// distances over all ordered pairs and is absent for disconnected graphs.
struct NetworkFeatures {
    int size = 0;
    double avg_degree = 0.0;
    double density = 0.0;
    double avg_clustering = 0.0;
    std::optional<double> avg_shortest_path;
    bool connected = false;
};

NetworkFeatures features(const UndirectedGraph& g);

}  // namespace opdyn
