#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "netlineq/linalg.hpp"

namespace netlineq {

/// Undirected graph on nodes 0..n-1. Edges are stored as sorted unique
/// (i, j) pairs with i < j; self-loops are rejected.
class Graph {
public:
    explicit Graph(Index n);
    Graph(Index n, std::vector<std::pair<Index, Index>> edges);

    Index node_count() const { return n_; }
    Index edge_count() const { return static_cast<Index>(edges_.size()); }
    const std::vector<std::pair<Index, Index>>& edges() const { return edges_; }

    void add_edge(Index i, Index j);
    bool has_edge(Index i, Index j) const;

    std::vector<Index> degrees() const;
    std::vector<std::vector<Index>> adjacency() const;

    bool operator==(const Graph&) const = default;

private:
    Index n_;
    std::vector<std::pair<Index, Index>> edges_;
};

/// Graph Laplacian: degree on the diagonal, -1 on edges.
Matrix laplacian(const Graph& g);

/// True iff a single component covers all nodes (breadth-first search).
bool is_connected(const Graph& g);

/// Edge union of graphs on a common node set.
Graph union_graph(const std::vector<Graph>& gs);

Graph empty_graph(Index n);
Graph complete_graph(Index n);
Graph path_graph(Index n);

/// File format: first line "n e", then e lines "i j" with 1-based nodes.
Graph load_graph(const std::string& path);
void save_graph(const std::string& path, const Graph& g);

/// Erdos-Renyi style draw conditioned on connectivity.
Graph random_connected_graph(Index n, double edge_prob, std::mt19937_64& rng);

/// Sample space used by the experiment presets: spanning subgraphs of a
/// random connected base, each base edge kept with probability keep_prob,
/// redrawn until the union of the samples is connected.
std::vector<Graph> random_graph_space(Index n, Index count, double base_edge_prob,
                                      double keep_prob, std::mt19937_64& rng);

/// Stationary distribution of a row-stochastic transition matrix. Throws
/// unsupported_process_error when the eigenvalue-1 eigenspace is not
/// one-dimensional (non-ergodic chain).
Vector stationary_distribution(const Matrix& transition, double tol = 1e-9);

/// Seeded stochastic generator of graph sequences. One instance per
/// trajectory worker; reseeded() yields an independent copy with reset state.
class GraphProcess {
public:
    enum class Kind { Fixed, IidUniform, IidBernoulli, Markov, Temporal };

    static GraphProcess fixed(Graph g);
    static GraphProcess iid_uniform(std::vector<Graph> space, std::uint64_t seed);
    static GraphProcess iid_bernoulli(Graph base, double edge_prob, std::uint64_t seed);
    static GraphProcess markov(std::vector<Graph> space, Matrix transition,
                               Vector initial, std::uint64_t seed);
    /// Markov process started at the stationary distribution of `transition`.
    static GraphProcess markov_stationary(std::vector<Graph> space, Matrix transition,
                                          std::uint64_t seed);
    /// Graph selection driven by the linear system v <- Av + eps1 with
    /// selection weights p = max(Cv + eps2, 0); requires sr(A) < 1 and C > 0.
    static GraphProcess temporal(std::vector<Graph> space, Matrix a, Matrix c,
                                 Vector v0, std::uint64_t seed);

    Kind kind() const { return kind_; }
    Index node_count() const;

    /// Advances the internal state and returns the next sampled graph.
    Graph sample_next();

    /// Graph of edges whose per-step inclusion probability is >= p for all t.
    /// Closed-form marginals exist for fixed, i.i.d. and stationary-start
    /// Markov processes; anything else throws unsupported_process_error.
    Graph persistent_graph(double p) const;

    /// Exact per-outcome distribution (probability, graph). Supported for
    /// iid-uniform and iid-bernoulli; Bernoulli enumeration is capped at
    /// max_outcomes and throws size_error beyond it.
    std::vector<std::pair<double, Graph>> outcome_distribution(
        Index max_outcomes = Index(1) << 20) const;

    /// Independent copy with a fresh stream and re-initialized mutable state.
    GraphProcess reseeded(std::uint64_t seed) const;

    const std::vector<Graph>& sample_space() const;
    const Graph& base_graph() const;

private:
    explicit GraphProcess(Kind kind) : kind_(kind), base_(1) {}

    Kind kind_;
    std::vector<Graph> space_;
    Graph base_;
    double edge_prob_ = 0.0;
    Matrix transition_;
    Vector initial_;
    Matrix drive_a_, drive_c_;
    Vector v0_, v_;
    Index markov_state_ = -1;
    std::mt19937_64 rng_;
};

} // namespace netlineq
