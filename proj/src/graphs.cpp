#include "netlineq/graphs.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include <Eigen/Dense>

namespace netlineq {

Graph::Graph(Index n) : n_(n) {
    if (n < 1) throw invalid_input_error("Graph: node count must be positive");
}

Graph::Graph(Index n, std::vector<std::pair<Index, Index>> edges) : Graph(n) {
    for (auto& [i, j] : edges) add_edge(i, j);
}

void Graph::add_edge(Index i, Index j) {
    if (i == j) throw invalid_input_error("Graph: self-loops are not allowed");
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
        throw invalid_input_error("Graph: edge endpoint out of range");
    if (i > j) std::swap(i, j);
    auto pos = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j});
    if (pos == edges_.end() || *pos != std::pair{i, j}) edges_.insert(pos, {i, j});
}

bool Graph::has_edge(Index i, Index j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges_.begin(), edges_.end(), std::pair{i, j});
}

std::vector<Index> Graph::degrees() const {
    std::vector<Index> deg(static_cast<std::size_t>(n_), 0);
    for (auto [i, j] : edges_) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
    }
    return deg;
}

std::vector<std::vector<Index>> Graph::adjacency() const {
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n_));
    for (auto [i, j] : edges_) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
    }
    return adj;
}

Matrix laplacian(const Graph& g) {
    Matrix l = Matrix::Zero(g.node_count(), g.node_count());
    for (auto [i, j] : g.edges()) {
        l(i, i) += 1.0;
        l(j, j) += 1.0;
        l(i, j) = -1.0;
        l(j, i) = -1.0;
    }
    return l;
}

bool is_connected(const Graph& g) {
    const auto adj = g.adjacency();
    std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
    std::queue<Index> frontier;
    frontier.push(0);
    seen[0] = 1;
    Index reached = 1;
    while (!frontier.empty()) {
        const Index u = frontier.front();
        frontier.pop();
        for (Index v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == g.node_count();
}

Graph union_graph(const std::vector<Graph>& gs) {
    if (gs.empty()) throw invalid_input_error("union_graph: empty list");
    Graph out(gs.front().node_count());
    for (const Graph& g : gs) {
        if (g.node_count() != out.node_count())
            throw shape_error("union_graph: node counts differ");
        for (auto [i, j] : g.edges()) out.add_edge(i, j);
    }
    return out;
}

Graph empty_graph(Index n) { return Graph(n); }

Graph complete_graph(Index n) {
    Graph g(n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) g.add_edge(i, j);
    return g;
}

Graph path_graph(Index n) {
    Graph g(n);
    for (Index i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

Graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_graph: cannot open " + path);
    Index n = 0, e = 0;
    if (!(in >> n >> e)) throw parse_error(path + ":1: expected \"n e\" header");
    Graph g(n);
    for (Index k = 0; k < e; ++k) {
        Index i = 0, j = 0;
        if (!(in >> i >> j))
            throw parse_error(path + ":" + std::to_string(k + 2) + ": expected edge \"i j\"");
        g.add_edge(i - 1, j - 1);
    }
    return g;
}

void save_graph(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw io_error("save_graph: cannot open " + path);
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    for (auto [i, j] : g.edges()) out << (i + 1) << ' ' << (j + 1) << '\n';
    if (!out) throw io_error("save_graph: write failed for " + path);
}

Graph random_connected_graph(Index n, double edge_prob, std::mt19937_64& rng) {
    if (edge_prob <= 0.0 || edge_prob > 1.0)
        throw parameter_error("random_connected_graph: edge_prob must be in (0, 1]");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Graph g(n);
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j)
                if (unif(rng) < edge_prob) g.add_edge(i, j);
        if (is_connected(g)) return g;
    }
    throw parameter_error("random_connected_graph: connectivity not reached; raise edge_prob");
}

std::vector<Graph> random_graph_space(Index n, Index count, double base_edge_prob,
                                      double keep_prob, std::mt19937_64& rng) {
    if (count < 1) throw parameter_error("random_graph_space: count must be positive");
    if (keep_prob <= 0.0 || keep_prob > 1.0)
        throw parameter_error("random_graph_space: keep_prob must be in (0, 1]");
    const Graph base = random_connected_graph(n, base_edge_prob, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<Graph> space;
        space.reserve(static_cast<std::size_t>(count));
        for (Index k = 0; k < count; ++k) {
            Graph g(n);
            for (auto [i, j] : base.edges())
                if (unif(rng) < keep_prob) g.add_edge(i, j);
            space.push_back(std::move(g));
        }
        if (is_connected(union_graph(space))) return space;
    }
    throw parameter_error("random_graph_space: union connectivity not reached");
}

Vector stationary_distribution(const Matrix& transition, double tol) {
    const Index n = transition.rows();
    if (n != transition.cols()) throw shape_error("stationary_distribution: matrix must be square");
    // Nullity of (T^t - I) must be one for the chain to have a unique
    // stationary law.
    const Matrix m = transition.transpose() - Matrix::Identity(n, n);
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    Index nullity = 0;
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) <= cutoff) ++nullity;
    if (nullity != 1)
        throw unsupported_process_error(
            "stationary_distribution: chain has no unique stationary law");
    Vector pi = svd.matrixV().col(n - 1);
    if (pi.sum() < 0.0) pi = -pi;
    if (pi.minCoeff() < -1e-9)
        throw unsupported_process_error("stationary_distribution: negative stationary mass");
    pi = pi.cwiseMax(0.0);
    return pi / pi.sum();
}

namespace {

void check_space(const std::vector<Graph>& space) {
    if (space.empty()) throw invalid_input_error("GraphProcess: empty sample space");
    for (const Graph& g : space)
        if (g.node_count() != space.front().node_count())
            throw shape_error("GraphProcess: sample space node counts differ");
}

} // namespace

GraphProcess GraphProcess::fixed(Graph g) {
    GraphProcess p(Kind::Fixed);
    p.space_ = {std::move(g)};
    return p;
}

GraphProcess GraphProcess::iid_uniform(std::vector<Graph> space, std::uint64_t seed) {
    check_space(space);
    GraphProcess p(Kind::IidUniform);
    p.space_ = std::move(space);
    p.rng_.seed(seed);
    return p;
}

GraphProcess GraphProcess::iid_bernoulli(Graph base, double edge_prob, std::uint64_t seed) {
    if (edge_prob < 0.0 || edge_prob > 1.0)
        throw parameter_error("GraphProcess: edge probability must be in [0, 1]");
    GraphProcess p(Kind::IidBernoulli);
    p.base_ = std::move(base);
    p.edge_prob_ = edge_prob;
    p.rng_.seed(seed);
    return p;
}

GraphProcess GraphProcess::markov(std::vector<Graph> space, Matrix transition,
                                  Vector initial, std::uint64_t seed) {
    check_space(space);
    const Index s = static_cast<Index>(space.size());
    if (transition.rows() != s || transition.cols() != s)
        throw shape_error("GraphProcess: transition matrix does not match sample space");
    if (initial.size() != s)
        throw shape_error("GraphProcess: initial distribution does not match sample space");
    for (Index i = 0; i < s; ++i) {
        if (transition.row(i).minCoeff() < 0.0 || std::abs(transition.row(i).sum() - 1.0) > 1e-12)
            throw invalid_input_error("GraphProcess: transition rows must be stochastic");
    }
    if (initial.minCoeff() < 0.0 || std::abs(initial.sum() - 1.0) > 1e-12)
        throw invalid_input_error("GraphProcess: initial distribution must be stochastic");
    GraphProcess p(Kind::Markov);
    p.space_ = std::move(space);
    p.transition_ = std::move(transition);
    p.initial_ = std::move(initial);
    p.rng_.seed(seed);
    return p;
}

GraphProcess GraphProcess::markov_stationary(std::vector<Graph> space, Matrix transition,
                                             std::uint64_t seed) {
    Vector pi = stationary_distribution(transition);
    return markov(std::move(space), std::move(transition), std::move(pi), seed);
}

GraphProcess GraphProcess::temporal(std::vector<Graph> space, Matrix a, Matrix c,
                                    Vector v0, std::uint64_t seed) {
    check_space(space);
    if (a.rows() != a.cols()) throw shape_error("GraphProcess: drive matrix A must be square");
    if (c.rows() != static_cast<Index>(space.size()) || c.cols() != a.rows())
        throw shape_error("GraphProcess: selection matrix C has wrong shape");
    if (v0.size() != a.rows()) throw shape_error("GraphProcess: state v0 has wrong dimension");
    if (spectral_radius(a) >= 1.0)
        throw invalid_input_error("GraphProcess: spectral radius of A must be below 1");
    if (c.minCoeff() <= 0.0)
        throw invalid_input_error("GraphProcess: selection matrix C must be entrywise positive");
    GraphProcess p(Kind::Temporal);
    p.space_ = std::move(space);
    p.drive_a_ = std::move(a);
    p.drive_c_ = std::move(c);
    p.v0_ = v0;
    p.v_ = std::move(v0);
    p.rng_.seed(seed);
    return p;
}

Index GraphProcess::node_count() const {
    return kind_ == Kind::IidBernoulli ? base_.node_count() : space_.front().node_count();
}

const std::vector<Graph>& GraphProcess::sample_space() const {
    if (kind_ == Kind::IidBernoulli)
        throw unsupported_process_error("GraphProcess: Bernoulli process has no explicit space");
    return space_;
}

const Graph& GraphProcess::base_graph() const {
    if (kind_ != Kind::IidBernoulli)
        throw unsupported_process_error("GraphProcess: only Bernoulli processes have a base graph");
    return base_;
}

Graph GraphProcess::sample_next() {
    switch (kind_) {
        case Kind::Fixed:
            return space_.front();
        case Kind::IidUniform: {
            std::uniform_int_distribution<std::size_t> pick(0, space_.size() - 1);
            return space_[pick(rng_)];
        }
        case Kind::IidBernoulli: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            Graph g(base_.node_count());
            for (auto [i, j] : base_.edges())
                if (unif(rng_) < edge_prob_) g.add_edge(i, j);
            return g;
        }
        case Kind::Markov: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const Vector& row = markov_state_ < 0
                                    ? initial_
                                    : static_cast<Vector>(transition_.row(markov_state_));
            double u = unif(rng_);
            Index next = row.size() - 1;
            for (Index k = 0; k < row.size(); ++k) {
                u -= row(k);
                if (u <= 0.0) {
                    next = k;
                    break;
                }
            }
            markov_state_ = next;
            return space_[static_cast<std::size_t>(next)];
        }
        case Kind::Temporal: {
            std::normal_distribution<double> normal(0.0, 1.0);
            std::uniform_real_distribution<double> unif02(0.0, 2.0);
            Vector eps2(drive_c_.rows());
            for (Index k = 0; k < eps2.size(); ++k) eps2(k) = unif02(rng_);
            Vector weights = (drive_c_ * v_ + eps2).cwiseMax(0.0);
            const double total = weights.sum();
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            Index choice;
            if (total <= 0.0) {
                // "proportional to" is undefined on the zero vector
                std::uniform_int_distribution<Index> pick(0, weights.size() - 1);
                choice = pick(rng_);
            } else {
                double u = unif(rng_) * total;
                choice = weights.size() - 1;
                for (Index k = 0; k < weights.size(); ++k) {
                    u -= weights(k);
                    if (u <= 0.0) {
                        choice = k;
                        break;
                    }
                }
            }
            Vector eps1(v_.size());
            for (Index k = 0; k < eps1.size(); ++k) eps1(k) = normal(rng_);
            v_ = drive_a_ * v_ + eps1;
            return space_[static_cast<std::size_t>(choice)];
        }
    }
    throw error("GraphProcess: unreachable");
}

Graph GraphProcess::persistent_graph(double p) const {
    if (p <= 0.0 || p > 1.0)
        throw parameter_error("persistent_graph: p must be in (0, 1]");
    switch (kind_) {
        case Kind::Fixed:
            return space_.front();
        case Kind::IidUniform: {
            const Graph& first = space_.front();
            Graph out(first.node_count());
            Graph all = union_graph(space_);
            for (auto [i, j] : all.edges()) {
                Index present = 0;
                for (const Graph& g : space_)
                    if (g.has_edge(i, j)) ++present;
                if (static_cast<double>(present) / static_cast<double>(space_.size()) >= p)
                    out.add_edge(i, j);
            }
            return out;
        }
        case Kind::IidBernoulli:
            return edge_prob_ >= p ? base_ : Graph(base_.node_count());
        case Kind::Markov: {
            const Vector pi = stationary_distribution(transition_);
            if ((initial_ - pi).cwiseAbs().maxCoeff() > 1e-8)
                throw unsupported_process_error(
                    "persistent_graph: Markov marginals are closed-form only from a "
                    "stationary start");
            Graph out(space_.front().node_count());
            Graph all = union_graph(space_);
            for (auto [i, j] : all.edges()) {
                double mass = 0.0;
                for (std::size_t k = 0; k < space_.size(); ++k)
                    if (space_[k].has_edge(i, j)) mass += pi(static_cast<Index>(k));
                if (mass >= p) out.add_edge(i, j);
            }
            return out;
        }
        case Kind::Temporal:
            throw unsupported_process_error(
                "persistent_graph: temporal process has no closed-form edge marginals");
    }
    throw error("GraphProcess: unreachable");
}

std::vector<std::pair<double, Graph>> GraphProcess::outcome_distribution(Index max_outcomes) const {
    switch (kind_) {
        case Kind::Fixed:
            return {{1.0, space_.front()}};
        case Kind::IidUniform: {
            std::vector<std::pair<double, Graph>> out;
            out.reserve(space_.size());
            const double p = 1.0 / static_cast<double>(space_.size());
            for (const Graph& g : space_) out.emplace_back(p, g);
            return out;
        }
        case Kind::IidBernoulli: {
            const Index e = base_.edge_count();
            if (e >= 62 || (Index(1) << e) > max_outcomes)
                throw size_error("outcome_distribution: too many base-edge subsets");
            std::vector<std::pair<double, Graph>> out;
            const auto& edges = base_.edges();
            for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << e); ++mask) {
                Graph g(base_.node_count());
                double prob = 1.0;
                for (Index k = 0; k < e; ++k) {
                    if (mask & (std::uint64_t(1) << k)) {
                        g.add_edge(edges[static_cast<std::size_t>(k)].first,
                                   edges[static_cast<std::size_t>(k)].second);
                        prob *= edge_prob_;
                    } else {
                        prob *= 1.0 - edge_prob_;
                    }
                }
                out.emplace_back(prob, std::move(g));
            }
            return out;
        }
        default:
            throw unsupported_process_error(
                "outcome_distribution: only i.i.d. processes have a closed-form law");
    }
}

GraphProcess GraphProcess::reseeded(std::uint64_t seed) const {
    GraphProcess copy = *this;
    copy.rng_.seed(seed);
    copy.markov_state_ = -1;
    if (kind_ == Kind::Temporal) copy.v_ = v0_;
    return copy;
}

} // namespace netlineq
