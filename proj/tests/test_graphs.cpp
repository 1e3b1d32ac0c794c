#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <numeric>

#include <Eigen/Dense>

#include "netlineq/graphs.hpp"
#include "test_support.hpp"

using namespace netlineq;
using namespace netlineq::testing;

namespace {

Graph random_graph(Index n, double edge_prob, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Graph g(n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (unif(rng) < edge_prob) g.add_edge(i, j);
    return g;
}

// union-find component count, the oracle for the Laplacian nullity check
Index component_count(const Graph& g) {
    std::vector<Index> parent(static_cast<std::size_t>(g.node_count()));
    std::iota(parent.begin(), parent.end(), Index(0));
    auto find = [&](Index v) {
        while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
        return v;
    };
    for (auto [i, j] : g.edges()) parent[static_cast<std::size_t>(find(i))] = find(j);
    Index components = 0;
    for (Index v = 0; v < g.node_count(); ++v)
        if (find(v) == v) ++components;
    return components;
}

} // namespace

TEST_CASE("graph basics") {
    Graph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 0); // duplicate, normalized away
    CHECK(g.edge_count() == 1);
    CHECK(g.has_edge(1, 0));
    CHECK_THROWS_AS(g.add_edge(1, 1), invalid_input_error);
    CHECK_THROWS_AS(g.add_edge(0, 3), invalid_input_error);
}

TEST_CASE("laplacian of known graphs") {
    Matrix expected(3, 3);
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK(max_abs_diff(laplacian(path_graph(3)), expected) == 0.0);

    CHECK(laplacian(empty_graph(4)).norm() == 0.0);

    Eigen::SelfAdjointEigenSolver<Matrix> es(laplacian(complete_graph(3)));
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(3.0));
    CHECK(es.eigenvalues()(2) == doctest::Approx(3.0));
}

TEST_CASE("laplacian invariants on random graphs") {
    std::mt19937_64 rng(21);
    for (int c = 0; c < 200; ++c) {
        const Index n = random_index(1, 12, rng);
        const Graph g = random_graph(n, 0.3, rng);
        const Matrix l = laplacian(g);
        CHECK((l * Vector::Ones(n)).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Matrix> es(l);
        CHECK(es.eigenvalues()(0) >= -1e-9);
        Index zero_eigs = 0;
        for (Index k = 0; k < n; ++k)
            if (std::abs(es.eigenvalues()(k)) <= 1e-9 * std::max(1.0, es.eigenvalues()(n - 1)))
                ++zero_eigs;
        CHECK(zero_eigs == component_count(g));
        CHECK(is_connected(g) == (component_count(g) == 1));
    }
}

TEST_CASE("connectivity of known graphs") {
    CHECK(is_connected(path_graph(3)));
    CHECK_FALSE(is_connected(empty_graph(2)));
    Graph pair(2);
    pair.add_edge(0, 1);
    CHECK(is_connected(pair));
    CHECK(is_connected(Graph(1)));
}

TEST_CASE("union of graphs") {
    Graph a(3), b(3);
    a.add_edge(0, 1);
    b.add_edge(1, 2);
    CHECK(union_graph({a, b}) == path_graph(3));
    CHECK(union_graph({a, empty_graph(3)}) == a);
    CHECK_THROWS_AS(union_graph({a, Graph(4)}), shape_error);
}

TEST_CASE("graph file round trip") {
    std::mt19937_64 rng(22);
    const Graph g = random_graph(7, 0.4, rng);
    const std::string path = "/tmp/netlineq_test_graph.txt";
    save_graph(path, g);
    CHECK(load_graph(path) == g);
    std::remove(path.c_str());
}

TEST_CASE("fixed process repeats its graph") {
    GraphProcess p = GraphProcess::fixed(complete_graph(3));
    for (int k = 0; k < 5; ++k) CHECK(p.sample_next() == complete_graph(3));
    CHECK(p.persistent_graph(1.0) == complete_graph(3));
}

TEST_CASE("iid-uniform process sampling and marginals") {
    std::vector<Graph> space = {complete_graph(4), empty_graph(4)};
    GraphProcess p = GraphProcess::iid_uniform(space, 7);

    CHECK(p.persistent_graph(0.5) == complete_graph(4));
    CHECK(p.persistent_graph(0.51) == empty_graph(4));

    // empirical frequencies within 3 sigma over a 30-graph space of
    // pairwise distinct single-edge graphs
    std::vector<Graph> big;
    for (Index i = 0, k = 0; i < 9 && k < 30; ++i)
        for (Index j = i + 1; j < 9 && k < 30; ++j, ++k) big.push_back(Graph(9, {{i, j}}));
    GraphProcess q = GraphProcess::iid_uniform(big, 4);
    std::vector<int> counts(30, 0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        const Graph g = q.sample_next();
        for (std::size_t s = 0; s < big.size(); ++s)
            if (big[s] == g) {
                ++counts[s];
                break;
            }
    }
    const double mean = draws / 30.0;
    const double sigma = std::sqrt(draws * (1.0 / 30.0) * (29.0 / 30.0));
    for (int s = 0; s < 30; ++s) CHECK(std::abs(counts[s] - mean) <= 3.0 * sigma);
}

TEST_CASE("iid-bernoulli process keeps base edges independently") {
    Graph base = path_graph(4);
    GraphProcess p = GraphProcess::iid_bernoulli(base, 0.7, 3);
    for (int k = 0; k < 20; ++k) {
        const Graph g = p.sample_next();
        for (auto [i, j] : g.edges()) CHECK(base.has_edge(i, j));
    }
    CHECK(p.persistent_graph(0.7) == base);
    CHECK(p.persistent_graph(0.71) == empty_graph(4));

    auto outcomes = p.outcome_distribution();
    CHECK(outcomes.size() == 8);
    double total = 0.0;
    for (auto& [prob, g] : outcomes) total += prob;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("markov process dynamics") {
    std::vector<Graph> space = {path_graph(3), complete_graph(3)};

    // identity transition is absorbing
    Vector start(2);
    start << 0, 1;
    GraphProcess absorbing = GraphProcess::markov(space, Matrix::Identity(2, 2), start, 5);
    for (int k = 0; k < 5; ++k) CHECK(absorbing.sample_next() == complete_graph(3));

    Matrix t(2, 2);
    t << 0.9, 0.1, 0.4, 0.6;
    const Vector pi = stationary_distribution(t);
    CHECK(pi(0) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(pi(1) == doctest::Approx(0.2).epsilon(1e-10));

    GraphProcess stat = GraphProcess::markov_stationary(space, t, 5);
    // edge {0,2} only appears in the complete graph: stationary mass 0.2
    Graph persistent = stat.persistent_graph(0.19);
    CHECK(persistent.has_edge(0, 2));
    CHECK(stat.persistent_graph(0.21) == path_graph(3));
    CHECK(stat.persistent_graph(0.1) == complete_graph(3));

    // marginals are only closed-form from a stationary start
    GraphProcess shifted = GraphProcess::markov(space, t, start, 5);
    CHECK_THROWS_AS(shifted.persistent_graph(0.5), unsupported_process_error);

    CHECK_THROWS_AS(stationary_distribution(Matrix::Identity(2, 2)),
                    unsupported_process_error);

    Matrix bad(2, 2);
    bad << 0.5, 0.4, 0.5, 0.5;
    CHECK_THROWS_AS(GraphProcess::markov(space, bad, start, 5), invalid_input_error);
}

TEST_CASE("persistent graph is monotone in p") {
    std::mt19937_64 rng(24);
    std::vector<Graph> space;
    for (int k = 0; k < 12; ++k) space.push_back(random_graph(6, 0.4, rng));
    GraphProcess p = GraphProcess::iid_uniform(space, 1);
    for (double lo : {0.1, 0.3, 0.5}) {
        const Graph coarse = p.persistent_graph(lo + 0.2);
        const Graph fine = p.persistent_graph(lo);
        for (auto [i, j] : coarse.edges()) CHECK(fine.has_edge(i, j));
    }
}

TEST_CASE("temporal process validation and sampling") {
    std::vector<Graph> space = {path_graph(3), complete_graph(3), empty_graph(3)};
    Matrix a = 0.5 * Matrix::Identity(4, 4);
    Matrix c = Matrix::Constant(3, 4, 0.2);
    Vector v0 = Vector::Ones(4);

    CHECK_THROWS_AS(GraphProcess::temporal(space, Matrix::Identity(4, 4), c, v0, 1),
                    invalid_input_error);
    CHECK_THROWS_AS(GraphProcess::temporal(space, a, Matrix::Zero(3, 4), v0, 1),
                    invalid_input_error);

    GraphProcess p = GraphProcess::temporal(space, a, c, v0, 1);
    for (int k = 0; k < 50; ++k) {
        const Graph g = p.sample_next();
        const bool known = g == space[0] || g == space[1] || g == space[2];
        CHECK(known);
    }
    CHECK_THROWS_AS(p.persistent_graph(0.5), unsupported_process_error);

    // strongly negative drive forces the all-zero weight fallback on the
    // first draw
    GraphProcess zero = GraphProcess::temporal(space, Matrix::Zero(4, 4), c,
                                               Vector::Constant(4, -1000.0), 1);
    const Graph g = zero.sample_next();
    CHECK((g == space[0] || g == space[1] || g == space[2]));
}

TEST_CASE("equal seeds give identical graph sequences") {
    std::mt19937_64 rng(25);
    std::vector<Graph> space;
    for (int k = 0; k < 8; ++k) space.push_back(random_graph(5, 0.4, rng));

    auto compare = [](GraphProcess a, GraphProcess b) {
        for (int k = 0; k < 200; ++k) CHECK(a.sample_next() == b.sample_next());
    };
    compare(GraphProcess::iid_uniform(space, 42), GraphProcess::iid_uniform(space, 42));
    compare(GraphProcess::iid_bernoulli(complete_graph(5), 0.3, 42),
            GraphProcess::iid_bernoulli(complete_graph(5), 0.3, 42));

    Matrix t = Matrix::Constant(8, 8, 1.0 / 8.0);
    compare(GraphProcess::markov_stationary(space, t, 42),
            GraphProcess::markov_stationary(space, t, 42));

    GraphProcess proto = GraphProcess::iid_uniform(space, 1);
    compare(proto.reseeded(7), proto.reseeded(7));
}

TEST_CASE("random graph space has a connected union") {
    std::mt19937_64 rng(26);
    const auto space = random_graph_space(12, 20, 0.35, 0.3, rng);
    CHECK(space.size() == 20);
    CHECK(is_connected(union_graph(space)));
    for (const Graph& g : space) CHECK(g.node_count() == 12);
}
