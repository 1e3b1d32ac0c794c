#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "netlineq/analysis.hpp"
#include "netlineq/solvers.hpp"
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

NetworkProblem random_consistent_problem(Index nodes, Index m, Index rank,
                                         std::mt19937_64& rng) {
    auto sizes = random_partition_sizes(nodes, 1, 3, rng);
    const Index rows = std::accumulate(sizes.begin(), sizes.end(), Index(0));
    rank = std::min({rank, rows, m});
    auto [h, z] = make_synthetic({sizes, m, rank, 0.0}, rng);
    return partition_problem(std::move(h), std::move(z), std::move(sizes));
}

Vector project_to_local_sets(const NetworkProblem& p, Vector x) {
    const Index m = p.dim();
    for (Index i = 0; i < p.node_count(); ++i) {
        const NodeBlock& b = p.node(i);
        const Vector xi = x.segment(i * m, m);
        x.segment(i * m, m) = xi - b.h_pinv * (b.h * xi - b.z);
    }
    return x;
}

} // namespace

TEST_CASE("step schedules") {
    const StepSchedule power = make_power_schedule(0.1);
    CHECK(alpha(power, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(alpha(power, 99) == doctest::Approx(std::pow(100.0, -0.6)).epsilon(1e-12));

    const StepSchedule harmonic = make_harmonic_schedule();
    CHECK(alpha(harmonic, 9) == doctest::Approx(0.1).epsilon(1e-15));

    const StepSchedule constant = make_constant_schedule(0.05);
    CHECK(alpha(constant, 0) == 0.05);
    CHECK(alpha(constant, 1000) == 0.05);

    CHECK_THROWS_AS(make_power_schedule(0.0), parameter_error);
    CHECK_THROWS_AS(make_power_schedule(0.6), parameter_error);
    CHECK_THROWS_AS(make_constant_schedule(-1.0), parameter_error);

    // monotone decreasing to zero
    for (const StepSchedule& s : {power, harmonic}) {
        double prev = alpha(s, 0);
        for (Index t = 1; t < 200; ++t) {
            const double a = alpha(s, t);
            CHECK(a > 0.0);
            CHECK(a <= prev);
            prev = a;
        }
    }

    const StepSchedule scaled = make_power_schedule(0.1, 0.25);
    CHECK(alpha(scaled, 0) == doctest::Approx(0.25));
}

TEST_CASE("projection consensus on the worked two-node example") {
    Matrix h(2, 2);
    h << 1, 0, 0, 1;
    Vector z(2);
    z << 1, 1;
    const NetworkProblem p = partition_problem(h, z, {1, 1});
    const MixingWeight w = weight_from_graph(complete_graph(2)); // [[.5,.5],[.5,.5]]

    SolverState s = make_state(p, Vector::Zero(4), 1);
    step_projection_consensus(p, w, s);
    CHECK(s.t == 1);
    CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.x(1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.x(2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.x(3) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("consensual exact solutions are fixed points of every update") {
    std::mt19937_64 rng(51);
    for (int c = 0; c < 20; ++c) {
        const Index nodes = random_index(2, 4, rng);
        const Index m = random_index(2, 4, rng);
        // at least two rows per node keeps rank m reachable
        auto sizes = random_partition_sizes(nodes, 2, 3, rng);
        auto [hm, zm] = make_synthetic({sizes, m, m, 0.0}, rng);
        const NetworkProblem p = partition_problem(std::move(hm), std::move(zm), sizes);
        REQUIRE(p.solutions().x_star.has_value());
        const Vector x_star = *p.solutions().x_star;
        Vector consensus(nodes * m);
        for (Index i = 0; i < nodes; ++i) consensus.segment(i * m, m) = x_star;

        const Graph g = random_graph(nodes, 0.6, rng);
        const MixingWeight w = weight_from_graph(g);
        const StepSchedule sched = make_constant_schedule(0.01);

        SolverState s1 = make_state(p, consensus, 7);
        step_projection_consensus(p, w, s1);
        CHECK((s1.x - consensus).cwiseAbs().maxCoeff() <= 1e-9);

        SolverState s2 = make_state(p, consensus, 7);
        step_randomized_projection(p, w, s2);
        CHECK((s2.x - consensus).cwiseAbs().maxCoeff() <= 1e-9);

        SolverState s3 = make_state(p, consensus, 7);
        step_gradient_descent(p, g, 0.02, sched, s3);
        CHECK((s3.x - consensus).cwiseAbs().maxCoeff() <= 1e-9);

        SolverState s4 = make_state(p, consensus, 7);
        step_randomized_gd(p, g, 0.02, sched, s4);
        CHECK((s4.x - consensus).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("single node projection converges in one step") {
    std::mt19937_64 rng(52);
    const Matrix h = random_matrix(2, 4, rng);
    const Vector y0 = random_vector(4, rng);
    const NetworkProblem p = partition_problem(h, h * y0, {2});
    const MixingWeight w{Matrix::Identity(1, 1), 1.0};
    SolverState s = make_state(p, random_vector(4, rng), 1);
    step_projection_consensus(p, w, s);
    CHECK((p.matrix() * s.x - p.rhs()).norm() <= 1e-9);
    const Vector after_one = s.x;
    step_projection_consensus(p, w, s);
    CHECK((s.x - after_one).norm() <= 1e-12);
}

TEST_CASE("randomized projection equals plain projection when every node holds one row") {
    std::mt19937_64 rng(53);
    const Index m = 3;
    auto [h, z] = make_synthetic({{1, 1, 1}, m, 2, 0.0}, rng);
    const NetworkProblem p = partition_problem(h, z, {1, 1, 1});
    const MixingWeight w = weight_from_graph(path_graph(3));
    const Vector x0 = random_vector(3 * m, rng);

    SolverState a = make_state(p, x0, 9);
    SolverState b = make_state(p, x0, 9);
    for (int t = 0; t < 20; ++t) {
        step_projection_consensus(p, w, a);
        step_randomized_projection(p, w, b);
    }
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("randomized projection rejects zero rows at sampling") {
    Matrix h(2, 2);
    h << 1, 0, 0, 0;
    const NetworkProblem p = partition_problem(h, Vector::Zero(2), {2});
    const MixingWeight w{Matrix::Identity(1, 1), 1.0};
    SolverState s = make_state(p, Vector::Zero(2), 1);
    CHECK_THROWS_AS(step_randomized_projection(p, w, s), degenerate_row_error);
}

TEST_CASE("gradient step matches its compact lifted form") {
    std::mt19937_64 rng(54);
    for (int c = 0; c < 30; ++c) {
        const Index nodes = random_index(2, 5, rng);
        const Index m = random_index(2, 4, rng);
        const NetworkProblem p = random_consistent_problem(nodes, m, std::min<Index>(m, 3), rng);
        const Graph g = random_graph(nodes, 0.5, rng);
        const double h = 0.9 / static_cast<double>(nodes);
        const StepSchedule sched = make_constant_schedule(h * 0.5);
        const Vector x0 = random_vector(nodes * m, rng);

        SolverState s = make_state(p, x0, 3);
        step_gradient_descent(p, g, h, sched, s);

        // x+ = (I - h L x I) x - alpha (H_d x - z_H)
        Matrix hd = Matrix::Zero(nodes * m, nodes * m);
        Vector zh(nodes * m);
        for (Index i = 0; i < nodes; ++i) {
            hd.block(i * m, i * m, m, m) = p.node(i).h.transpose() * p.node(i).h;
            zh.segment(i * m, m) = p.node(i).h.transpose() * p.node(i).z;
        }
        const Matrix lift = kronecker(laplacian(g), Matrix::Identity(m, m));
        const Vector expected =
            (Matrix::Identity(nodes * m, nodes * m) - h * lift) * x0 -
            alpha(sched, 0) * (hd * x0 - zh);
        CHECK((s.x - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("gradient moves at the least-squares point sum to zero over an empty graph") {
    std::mt19937_64 rng(55);
    const Index nodes = 4, m = 3;
    std::vector<Index> sizes{2, 2, 2, 2};
    auto [h, z] = make_synthetic({sizes, m, m, 1.5}, rng);
    const NetworkProblem p = partition_problem(h, z, sizes);
    REQUIRE(p.solutions().x_ls.has_value());
    const Vector x_ls = *p.solutions().x_ls;

    Vector stacked(nodes * m);
    for (Index i = 0; i < nodes; ++i) stacked.segment(i * m, m) = x_ls;
    SolverState s = make_state(p, stacked, 1);
    const StepSchedule sched = make_constant_schedule(0.01);
    step_gradient_descent(p, empty_graph(nodes), 0.02, sched, s);

    Vector sum = Vector::Zero(m);
    double largest_move = 0.0;
    for (Index i = 0; i < nodes; ++i) {
        const Vector move = s.x.segment(i * m, m) - x_ls;
        sum += move;
        largest_move = std::max(largest_move, move.norm());
    }
    CHECK(sum.norm() <= 1e-10 * (1.0 + largest_move));
    CHECK(largest_move > 1e-6); // individual nodes do move
}

TEST_CASE("scalar gradient descent contracts geometrically") {
    Matrix h(1, 1);
    h << 1;
    const NetworkProblem p = partition_problem(h, Vector::Zero(1), {1});
    const double a = 0.25;
    SolverState s = make_state(p, Vector::Ones(1), 1);
    const StepSchedule sched = make_constant_schedule(a);
    for (int t = 1; t <= 10; ++t) {
        step_gradient_descent(p, empty_graph(1), 0.3, sched, s);
        CHECK(s.x(0) == doctest::Approx(std::pow(1.0 - a, t)).epsilon(1e-12));
    }
}

TEST_CASE("alpha above h is a step order violation") {
    Matrix h(1, 1);
    h << 1;
    const NetworkProblem p = partition_problem(h, Vector::Zero(1), {1});
    SolverState s = make_state(p, Vector::Ones(1), 1);
    const StepSchedule sched = make_constant_schedule(0.5);
    CHECK_THROWS_AS(step_gradient_descent(p, empty_graph(1), 0.1, sched, s),
                    step_order_error);
    // power schedule starts at 1 > h
    SolverState s2 = make_state(p, Vector::Ones(1), 1);
    CHECK_THROWS_AS(
        step_gradient_descent(p, empty_graph(1), 0.1, make_power_schedule(0.1), s2),
        step_order_error);
}

TEST_CASE("randomized gd equals gd when every node holds one row") {
    std::mt19937_64 rng(56);
    auto [h, z] = make_synthetic({{1, 1, 1}, 3, 3, 0.0}, rng);
    const NetworkProblem p = partition_problem(h, z, {1, 1, 1});
    const Graph g = path_graph(3);
    const StepSchedule sched = make_constant_schedule(0.05);
    const Vector x0 = random_vector(9, rng);

    SolverState a = make_state(p, x0, 4);
    SolverState b = make_state(p, x0, 4);
    for (int t = 0; t < 25; ++t) {
        step_gradient_descent(p, g, 0.1, sched, a);
        step_randomized_gd(p, g, 0.1, sched, b);
    }
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("randomized gd matches the enumerated one-step expectation") {
    Matrix h(2, 2);
    h << 3, 0, 0, 4;
    const NetworkProblem p = partition_problem(h, Vector::Zero(2), {2});
    const double a = 0.01;
    const StepSchedule sched = make_constant_schedule(a);
    Vector x0 = Vector::Ones(2);

    // row 1 w.p. 9/25 moves x1 by -9a, row 2 w.p. 16/25 moves x2 by -16a
    const Vector expected{{1.0 - a * 81.0 / 25.0, 1.0 - a * 256.0 / 25.0}};

    const int draws = 40000;
    Vector mean = Vector::Zero(2);
    for (int k = 0; k < draws; ++k) {
        SolverState s = make_state(p, x0, static_cast<std::uint64_t>(k));
        step_randomized_gd(p, empty_graph(1), 0.02, sched, s);
        mean += s.x;
    }
    mean /= static_cast<double>(draws);
    // per-draw sd is below 0.045; 5 standard errors of the mean
    CHECK(std::abs(mean(0) - expected(0)) <= 5.0 * 0.045 / std::sqrt(double(draws)));
    CHECK(std::abs(mean(1) - expected(1)) <= 5.0 * 0.060 / std::sqrt(double(draws)));
}

TEST_CASE("projection average is invariant and the error is monotone along trajectories") {
    std::mt19937_64 rng(57);
    for (int c = 0; c < 10; ++c) {
        const Index nodes = random_index(2, 6, rng);
        const Index m = random_index(2, 6, rng);
        const Index rank = random_index(1, m - 1, rng);
        const NetworkProblem p = random_consistent_problem(nodes, m, rank, rng);

        const Vector x0 = random_vector(nodes * m, rng, 2.0);
        const Vector y_star = projection_average(p, x0);
        double f_prev = std::numeric_limits<double>::infinity();

        SolverState s = make_state(p, x0, 11);
        for (int t = 0; t <= 100; ++t) {
            CHECK((projection_average(p, s.x) - y_star).norm() <= 1e-9);
            double f = 0.0;
            for (Index i = 0; i < nodes; ++i)
                f += (s.x.segment(i * m, m) - y_star).squaredNorm();
            CHECK(f <= f_prev + 1e-12);
            f_prev = f;
            step_projection_consensus(p, weight_from_graph(random_graph(nodes, 0.4, rng)), s);
        }
    }
}

TEST_CASE("one projection step equals the lifted error recursion") {
    std::mt19937_64 rng(58);
    for (int c = 0; c < 50; ++c) {
        const Index nodes = random_index(2, 5, rng);
        const Index m = random_index(2, 5, rng);
        const Index rank = random_index(1, m, rng);
        const NetworkProblem p = random_consistent_problem(nodes, m, rank, rng);
        const Graph g = random_graph(nodes, 0.5, rng);
        const MixingWeight w = weight_from_graph(g);

        // states inside the local sets make P e = e
        const Vector x = project_to_local_sets(p, random_vector(nodes * m, rng, 2.0));
        const Vector y_star = projection_average(p, x);
        Vector e(nodes * m);
        for (Index i = 0; i < nodes; ++i)
            e.segment(i * m, m) = x.segment(i * m, m) - y_star;

        SolverState s = make_state(p, x, 13);
        step_projection_consensus(p, w, s);
        Vector e_next(nodes * m);
        for (Index i = 0; i < nodes; ++i)
            e_next.segment(i * m, m) = s.x.segment(i * m, m) - y_star;

        const Matrix proj = stacked_kernel_projector(p);
        const Vector oracle = proj * (lift_weight(w.w, m) * (proj * e));
        CHECK((e_next - oracle).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("trajectories are deterministic given the seeds") {
    std::mt19937_64 rng(59);
    const NetworkProblem p = random_consistent_problem(4, 3, 3, rng);
    const Vector x0 = random_vector(12, rng);
    GraphProcess proc = GraphProcess::iid_uniform(
        {complete_graph(4), path_graph(4), empty_graph(4)}, 17);

    auto run = [&](std::uint64_t graph_seed, std::uint64_t rows_seed) {
        GraphProcess local = proc.reseeded(graph_seed);
        SolverState s = make_state(p, x0, rows_seed);
        for (int t = 0; t < 50; ++t)
            step_randomized_projection(p, weight_from_graph(local.sample_next()), s);
        return s.x;
    };
    const Vector a = run(100, 200);
    const Vector b = run(100, 200);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    const Vector c = run(101, 200);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}
