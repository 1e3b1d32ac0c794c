#include "netlineq/solvers.hpp"

#include <cmath>

#include "netlineq/random.hpp"

namespace netlineq {

StepSchedule make_power_schedule(double delta1, double scale) {
    if (!(delta1 > 0.0 && delta1 <= 0.5))
        throw parameter_error("make_power_schedule: delta1 must be in (0, 1/2]");
    if (scale <= 0.0) throw parameter_error("make_power_schedule: scale must be positive");
    return {StepSchedule::Kind::Power, delta1, 1.0, scale};
}

StepSchedule make_harmonic_schedule(double scale) {
    if (scale <= 0.0) throw parameter_error("make_harmonic_schedule: scale must be positive");
    return {StepSchedule::Kind::Harmonic, 0.5, 1.0, scale};
}

StepSchedule make_constant_schedule(double value) {
    if (value <= 0.0) throw parameter_error("make_constant_schedule: value must be positive");
    return {StepSchedule::Kind::Constant, 0.5, value, 1.0};
}

double alpha(const StepSchedule& sched, Index t) {
    if (t < 0) throw parameter_error("alpha: iteration index must be nonnegative");
    switch (sched.kind) {
        case StepSchedule::Kind::Power:
            return sched.scale * std::pow(static_cast<double>(t + 1), -(0.5 + sched.delta1));
        case StepSchedule::Kind::Harmonic:
            return sched.scale / static_cast<double>(t + 1);
        case StepSchedule::Kind::Constant:
            return sched.value;
    }
    throw error("alpha: unreachable");
}

SolverState make_state(const NetworkProblem& p, Vector x0, std::uint64_t rows_seed) {
    if (x0.size() != p.node_count() * p.dim())
        throw shape_error("make_state: stacked state has wrong dimension");
    require_finite(x0, "make_state");
    SolverState s;
    s.x = std::move(x0);
    s.row_rngs.reserve(static_cast<std::size_t>(p.node_count()));
    for (Index i = 0; i < p.node_count(); ++i)
        s.row_rngs.emplace_back(derive_seed(rows_seed, static_cast<std::uint64_t>(i),
                                            StreamLabel::Rows));
    return s;
}

namespace {

void check_step_inputs(const NetworkProblem& p, const Matrix& w, const SolverState& s) {
    if (w.rows() != p.node_count() || w.cols() != p.node_count())
        throw shape_error("solver step: weight matrix does not match the node count");
    if (s.x.size() != p.node_count() * p.dim())
        throw shape_error("solver step: state does not match the problem");
}

// Columns of the result are the weighted neighbor averages sum_j W_ij x_j.
Matrix mixed_states(const NetworkProblem& p, const Matrix& w, const SolverState& s) {
    Eigen::Map<const Matrix> states(s.x.data(), p.dim(), p.node_count());
    return states * w; // W symmetric
}

Index sample_row(const NodeBlock& block, std::mt19937_64& rng) {
    if (block.has_zero_row)
        throw degenerate_row_error("row sampling: node holds a zero equation row");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    const auto& cdf = block.row_cdf;
    for (std::size_t r = 0; r < cdf.size(); ++r)
        if (u <= cdf[r]) return static_cast<Index>(r);
    return static_cast<Index>(cdf.size()) - 1;
}

void check_gradient_inputs(const NetworkProblem& p, const Graph& g, double h,
                           const StepSchedule& sched, const SolverState& s) {
    if (g.node_count() != p.node_count())
        throw shape_error("solver step: graph does not match the node count");
    if (s.x.size() != p.node_count() * p.dim())
        throw shape_error("solver step: state does not match the problem");
    if (h <= 0.0) throw parameter_error("solver step: h must be positive");
    if (alpha(sched, s.t) > h)
        throw step_order_error("solver step: alpha(t) exceeds h at t=" + std::to_string(s.t));
}

} // namespace

void step_projection_consensus(const NetworkProblem& p, const MixingWeight& w, SolverState& s) {
    check_step_inputs(p, w.w, s);
    const Index m = p.dim();
    const Matrix mixed = mixed_states(p, w.w, s);
    for (Index i = 0; i < p.node_count(); ++i) {
        const NodeBlock& block = p.node(i);
        const Vector vi = mixed.col(i);
        s.x.segment(i * m, m) = vi - block.h_pinv * (block.h * vi - block.z);
    }
    ++s.t;
}

void step_randomized_projection(const NetworkProblem& p, const MixingWeight& w, SolverState& s) {
    check_step_inputs(p, w.w, s);
    const Index m = p.dim();
    const Matrix mixed = mixed_states(p, w.w, s);
    for (Index i = 0; i < p.node_count(); ++i) {
        const NodeBlock& block = p.node(i);
        const Index r = sample_row(block, s.row_rngs[static_cast<std::size_t>(i)]);
        const auto row = block.h.row(r);
        const Vector vi = mixed.col(i);
        const double gap = row.dot(vi) - block.z(r);
        s.x.segment(i * m, m) = vi - row.transpose() * (gap / row.squaredNorm());
    }
    ++s.t;
}

void step_gradient_descent(const NetworkProblem& p, const Graph& g, double h,
                           const StepSchedule& sched, SolverState& s) {
    check_gradient_inputs(p, g, h, sched, s);
    const Index m = p.dim();
    const double a = alpha(sched, s.t);
    const auto adj = g.adjacency();
    Eigen::Map<const Matrix> states(s.x.data(), m, p.node_count());
    Vector next(s.x.size());
    for (Index i = 0; i < p.node_count(); ++i) {
        const NodeBlock& block = p.node(i);
        const Vector xi = states.col(i);
        Vector delta = Vector::Zero(m);
        for (Index j : adj[static_cast<std::size_t>(i)]) delta += xi - states.col(j);
        next.segment(i * m, m) =
            xi - h * delta - a * (block.h.transpose() * (block.h * xi - block.z));
    }
    s.x = std::move(next);
    ++s.t;
}

void step_randomized_gd(const NetworkProblem& p, const Graph& g, double h,
                        const StepSchedule& sched, SolverState& s) {
    check_gradient_inputs(p, g, h, sched, s);
    const Index m = p.dim();
    const double a = alpha(sched, s.t);
    const auto adj = g.adjacency();
    Eigen::Map<const Matrix> states(s.x.data(), m, p.node_count());
    Vector next(s.x.size());
    for (Index i = 0; i < p.node_count(); ++i) {
        const NodeBlock& block = p.node(i);
        const Index r = sample_row(block, s.row_rngs[static_cast<std::size_t>(i)]);
        const auto row = block.h.row(r);
        const Vector xi = states.col(i);
        Vector delta = Vector::Zero(m);
        for (Index j : adj[static_cast<std::size_t>(i)]) delta += xi - states.col(j);
        next.segment(i * m, m) =
            xi - h * delta - a * (row.transpose() * (row.dot(xi) - block.z(r)));
    }
    s.x = std::move(next);
    ++s.t;
}

} // namespace netlineq
