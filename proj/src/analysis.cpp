#include "netlineq/analysis.hpp"

#include <cmath>
#include <random>

namespace netlineq {

Matrix stacked_kernel_projector(const NetworkProblem& p) {
    const Index m = p.dim();
    const Index n = p.node_count();
    Matrix out = Matrix::Zero(n * m, n * m);
    for (Index i = 0; i < n; ++i)
        out.block(i * m, i * m, m, m) = p.node(i).kernel_proj;
    return out;
}

Matrix lift_weight(const Matrix& w, Index m) {
    return kronecker(w, Matrix::Identity(m, m));
}

namespace {

std::vector<std::pair<double, MixingWeight>> bound_weight_distribution(
    const GraphProcess& proc, WeightRule rule, std::optional<double> h,
    const RateBoundOptions& opts) {
    try {
        return weight_distribution(proc, rule, h, opts.enum_cap);
    } catch (const size_error&) {
        // Too many Bernoulli outcomes to enumerate; fall back to a seeded
        // Monte Carlo estimate of the expectations.
        GraphProcess sampler = proc.reseeded(opts.mc_seed);
        std::vector<std::pair<double, MixingWeight>> draws;
        draws.reserve(static_cast<std::size_t>(opts.mc_draws));
        const double p = 1.0 / static_cast<double>(opts.mc_draws);
        for (Index k = 0; k < opts.mc_draws; ++k)
            draws.emplace_back(p, weight_from_graph(sampler.sample_next(), rule, h));
        return draws;
    }
}

} // namespace

RateBounds rate_bounds_iid(const NetworkProblem& p, const GraphProcess& proc,
                           WeightRule rule, std::optional<double> h,
                           const RateBoundOptions& opts) {
    if (proc.kind() != GraphProcess::Kind::Fixed &&
        proc.kind() != GraphProcess::Kind::IidUniform &&
        proc.kind() != GraphProcess::Kind::IidBernoulli)
        throw unsupported_process_error("rate_bounds_iid: process must be i.i.d.");
    if (proc.node_count() != p.node_count())
        throw shape_error("rate_bounds_iid: process and problem node counts differ");
    const Index lifted = p.node_count() * p.dim();
    if (lifted > opts.dim_cap)
        throw size_error("rate_bounds_iid: lifted dimension exceeds the configured cap");

    const Matrix proj = stacked_kernel_projector(p);
    const auto dist = bound_weight_distribution(proc, rule, h, opts);

    Matrix w_mean = Matrix::Zero(p.node_count(), p.node_count());
    Matrix expect = Matrix::Zero(lifted, lifted);
    for (const auto& [prob, mw] : dist) {
        w_mean += prob * mw.w;
        const Matrix lw = lift_weight(mw.w, p.dim());
        expect += prob * (lw * proj * lw);
    }

    RateBounds bounds;
    bounds.lifted_dim = lifted;
    const Matrix mean_map = proj * lift_weight(w_mean, p.dim()) * proj;
    const double sr1 = spectral_radius(mean_map);
    bounds.theta1 = sr1 * sr1;
    bounds.theta2 = spectral_radius(proj * expect * proj);
    return bounds;
}

std::pair<double, double> metrics(const NetworkProblem& p, const Vector& stacked_x,
                                  const Vector& target) {
    const Index m = p.dim();
    const Index n = p.node_count();
    if (stacked_x.size() != n * m)
        throw shape_error("metrics: stacked state has wrong dimension");
    if (target.size() != m) throw shape_error("metrics: target has wrong dimension");
    Eigen::Map<const Matrix> states(stacked_x.data(), m, n);
    const Vector mean = states.rowwise().mean();
    double e1 = 0.0, e2 = 0.0;
    for (Index i = 0; i < n; ++i) {
        e1 += (states.col(i) - target).squaredNorm();
        e2 += (states.col(i) - mean).squaredNorm();
    }
    return {e1 / static_cast<double>(n), e2 / static_cast<double>(n)};
}

namespace {

void check_fit_window(std::span<const double> series, Index lo, Index hi) {
    if (lo < 0 || hi >= static_cast<Index>(series.size()) || hi <= lo + 1)
        throw parameter_error("rate fit: window must satisfy 0 <= lo, lo + 1 < hi < length");
    for (Index t = lo; t <= hi; ++t)
        if (!(series[static_cast<std::size_t>(t)] > 0.0))
            throw domain_error("rate fit: series must be strictly positive on the window");
}

// Ordinary least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

double fit_exponential_rate(std::span<const double> series, Index lo, Index hi) {
    check_fit_window(series, lo, hi);
    std::vector<double> ts, logs;
    for (Index t = lo; t <= hi; ++t) {
        ts.push_back(static_cast<double>(t));
        logs.push_back(std::log(series[static_cast<std::size_t>(t)]));
    }
    return std::exp(ols_slope(ts, logs));
}

double fit_power_rate(std::span<const double> series, Index lo, Index hi) {
    check_fit_window(series, lo, hi);
    std::vector<double> ts, logs;
    for (Index t = lo; t <= hi; ++t) {
        ts.push_back(std::log(static_cast<double>(t + 1)));
        logs.push_back(std::log(series[static_cast<std::size_t>(t)]));
    }
    return ols_slope(ts, logs);
}

std::pair<Index, Index> default_fit_window(Index length) {
    if (length < 5) throw parameter_error("default_fit_window: series too short");
    const Index lo = static_cast<Index>(0.2 * static_cast<double>(length - 1));
    const Index hi = static_cast<Index>(0.8 * static_cast<double>(length - 1));
    return {lo, std::max(hi, lo + 2)};
}

std::pair<Index, Index> default_fit_window(std::span<const double> series) {
    Index above_floor = static_cast<Index>(series.size());
    if (!series.empty() && series[0] > 0.0) {
        const double floor_level = series[0] * 1e-28;
        above_floor = 0;
        while (above_floor < static_cast<Index>(series.size()) &&
               series[static_cast<std::size_t>(above_floor)] > floor_level)
            ++above_floor;
    }
    return default_fit_window(above_floor);
}

double contraction_check(const NetworkProblem& p, const std::vector<Graph>& graph_seq,
                         WeightRule rule, std::optional<double> h, bool strict) {
    if (strict && !graph_seq.empty() && !is_connected(union_graph(graph_seq)))
        throw connectivity_error("contraction_check: union graph is not connected");
    const Matrix proj = stacked_kernel_projector(p);
    Matrix product = proj;
    for (const Graph& g : graph_seq) {
        if (g.node_count() != p.node_count())
            throw shape_error("contraction_check: graph node count mismatch");
        const MixingWeight mw = weight_from_graph(g, rule, h);
        product = proj * lift_weight(mw.w, p.dim()) * product;
    }
    return mixed_matrix_norm(product, p.node_count());
}

} // namespace netlineq
