#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netlineq/graphs.hpp"
#include "netlineq/mixing.hpp"
#include "netlineq/problem.hpp"

namespace netlineq {

/// Lower/upper mean-squared rate bounds for projection consensus over
/// i.i.d. graphs: theta1 = sr(P (Wbar x I) P)^2 and
/// theta2 = sr(P E[(W x I) P (W x I)] P).
struct RateBounds {
    double theta1 = 0.0;
    double theta2 = 0.0;
    Index lifted_dim = 0;
};

struct RateBoundOptions {
    Index dim_cap = 4096;      // max lifted dimension N*m
    Index enum_cap = 4096;     // max enumerated Bernoulli outcomes
    Index mc_draws = 2000;     // Monte Carlo fallback sample count
    std::uint64_t mc_seed = 0x7261746573ULL;
};

/// Block diagonal of the per-node kernel projectors, the lifted P.
Matrix stacked_kernel_projector(const NetworkProblem& p);

/// kron(W, I_m).
Matrix lift_weight(const Matrix& w, Index m);

RateBounds rate_bounds_iid(const NetworkProblem& p, const GraphProcess& proc,
                           WeightRule rule = WeightRule::LaplacianH,
                           std::optional<double> h = std::nullopt,
                           const RateBoundOptions& opts = {});

/// Per-sample metrics (e1, e2): mean squared distance to the target and
/// mean squared deviation from the node average.
std::pair<double, double> metrics(const NetworkProblem& p, const Vector& stacked_x,
                                  const Vector& target);

/// Least-squares slope of log(series) over [lo, hi], exponentiated: the
/// per-iteration geometric factor.
double fit_exponential_rate(std::span<const double> series, Index lo, Index hi);

/// Least-squares slope of log(series) against log(t+1): the power-law
/// exponent.
double fit_power_rate(std::span<const double> series, Index lo, Index hi);

/// Middle 60% of [0, length-1], the default fitting window.
std::pair<Index, Index> default_fit_window(Index length);

/// Middle 60% of the prefix that stays above the floating-point floor
/// (series[0] * 1e-28), so converged tails do not flatten the fit.
std::pair<Index, Index> default_fit_window(std::span<const double> series);

/// Mixed matrix norm of P (W_k x I) ... P (W_1 x I) P over the given graph
/// sequence; a numerical contraction witness when the sequence repeats a
/// jointly connected window N(N-1)/2 times.
double contraction_check(const NetworkProblem& p, const std::vector<Graph>& graph_seq,
                         WeightRule rule = WeightRule::LaplacianH,
                         std::optional<double> h = std::nullopt, bool strict = false);

/// Per-iteration metrics for one Monte Carlo run.
struct TrajectoryRecord {
    std::vector<double> e1;
    std::vector<double> e2;
    std::vector<double> node_sq_error; // max over nodes of ||x_i - target||^2
    std::uint64_t seed = 0;
    std::string solver;
};

} // namespace netlineq
