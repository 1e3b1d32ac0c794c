#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "netlineq/graphs.hpp"
#include "netlineq/linalg.hpp"

namespace netlineq {

enum class WeightRule { LaplacianH, Metropolis };

WeightRule weight_rule_from_string(const std::string& name);
const char* to_string(WeightRule rule);

/// Symmetric doubly stochastic mixing weight induced by a graph; eta is the
/// smallest positive entry, reported for diagnostics.
struct MixingWeight {
    Matrix w;
    double eta = 1.0;
};

/// LaplacianH: W = I - hL with h defaulting to 1/(2 max degree), the
/// per-graph choice used throughout the experiments. Metropolis:
/// W_ij = 1/(1 + max(d_i, d_j)) on edges.
MixingWeight weight_from_graph(const Graph& g, WeightRule rule = WeightRule::LaplacianH,
                               std::optional<double> h = std::nullopt);

/// Exact expectation E[W(t)] over the process outcome distribution.
/// Supported for the i.i.d. process kinds.
Matrix mean_weight(const GraphProcess& proc, WeightRule rule = WeightRule::LaplacianH,
                   std::optional<double> h = std::nullopt);

/// Exact (probability, weight) pairs for the i.i.d. process kinds; the
/// enumeration backing mean_weight and the rate-bound expectations.
std::vector<std::pair<double, MixingWeight>> weight_distribution(
    const GraphProcess& proc, WeightRule rule = WeightRule::LaplacianH,
    std::optional<double> h = std::nullopt, Index max_outcomes = Index(1) << 20);

} // namespace netlineq
