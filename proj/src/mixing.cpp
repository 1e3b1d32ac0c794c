#include "netlineq/mixing.hpp"

#include <algorithm>
#include <limits>

namespace netlineq {

WeightRule weight_rule_from_string(const std::string& name) {
    if (name == "laplacian-h") return WeightRule::LaplacianH;
    if (name == "metropolis") return WeightRule::Metropolis;
    throw parameter_error("unknown weight rule: " + name);
}

const char* to_string(WeightRule rule) {
    return rule == WeightRule::LaplacianH ? "laplacian-h" : "metropolis";
}

namespace {

double smallest_positive_entry(const Matrix& w) {
    double eta = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < w.rows(); ++i)
        for (Index j = 0; j < w.cols(); ++j)
            if (w(i, j) > 0.0) eta = std::min(eta, w(i, j));
    return std::isfinite(eta) ? eta : 1.0;
}

} // namespace

MixingWeight weight_from_graph(const Graph& g, WeightRule rule, std::optional<double> h) {
    const Index n = g.node_count();
    const auto deg = g.degrees();
    const Index max_deg = *std::max_element(deg.begin(), deg.end());

    Matrix w;
    if (rule == WeightRule::LaplacianH) {
        if (max_deg == 0) {
            if (h && (*h <= 0.0)) throw invalid_step_error("weight_from_graph: h must be positive");
            return {Matrix::Identity(n, n), 1.0};
        }
        double step = h ? *h : 1.0 / (2.0 * static_cast<double>(max_deg));
        if (step <= 0.0 || step >= 1.0 / static_cast<double>(max_deg))
            throw invalid_step_error("weight_from_graph: h must lie in (0, 1/max-degree)");
        w = Matrix::Identity(n, n) - step * laplacian(g);
    } else {
        w = Matrix::Zero(n, n);
        for (auto [i, j] : g.edges()) {
            const double wij = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
            w(i, j) = wij;
            w(j, i) = wij;
        }
        for (Index i = 0; i < n; ++i) w(i, i) = 1.0 - w.row(i).sum();
    }
    const double eta = smallest_positive_entry(w);
    return {std::move(w), eta};
}

std::vector<std::pair<double, MixingWeight>> weight_distribution(const GraphProcess& proc,
                                                                 WeightRule rule,
                                                                 std::optional<double> h,
                                                                 Index max_outcomes) {
    auto outcomes = proc.outcome_distribution(max_outcomes);
    std::vector<std::pair<double, MixingWeight>> out;
    out.reserve(outcomes.size());
    for (auto& [prob, g] : outcomes)
        out.emplace_back(prob, weight_from_graph(g, rule, h));
    return out;
}

Matrix mean_weight(const GraphProcess& proc, WeightRule rule, std::optional<double> h) {
    const auto dist = weight_distribution(proc, rule, h);
    Matrix mean = Matrix::Zero(proc.node_count(), proc.node_count());
    for (const auto& [prob, mw] : dist) mean += prob * mw.w;
    return mean;
}

} // namespace netlineq
