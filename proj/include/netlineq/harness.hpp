#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netlineq/analysis.hpp"
#include "netlineq/graphs.hpp"
#include "netlineq/mixing.hpp"
#include "netlineq/problem.hpp"
#include "netlineq/solvers.hpp"

namespace netlineq {

enum class SolverKind { Projection, RandomizedProjection, GradientDescent, RandomizedGd };

SolverKind solver_kind_from_string(const std::string& name);
const char* to_string(SolverKind kind);

/// Flat key = value experiment description; see the README for the grammar.
struct ExperimentConfig {
    // problem source: a problem file, a libsvm file, or synthetic data
    std::string problem_file;
    std::string libsvm_file;
    Index nodes = 20;
    Index dim = 10;
    Index rank = 10;
    Index rows_min = 1;
    Index rows_max = 4;
    std::vector<Index> row_sizes; // explicit partition, overrides rows_min/max
    double residual = 0.0;        // > 0 makes the synthetic system inconsistent

    // graph process
    std::string graph_kind = "iid-uniform"; // fixed|iid-uniform|iid-bernoulli|markov|temporal
    std::string space_dir;                  // load a materialized sample space
    Index space_size = 30;
    double base_edge_prob = 0.35;
    double keep_prob = 0.3;
    double bernoulli_q = 0.5;
    Index temporal_state_dim = 100;

    // mixing weights
    std::string weight_rule = "laplacian-h";
    double mixing_h = 0.0; // 0 = per-graph default 1/(2 max degree)

    // solver
    std::string solver = "projection";
    double h = 0.0; // consensus gain for gd solvers; 0 = 1/(4N)
    std::string schedule = "power";
    double delta1 = 0.25;
    double alpha_const = 0.0;
    double alpha_scale = 0.0;          // 0 = min(1, h) for gd solvers
    std::string init = "gaussian";     // gaussian | gaussian-local
    double init_scale = 1.0;

    // run control
    Index iterations = 2000;
    Index runs = 50;
    std::uint64_t seed = 1;
    std::string output;
    std::string plot_output;
    bool bounds = false;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Everything run_experiment derives deterministically from a config:
/// the problem, the process prototype, the shared initial state and the
/// error target.
struct ExperimentSetup {
    NetworkProblem problem;
    GraphProcess process;
    WeightRule rule;
    std::optional<double> mixing_h;
    SolverKind solver;
    double h_eff;
    StepSchedule schedule;
    Vector x0;
    Vector target;
};

ExperimentSetup build_setup(const ExperimentConfig& cfg);

/// One seeded trajectory; run_index selects the per-run graph and row
/// sampling streams.
TrajectoryRecord run_trajectory(const ExperimentSetup& setup, const ExperimentConfig& cfg,
                                std::uint64_t run_index);

struct AggregateResult {
    Index iterations = 0;
    Index runs = 0;
    std::vector<double> e1_mean, e1_stderr, e2_mean, e2_stderr;
    std::vector<TrajectoryRecord> records;
    Vector initial_state;
    Vector target;
    std::optional<RateBounds> bounds;
    std::optional<double> exp_rate;
    std::optional<double> power_rate;
};

/// Runs R seeded trajectories over a worker pool (NETLINEQ_WORKERS, default
/// hardware concurrency) and reduces them in run-index order, so the output
/// bytes do not depend on the scheduling.
AggregateResult run_experiment(const ExperimentConfig& cfg);

/// Header "t,e1,e1_stderr,e2,e2_stderr", one row per iteration.
void emit_csv(const AggregateResult& res, const std::string& path);

/// Adds bound reference columns r1 = e1(0) theta1^t, r2 = e1(0) theta2^t
/// when bounds were computed.
void emit_plot_data(const AggregateResult& res, const std::string& path);

int cli_main(int argc, char** argv);

} // namespace netlineq
