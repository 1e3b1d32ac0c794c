#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "netlineq/graphs.hpp"
#include "netlineq/mixing.hpp"
#include "netlineq/problem.hpp"

namespace netlineq {

/// Diminishing step-size schedules. Power and harmonic satisfy
/// sum alpha = inf, sum alpha^2 < inf for any positive scale.
struct StepSchedule {
    enum class Kind { Power, Harmonic, Constant };
    Kind kind = Kind::Harmonic;
    double delta1 = 0.25; // power exponent is 1/2 + delta1
    double value = 1.0;   // constant alpha
    double scale = 1.0;
};

/// Power schedule alpha(t) = scale / (t+1)^(1/2 + delta1), delta1 in (0, 1/2].
StepSchedule make_power_schedule(double delta1, double scale = 1.0);
/// Harmonic schedule alpha(t) = scale / (t+1).
StepSchedule make_harmonic_schedule(double scale = 1.0);
StepSchedule make_constant_schedule(double value);

double alpha(const StepSchedule& sched, Index t);

/// Stacked node estimates plus iteration metadata. Owned by exactly one
/// trajectory worker; steps mutate it sequentially.
struct SolverState {
    Index t = 0;
    Vector x; // N*m, node i occupies segment [i*m, (i+1)*m)
    std::vector<std::mt19937_64> row_rngs; // one per-node row-sampling stream
};

SolverState make_state(const NetworkProblem& p, Vector x0, std::uint64_t rows_seed);

/// x_i <- proj_{A_i}( sum_j W_ij x_j ).
void step_projection_consensus(const NetworkProblem& p, const MixingWeight& w, SolverState& s);

/// Same mixing step, but each node projects onto one of its row hyperplanes,
/// sampled with probability ||row||^2 / ||H_i||_F^2 independently of time,
/// other nodes and the graph process.
void step_randomized_projection(const NetworkProblem& p, const MixingWeight& w, SolverState& s);

/// x_i <- x_i - h sum_{j in N_i} (x_i - x_j) - alpha(t) H_i^T (H_i x_i - z_i).
void step_gradient_descent(const NetworkProblem& p, const Graph& g, double h,
                           const StepSchedule& sched, SolverState& s);

/// Gradient term restricted to one sampled row per node.
void step_randomized_gd(const NetworkProblem& p, const Graph& g, double h,
                        const StepSchedule& sched, SolverState& s);

} // namespace netlineq
