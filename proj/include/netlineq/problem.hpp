#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "netlineq/linalg.hpp"

namespace netlineq {

enum class SolutionKind { UniqueExact, MultipleExact, LeastSquaresOnly };

const char* to_string(SolutionKind kind);

struct SolutionInfo {
    SolutionKind kind;
    Index rank = 0;
    std::optional<Vector> x_star; // unique exact solution
    std::optional<Vector> x_ls;   // unique least-squares solution, set iff rank == m
};

/// One node's slice of the equation together with cached derived quantities.
struct NodeBlock {
    Matrix h;           // l_i x m
    Vector z;           // l_i
    Matrix h_pinv;      // m x l_i
    Matrix kernel_proj; // m x m projector onto kernel(h)
    std::vector<double> row_cdf; // cumulative squared-row-norm masses
    bool has_zero_row = false;
};

/// The network linear equation z = Hy with its contiguous row-block
/// partition across N nodes. Immutable after construction; shareable
/// across workers.
class NetworkProblem {
public:
    NetworkProblem(Matrix h, Vector z, std::vector<Index> sizes);

    Index node_count() const { return static_cast<Index>(blocks_.size()); }
    Index dim() const { return h_.cols(); }
    Index total_rows() const { return h_.rows(); }

    const Matrix& matrix() const { return h_; }
    const Vector& rhs() const { return z_; }
    const Matrix& matrix_pinv() const { return h_pinv_; }
    const std::vector<Index>& partition() const { return sizes_; }
    const NodeBlock& node(Index i) const { return blocks_[static_cast<std::size_t>(i)]; }
    const SolutionInfo& solutions() const { return solutions_; }

    bool admits_exact_solutions() const {
        return solutions_.kind != SolutionKind::LeastSquaresOnly;
    }

private:
    Matrix h_;
    Vector z_;
    std::vector<Index> sizes_;
    Matrix h_pinv_;
    std::vector<NodeBlock> blocks_;
    SolutionInfo solutions_;
};

/// Assigns node i the contiguous rows following nodes 1..i-1.
NetworkProblem partition_problem(Matrix h, Vector z, std::vector<Index> sizes);

SolutionInfo classify_solutions(const Matrix& h, const Vector& z, double tol = kRankCutoff);
SolutionInfo classify_solutions(const NetworkProblem& p, double tol = kRankCutoff);

/// y*(x0) = (1/N) sum_i proj(x_i(0)) onto {y : Hy = z}; the almost-sure
/// limit of projection consensus. Requires exact solutions.
Vector projection_average(const NetworkProblem& p, const Vector& stacked_x0);

/// Problem file: matrix block "rows cols" + rows, then vector block
/// "dim" + entries, all whitespace-separated decimals.
std::pair<Matrix, Vector> load_problem(const std::string& path);
void save_problem(const std::string& path, const Matrix& h, const Vector& z);

/// Sparse "label idx:val ..." lines with 1-based indices; labels become z.
/// feature_count 0 infers the width from the largest index seen.
std::pair<Matrix, Vector> load_libsvm(const std::string& path, Index feature_count = 0);

/// Random Gaussian equation with prescribed rank (factor product) and an
/// optional residual orthogonal to range(H) making the system inconsistent.
struct SyntheticSpec {
    std::vector<Index> sizes;
    Index dim = 0;
    Index rank = 0;
    double residual_norm = 0.0;
};

std::pair<Matrix, Vector> make_synthetic(const SyntheticSpec& spec, std::mt19937_64& rng);

std::vector<Index> random_partition_sizes(Index nodes, Index lo, Index hi,
                                          std::mt19937_64& rng);

} // namespace netlineq
