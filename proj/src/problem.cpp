#include "netlineq/problem.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

namespace netlineq {

const char* to_string(SolutionKind kind) {
    switch (kind) {
        case SolutionKind::UniqueExact: return "unique-exact";
        case SolutionKind::MultipleExact: return "multiple-exact";
        case SolutionKind::LeastSquaresOnly: return "least-squares-only";
    }
    return "unknown";
}

NetworkProblem::NetworkProblem(Matrix h, Vector z, std::vector<Index> sizes)
    : h_(std::move(h)), z_(std::move(z)), sizes_(std::move(sizes)) {
    require_finite(h_, "NetworkProblem");
    require_finite(z_, "NetworkProblem");
    if (h_.rows() < 1 || h_.cols() < 1)
        throw invalid_input_error("NetworkProblem: empty equation");
    if (z_.size() != h_.rows())
        throw partition_error("NetworkProblem: rhs length does not match row count");
    if (sizes_.empty()) throw partition_error("NetworkProblem: no node sizes given");
    const Index total = std::accumulate(sizes_.begin(), sizes_.end(), Index(0));
    if (total != h_.rows())
        throw partition_error("NetworkProblem: node sizes must sum to the row count");

    blocks_.reserve(sizes_.size());
    Index offset = 0;
    for (Index li : sizes_) {
        if (li < 1) throw partition_error("NetworkProblem: every node needs at least one row");
        NodeBlock block;
        block.h = h_.middleRows(offset, li);
        block.z = z_.segment(offset, li);
        if (block.h.cwiseAbs().maxCoeff() == 0.0)
            throw partition_error("NetworkProblem: a node block is the zero matrix");
        block.h_pinv = pseudoinverse(block.h);
        block.kernel_proj = kernel_projector(block.h);
        const double fro2 = block.h.squaredNorm();
        block.row_cdf.resize(static_cast<std::size_t>(li));
        double running = 0.0;
        for (Index r = 0; r < li; ++r) {
            const double w = block.h.row(r).squaredNorm();
            if (w == 0.0) block.has_zero_row = true;
            running += w / fro2;
            block.row_cdf[static_cast<std::size_t>(r)] = running;
        }
        block.row_cdf.back() = 1.0;
        blocks_.push_back(std::move(block));
        offset += li;
    }
    h_pinv_ = pseudoinverse(h_);
    solutions_ = classify_solutions(h_, z_);
}

NetworkProblem partition_problem(Matrix h, Vector z, std::vector<Index> sizes) {
    return NetworkProblem(std::move(h), std::move(z), std::move(sizes));
}

SolutionInfo classify_solutions(const Matrix& h, const Vector& z, double tol) {
    require_finite(h, "classify_solutions");
    require_finite(z, "classify_solutions");
    Eigen::BDCSVD<Matrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? tol * sv(0) : 0.0;
    Index rank = 0;
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) ++rank;

    Vector inv = Vector::Zero(sv.size());
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) inv(k) = 1.0 / sv(k);
    const Vector candidate = svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * z));
    const bool consistent = (h * candidate - z).norm() <= 1e-8 * (1.0 + z.norm());

    SolutionInfo info;
    info.rank = rank;
    if (consistent) {
        info.kind = rank == h.cols() ? SolutionKind::UniqueExact : SolutionKind::MultipleExact;
        if (rank == h.cols()) info.x_star = candidate;
    } else {
        info.kind = SolutionKind::LeastSquaresOnly;
    }
    if (rank == h.cols()) info.x_ls = candidate;
    return info;
}

SolutionInfo classify_solutions(const NetworkProblem& p, double tol) {
    return classify_solutions(p.matrix(), p.rhs(), tol);
}

Vector projection_average(const NetworkProblem& p, const Vector& stacked_x0) {
    if (!p.admits_exact_solutions())
        throw infeasible_set_error("projection_average: the equation has no exact solution");
    const Index m = p.dim();
    const Index n = p.node_count();
    if (stacked_x0.size() != n * m)
        throw shape_error("projection_average: stacked state has wrong dimension");
    Vector avg = Vector::Zero(m);
    for (Index i = 0; i < n; ++i) {
        const Vector xi = stacked_x0.segment(i * m, m);
        avg += xi - p.matrix_pinv() * (p.matrix() * xi - p.rhs());
    }
    return avg / static_cast<double>(n);
}

namespace {

// Streams values with enough digits for a bit-exact double round trip.
void write_value(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

double read_value(std::istream& in, const std::string& path, Index line) {
    double v = 0.0;
    if (!(in >> v))
        throw parse_error(path + ":" + std::to_string(line) + ": expected a number");
    return v;
}

} // namespace

std::pair<Matrix, Vector> load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_problem: cannot open " + path);
    Index rows = 0, cols = 0;
    if (!(in >> rows >> cols))
        throw parse_error(path + ":1: expected \"rows cols\" header");
    if (rows < 1 || cols < 1)
        throw parse_error(path + ":1: dimensions must be positive");
    Matrix h(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) h(i, j) = read_value(in, path, i + 2);
    Index dim = 0;
    if (!(in >> dim)) throw parse_error(path + ": expected vector \"dim\" header");
    if (dim != rows)
        throw parse_error(path + ": vector length does not match the matrix rows");
    Vector z(dim);
    for (Index i = 0; i < dim; ++i) z(i) = read_value(in, path, rows + 3 + i);
    return {std::move(h), std::move(z)};
}

void save_problem(const std::string& path, const Matrix& h, const Vector& z) {
    if (z.size() != h.rows())
        throw shape_error("save_problem: rhs length does not match matrix rows");
    std::ofstream out(path);
    if (!out) throw io_error("save_problem: cannot open " + path);
    out << h.rows() << ' ' << h.cols() << '\n';
    for (Index i = 0; i < h.rows(); ++i) {
        for (Index j = 0; j < h.cols(); ++j) {
            if (j) out << ' ';
            write_value(out, h(i, j));
        }
        out << '\n';
    }
    out << z.size() << '\n';
    for (Index i = 0; i < z.size(); ++i) {
        if (i) out << ' ';
        write_value(out, z(i));
    }
    out << '\n';
    if (!out) throw io_error("save_problem: write failed for " + path);
}

std::pair<Matrix, Vector> load_libsvm(const std::string& path, Index feature_count) {
    std::ifstream in(path);
    if (!in) throw io_error("load_libsvm: cannot open " + path);
    std::vector<double> labels;
    std::vector<std::vector<std::pair<Index, double>>> rows;
    Index max_index = 0;
    std::string line;
    Index lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double label = 0.0;
        if (!(ls >> label))
            throw parse_error(path + ":" + std::to_string(lineno) + ": expected a label");
        std::vector<std::pair<Index, double>> entries;
        std::string token;
        while (ls >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos)
                throw parse_error(path + ":" + std::to_string(lineno) +
                                  ": expected \"index:value\", got \"" + token + "\"");
            Index idx = 0;
            double val = 0.0;
            try {
                idx = static_cast<Index>(std::stoll(token.substr(0, colon)));
                val = std::stod(token.substr(colon + 1));
            } catch (const std::exception&) {
                throw parse_error(path + ":" + std::to_string(lineno) +
                                  ": malformed entry \"" + token + "\"");
            }
            if (idx < 1)
                throw parse_error(path + ":" + std::to_string(lineno) +
                                  ": indices are 1-based");
            max_index = std::max(max_index, idx);
            entries.emplace_back(idx - 1, val);
        }
        labels.push_back(label);
        rows.push_back(std::move(entries));
    }
    if (labels.empty()) throw parse_error(path + ": no examples found");
    const Index m = feature_count > 0 ? feature_count : max_index;
    if (max_index > m)
        throw shape_error("load_libsvm: feature index exceeds the declared feature count");
    Matrix h = Matrix::Zero(static_cast<Index>(labels.size()), m);
    Vector z(static_cast<Index>(labels.size()));
    for (std::size_t r = 0; r < labels.size(); ++r) {
        z(static_cast<Index>(r)) = labels[r];
        for (auto [j, v] : rows[r]) h(static_cast<Index>(r), j) = v;
    }
    return {std::move(h), std::move(z)};
}

std::pair<Matrix, Vector> make_synthetic(const SyntheticSpec& spec, std::mt19937_64& rng) {
    if (spec.sizes.empty()) throw parameter_error("make_synthetic: no node sizes");
    if (spec.dim < 1) throw parameter_error("make_synthetic: dim must be positive");
    const Index l = std::accumulate(spec.sizes.begin(), spec.sizes.end(), Index(0));
    if (spec.rank < 1 || spec.rank > std::min(l, spec.dim))
        throw parameter_error("make_synthetic: rank must be in [1, min(rows, dim)]");
    if (spec.residual_norm < 0.0)
        throw parameter_error("make_synthetic: residual_norm must be nonnegative");
    if (spec.residual_norm > 0.0 && spec.rank >= l)
        throw parameter_error("make_synthetic: full row rank leaves no room for a residual");

    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix h;
    if (spec.rank == std::min(l, spec.dim)) {
        // a single Gaussian draw has full rank almost surely and is much
        // better conditioned than a factor product
        h.resize(l, spec.dim);
        for (Index i = 0; i < l; ++i)
            for (Index j = 0; j < spec.dim; ++j) h(i, j) = normal(rng);
    } else {
        Matrix left(l, spec.rank), right(spec.rank, spec.dim);
        for (Index i = 0; i < l; ++i)
            for (Index j = 0; j < spec.rank; ++j) left(i, j) = normal(rng);
        for (Index i = 0; i < spec.rank; ++i)
            for (Index j = 0; j < spec.dim; ++j) right(i, j) = normal(rng);
        h = left * right;
    }

    Vector y_true(spec.dim);
    for (Index i = 0; i < spec.dim; ++i) y_true(i) = normal(rng);
    Vector z = h * y_true;

    if (spec.residual_norm > 0.0) {
        const Matrix pinv = pseudoinverse(h);
        Vector residual;
        for (int attempt = 0; attempt < 100; ++attempt) {
            Vector w(l);
            for (Index i = 0; i < l; ++i) w(i) = normal(rng);
            residual = w - h * (pinv * w);
            if (residual.norm() > 1e-8) break;
        }
        if (residual.norm() <= 1e-8)
            throw parameter_error("make_synthetic: failed to draw a residual outside range(H)");
        z += spec.residual_norm * residual / residual.norm();
    }
    return {std::move(h), std::move(z)};
}

std::vector<Index> random_partition_sizes(Index nodes, Index lo, Index hi,
                                          std::mt19937_64& rng) {
    if (nodes < 1) throw parameter_error("random_partition_sizes: nodes must be positive");
    if (lo < 1 || hi < lo) throw parameter_error("random_partition_sizes: need 1 <= lo <= hi");
    std::uniform_int_distribution<Index> pick(lo, hi);
    std::vector<Index> sizes(static_cast<std::size_t>(nodes));
    for (auto& s : sizes) s = pick(rng);
    return sizes;
}

} // namespace netlineq
