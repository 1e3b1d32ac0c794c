#include "netlineq/linalg.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace netlineq {

namespace {

constexpr Index kMaxKroneckerEntries = 64LL * 1024 * 1024;
constexpr Index kDenseEigensolverLimit = 512;

bool nearly_symmetric(const Matrix& a) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

double spectral_norm(const Eigen::Ref<const Matrix>& a) {
    if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

double abs_max_eig_2x2(const Eigen::Matrix2d& t) {
    const double tr = t(0, 0) + t(1, 1);
    const double det = t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return std::max(std::abs((tr + s) / 2.0), std::abs((tr - s) / 2.0));
    }
    return std::sqrt(det); // conjugate pair, modulus sqrt(det)
}

// Orthogonal iteration on a 2-column block; handles a dominant complex pair.
double subspace_spectral_radius(const Matrix& a, double tol) {
    const Index n = a.rows();
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix q(n, 2);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < 2; ++j) q(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(q);
    q = qr.householderQ() * Matrix::Identity(n, 2);

    double prev = 0.0;
    int stable = 0;
    for (int iter = 0; iter < 10000; ++iter) {
        Matrix z = a * q;
        Eigen::HouseholderQR<Matrix> step(z);
        q = step.householderQ() * Matrix::Identity(n, 2);
        Eigen::Matrix2d t = q.transpose() * (a * q);
        const double r = abs_max_eig_2x2(t);
        if (std::abs(r - prev) <= tol * std::max(1.0, std::abs(r))) {
            if (++stable >= 3) return r;
        } else {
            stable = 0;
        }
        prev = r;
    }
    return prev;
}

} // namespace

void require_finite(const Eigen::Ref<const Matrix>& a, const char* what) {
    if (!a.allFinite())
        throw invalid_input_error(std::string(what) + ": non-finite entries");
}

Matrix pseudoinverse(const Matrix& a, double tol) {
    require_finite(a, "pseudoinverse");
    if (tol <= 0.0) throw invalid_input_error("pseudoinverse: tol must be positive");
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return Matrix::Zero(a.cols(), a.rows());
    const double cutoff = tol * sv(0);
    Vector inv = Vector::Zero(sv.size());
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) inv(k) = 1.0 / sv(k);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector affine_projection(const Matrix& h, const Vector& z, const Vector& x, double tol) {
    require_finite(h, "affine_projection");
    require_finite(z, "affine_projection");
    require_finite(x, "affine_projection");
    if (h.cols() != x.size() || h.rows() != z.size())
        throw shape_error("affine_projection: dimension mismatch");
    const Vector projected = x - pseudoinverse(h) * (h * x - z);
    const double residual = (h * projected - z).norm();
    if (residual > tol * (1.0 + z.norm()))
        throw infeasible_set_error("affine_projection: constraint set is empty");
    return projected;
}

Matrix kernel_projector(const Matrix& h, double tol) {
    require_finite(h, "kernel_projector");
    const Index m = h.cols();
    Eigen::BDCSVD<Matrix> svd(h, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    Matrix p = Matrix::Identity(m, m);
    if (sv.size() == 0 || sv(0) <= 0.0) return p;
    const double cutoff = tol * sv(0);
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) p -= svd.matrixV().col(k) * svd.matrixV().col(k).transpose();
    return (p + p.transpose()) / 2.0;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    require_finite(a, "kronecker");
    require_finite(b, "kronecker");
    const Index rows = a.rows() * b.rows();
    const Index cols = a.cols() * b.cols();
    if (rows <= 0 || cols <= 0 || rows > kMaxKroneckerEntries / cols)
        throw size_error("kronecker: result dimensions too large");
    Matrix out(rows, cols);
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

double spectral_radius(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) throw shape_error("spectral_radius: matrix must be square");
    require_finite(a, "spectral_radius");
    const Index n = a.rows();
    if (n == 1) return std::abs(a(0, 0));
    if (nearly_symmetric(a)) {
        Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.transpose()) / 2.0,
                                                 Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    if (n <= kDenseEigensolverLimit) {
        Eigen::EigenSolver<Matrix> es(a, false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    return subspace_spectral_radius(a, tol);
}

double mixed_matrix_norm(const Matrix& q, Index blocks) {
    if (blocks < 1) throw shape_error("mixed_matrix_norm: block count must be positive");
    if (q.rows() != q.cols() || q.rows() % blocks != 0)
        throw shape_error("mixed_matrix_norm: matrix not divisible into the block grid");
    require_finite(q, "mixed_matrix_norm");
    const Index m = q.rows() / blocks;
    double worst = 0.0;
    for (Index i = 0; i < blocks; ++i) {
        double row_sum = 0.0;
        for (Index j = 0; j < blocks; ++j)
            row_sum += spectral_norm(q.block(i * m, j * m, m, m));
        worst = std::max(worst, row_sum);
    }
    return worst;
}

} // namespace netlineq
