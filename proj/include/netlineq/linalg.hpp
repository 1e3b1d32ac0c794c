#pragma once

#include <Eigen/Core>

#include "netlineq/errors.hpp"

namespace netlineq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative singular-value cutoff used by pseudoinverse/kernel computations.
inline constexpr double kSvdCutoff = 1e-12;

/// Relative singular-value cutoff used for rank decisions.
inline constexpr double kRankCutoff = 1e-10;

void require_finite(const Eigen::Ref<const Matrix>& a, const char* what);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// tol * sigma_max are treated as zero.
Matrix pseudoinverse(const Matrix& a, double tol = kSvdCutoff);

/// Euclidean projection of x onto the affine set {y : Hy = z},
/// computed as x - pinv(H) (Hx - z). Throws infeasible_set_error when the
/// projected point fails ||H p - z|| <= tol (1 + ||z||), i.e. the set is empty.
Vector affine_projection(const Matrix& h, const Vector& z, const Vector& x,
                         double tol = 1e-8);

/// Symmetric idempotent projector onto kernel(H).
Matrix kernel_projector(const Matrix& h, double tol = kSvdCutoff);

/// Kronecker product; throws size_error when the result would be excessive.
Matrix kronecker(const Matrix& a, const Matrix& b);

/// Largest eigenvalue magnitude. Symmetric matrices use a self-adjoint
/// solver at any size; non-symmetric ones use a full eigendecomposition up
/// to 512x512 and a block subspace iteration beyond that.
double spectral_radius(const Matrix& a, double tol = 1e-10);

/// Mixed matrix norm of a square matrix partitioned into a blocks x blocks
/// grid of equal square blocks: the infinity norm of the matrix of per-block
/// spectral norms.
double mixed_matrix_norm(const Matrix& q, Index blocks);

} // namespace netlineq
