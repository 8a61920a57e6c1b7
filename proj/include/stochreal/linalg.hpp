#pragma once

// Small dense linear-algebra helpers shared by the realization modules.
// Everything operates on dynamic-size Eigen matrices; problem sizes here are
// tiny (n <= ~10), so clarity wins over fixed-size specializations.

#include <Eigen/Dense>

namespace stochreal::linalg {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Default PSD tolerance: eigenvalues >= -kPsdTol * (1 + ||M||) count as >= 0.
inline constexpr double kPsdTol = 1e-9;

MatrixXd Symmetrize(const Eigen::Ref<const MatrixXd>& m);

/// Smallest eigenvalue of the symmetric part of `m`. Returns +inf for 0x0.
double MinEigenvalue(const Eigen::Ref<const MatrixXd>& m);

/// Spectral radius via the (complex) eigenvalue decomposition. 0 for 0x0.
double SpectralRadius(const Eigen::Ref<const MatrixXd>& m);

/// PSD within the relative tolerance policy above.
bool IsPsd(const Eigen::Ref<const MatrixXd>& m, double tol = kPsdTol);

/// Moore-Penrose pseudo-inverse; singular values <= rtol * sigma_max are
/// treated as zero.
MatrixXd PseudoInverse(const Eigen::Ref<const MatrixXd>& m, double rtol = 1e-12);

/// Symmetric square root factor L with L L^T = m (m symmetric PSD within
/// tolerance). Tiny negative eigenvalues are clipped to zero.
MatrixXd PsdFactor(const Eigen::Ref<const MatrixXd>& m);

/// max_ij |m_ij|, 0 for empty matrices.
double MaxAbs(const Eigen::Ref<const MatrixXd>& m);

/// 2-norm condition number; +inf if singular.
double ConditionNumber(const Eigen::Ref<const MatrixXd>& m);

/// Solves X = A X A^T + Q for X by vectorization,
/// (I - A (x) A) vec(X) = vec(Q). Caller guarantees rho(A) < 1.
MatrixXd SolveDiscreteLyapunov(const Eigen::Ref<const MatrixXd>& a,
                               const Eigen::Ref<const MatrixXd>& q);

}  // namespace stochreal::linalg
