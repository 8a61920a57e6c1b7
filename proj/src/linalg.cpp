#include "stochreal/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/KroneckerProduct>

#include "stochreal/errors.hpp"

namespace stochreal {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotStable: return "NotStable";
    case ErrorCode::kNotPSD: return "NotPSD";
    case ErrorCode::kNotStationary: return "NotStationary";
    case ErrorCode::kFamilyViolation: return "FamilyViolation";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInsufficientLags: return "InsufficientLags";
    case ErrorCode::kOrderTooLargeForWindow: return "OrderTooLargeForWindow";
    case ErrorCode::kReconstructionFailure: return "ReconstructionFailure";
    case ErrorCode::kSingularTransform: return "SingularTransform";
    case ErrorCode::kDifferentOrders: return "DifferentOrders";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kNotPositiveReal: return "NotPositiveReal";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kDegenerateR: return "DegenerateR";
    case ErrorCode::kDegenerateInnovation: return "DegenerateInnovation";
  }
  return "Unknown";
}

namespace linalg {

MatrixXd Symmetrize(const Eigen::Ref<const MatrixXd>& m) {
  return 0.5 * (m + m.transpose());
}

double MinEigenvalue(const Eigen::Ref<const MatrixXd>& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrize(m),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double SpectralRadius(const Eigen::Ref<const MatrixXd>& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::EigenSolver<MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double MaxAbs(const Eigen::Ref<const MatrixXd>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool IsPsd(const Eigen::Ref<const MatrixXd>& m, double tol) {
  if (m.size() == 0) return true;
  const double scale = 1.0 + m.norm();
  return MinEigenvalue(m) >= -tol * scale;
}

MatrixXd PseudoInverse(const Eigen::Ref<const MatrixXd>& m, double rtol) {
  if (m.size() == 0) return MatrixXd(m.cols(), m.rows());
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff = rtol * s(0);
  VectorXd inv = VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

MatrixXd PsdFactor(const Eigen::Ref<const MatrixXd>& m) {
  if (m.size() == 0) return MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrize(m));
  VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

double ConditionNumber(const Eigen::Ref<const MatrixXd>& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const VectorXd& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

MatrixXd SolveDiscreteLyapunov(const Eigen::Ref<const MatrixXd>& a,
                               const Eigen::Ref<const MatrixXd>& q) {
  const Eigen::Index n = a.rows();
  if (n == 0) return MatrixXd(0, 0);
  const MatrixXd system = MatrixXd::Identity(n * n, n * n) -
                          Eigen::kroneckerProduct(a, a).eval();
  const MatrixXd qq = q;
  const VectorXd rhs = Eigen::Map<const VectorXd>(qq.data(), n * n);
  const VectorXd x = system.fullPivLu().solve(rhs);
  return Symmetrize(Eigen::Map<const MatrixXd>(x.data(), n, n));
}

}  // namespace linalg
}  // namespace stochreal
