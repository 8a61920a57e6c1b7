#pragma once

// Deterministic realization: recover a minimal triplet (H, F, N) with
// r_k = H F^{k-1} N from the Hankel matrix of the lags of a covariance series.

#include <optional>

#include <Eigen/Dense>

#include "stochreal/model.hpp"

namespace stochreal {

struct RealizationTriplet {
  RowVectorXd H;  // 1 x n
  MatrixXd F;     // n x n
  VectorXd N;     // n x 1

  int order() const { return static_cast<int>(F.rows()); }
  static RealizationTriplet Empty() {
    return {RowVectorXd(0), MatrixXd(0, 0), VectorXd(0)};
  }
};

/// Triplet read off a stationary GUM: H = b, F = a + c b,
/// N = a eta b^T + c r0. Throws NotStationary.
RealizationTriplet DirectRealization(const GumParameters& params);

/// entries(i, j) = r_{i+j+1+shift}, 0-based i, j.
struct HankelBlock {
  MatrixXd entries;
  int p() const { return static_cast<int>(entries.rows()); }
  int q() const { return static_cast<int>(entries.cols()); }
};

/// Requires p + q - 1 + shift <= K; throws InsufficientLags otherwise.
HankelBlock BuildHankel(const CovarianceSeries& series, int p, int q,
                        int shift = 0);

struct RankEstimate {
  int rank = 0;
  VectorXd singular_values;
};

/// Absolute floor below which singular values never count.
inline constexpr double kRankFloor = 1e-12;
/// Ratio sigma_i / sigma_{i+1} treated as a rank gap.
inline constexpr double kRankGap = 1e6;

/// Number of singular values > tol * sigma_max and > kRankFloor.
RankEstimate NumericalRank(const HankelBlock& block, double tol);

/// Order estimate: position of the first relative gap >= kRankGap among the
/// singular values above kRankFloor; falls back to NumericalRank(tol).
int EstimateOrder(const Eigen::VectorXd& singular_values, double tol);

struct RealizationResult {
  RealizationTriplet triplet;
  VectorXd singular_values;       // of the p x q Hankel block
  double reconstruction_error = 0.0;  // relative, over lags 1..p+q
  int p = 0;
  int q = 0;
};

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kReconstructionTol = 1e-6;

/// Ho-Kalman with balanced factors O = U sqrt(S), C = sqrt(S) V^T.
/// Needs p + q <= K (the shifted block uses r_{i+j+2}). Throws
/// InsufficientLags, OrderTooLargeForWindow, ReconstructionFailure.
RealizationResult HoKalman(const CovarianceSeries& series, int p, int q,
                           double tol = kDefaultRankTol);

/// Window p = q = max(2 n_est + 2, 6), capped so that p + q <= K; n_est from
/// the largest square window the series allows.
int DefaultWindow(const CovarianceSeries& series, double tol = kDefaultRankTol);

/// HoKalman with DefaultWindow.
RealizationResult HoKalman(const CovarianceSeries& series,
                           double tol = kDefaultRankTol);

/// r_k = H F^{k-1} N, k = 1..K, by iterated products.
CovarianceSeries ReconstructSeries(const RealizationTriplet& triplet, double r0,
                                   int K);

/// [H; HF; ...; HF^{rows-1}].
MatrixXd ObservabilityMatrix(const RealizationTriplet& triplet, int rows);
/// [N, FN, ..., F^{cols-1} N].
MatrixXd ReachabilityMatrix(const RealizationTriplet& triplet, int cols);
/// Both n-step matrices have rank n.
bool IsMinimal(const RealizationTriplet& triplet, double tol = kDefaultRankTol);

/// (H T^-1, T F T^-1, T N). Throws SingularTransform if cond(T) >= 1e12.
RealizationTriplet SimilarityTransform(const RealizationTriplet& triplet,
                                       const MatrixXd& transform);

struct Isomorphism {
  MatrixXd transform;
  /// Largest relative mismatch over the three similarity relations.
  double residual = 0.0;
};

/// T = O2^+ O1 from n-row observability matrices, accepted when every
/// relation (H2 = H1 T^-1, F2 = T F1 T^-1, N2 = T N1) holds to `tol`.
/// nullopt means NotIsomorphic. Throws DifferentOrders.
std::optional<Isomorphism> FindIsomorphism(const RealizationTriplet& t1,
                                           const RealizationTriplet& t2,
                                           double tol = 1e-8);

}  // namespace stochreal
