#pragma once

// Stochastic realization: for a minimal triplet (H, F, N) and r0, the set of
// state covariances P with
//
//   [[P, N], [N^T, r0]] - [F; H] P [F^T, H^T] = [[Q, S], [S^T, R]] >= 0,  P > 0
//
// is non-empty iff the series is a covariance series (positive real lemma).
// It is convex and bounded, with extremal elements P_min <= P_max.

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "stochreal/errors.hpp"
#include "stochreal/model.hpp"
#include "stochreal/realization.hpp"

namespace stochreal {

struct NoiseCovariances {
  MatrixXd P;
  MatrixXd Q;
  double R = 0.0;
  VectorXd S;
};

struct FeasibilityTolerance {
  double psd = 1e-9;      // relative, see linalg::IsPsd
  double strict = 1e-12;  // P must have min eigenvalue above this
};

/// [[P, N], [N^T, r0]] - [F; H] P [F^T, H^T], symmetrized; (n+1) x (n+1).
MatrixXd ResidualMatrix(const RealizationTriplet& triplet, double r0,
                        const MatrixXd& P);

bool IsFeasible(const RealizationTriplet& triplet, double r0, const MatrixXd& P,
                const FeasibilityTolerance& tol = {});

/// Q, S, R blocks of the residual. Requires P and the residual PSD within
/// tolerance (strict positivity of P is not required so that boundary
/// solutions can be inspected); throws Infeasible otherwise.
NoiseCovariances ExtractNoise(const RealizationTriplet& triplet, double r0,
                              const MatrixXd& P,
                              const FeasibilityTolerance& tol = {});

struct RiccatiOptions {
  int max_iter = 10000;
  double tol = 1e-12;  // relative update size declaring convergence
};

/// One application of P -> F P F^T + (N - F P H^T)(r0 - H P H^T)^-1 (...)^T.
MatrixXd RiccatiStep(const RealizationTriplet& triplet, double r0,
                     const MatrixXd& P);

/// Residual of the Riccati fixed-point equation at P, max-abs entry relative
/// to max(1, ||P||). +inf if r0 - H P H^T <= 0.
double RiccatiResidual(const RealizationTriplet& triplet, double r0,
                       const MatrixXd& P);

/// Iterates RiccatiStep from P = 0 to its limit, the minimal element of the
/// solution set. Throws NotPositiveReal if r0 - H P H^T leaves (0, inf) or
/// the iterate stops being finite, NoConvergence after max_iter.
MatrixXd MinimalSolution(const RealizationTriplet& triplet, double r0,
                         const RiccatiOptions& opts, int* iterations = nullptr);

struct ExtremalSolutions {
  MatrixXd p_min;
  MatrixXd p_max;
  int iterations_min = 0;
  int iterations_max = 0;
  /// P_min has min eigenvalue > the strict tolerance. False only in the
  /// degenerate N = 0 case.
  bool p_min_strict = true;
};

/// P_min by the forward iteration; P_max as the inverse of the minimal
/// solution for the backward realization (N^T, F^T, H^T). Throws
/// NotPositiveReal / NoConvergence.
ExtremalSolutions ComputeExtremalP(const RealizationTriplet& triplet, double r0,
                                   const RiccatiOptions& opts = {});

struct ScalarInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double p, double tol = 0.0) const {
    return p >= lower - tol && p <= upper + tol;
  }
};

/// Closed-form solution set for n = 1: empty unless
/// r0 (F - 1) / 2 <= HN <= r0 (F + 1) / 2, otherwise the roots of
/// -H^2 P^2 + [r0 (1 - F^2) + 2 H F N] P - N^2. Requires |F| <= 1, H != 0.
std::optional<ScalarInterval> ComputeScalarInterval(double H, double F,
                                                    double N, double r0);
/// Same, for an order-1 triplet; throws NotScalar otherwise.
std::optional<ScalarInterval> ComputeScalarInterval(
    const RealizationTriplet& triplet, double r0);

/// Symmetric Toeplitz matrix with first row [r0, ..., r_m] has min eigenvalue
/// >= -tol * r0. Requires m <= K.
bool ToeplitzIsCovariance(const CovarianceSeries& series, int m,
                          double tol = 1e-9);
double ToeplitzMinEigenvalue(const CovarianceSeries& series, int m);

struct PositiveRealResult {
  bool positive_real = false;
  std::optional<ExtremalSolutions> certificate;
  std::optional<ErrorCode> failure;
  std::string diagnostic;
};

PositiveRealResult PositiveRealCheck(const RealizationTriplet& triplet,
                                     double r0, const RiccatiOptions& opts = {});

struct SolutionSetSummary {
  bool feasible = false;
  std::optional<MatrixXd> p_min;
  std::optional<MatrixXd> p_max;
  std::optional<ScalarInterval> scalar_interval;  // n = 1 only
  bool p_min_strict = false;
  /// Smallest eigenvalue of the residual block at P_min / P_max (zero up to
  /// rounding: the extremal solutions sit on the boundary).
  double residual_min_eig_at_p_min = 0.0;
  double residual_min_eig_at_p_max = 0.0;
  std::string diagnostic;
};

SolutionSetSummary SummarizeSolutionSet(const RealizationTriplet& triplet,
                                        double r0,
                                        const RiccatiOptions& opts = {});

}  // namespace stochreal
