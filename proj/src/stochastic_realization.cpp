#include "stochreal/stochastic_realization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "stochreal/linalg.hpp"

namespace stochreal {
namespace {

// r0 - H P H^T below this (relative to r0) is treated as leaving the feasible
// region during the Riccati iteration.
constexpr double kGuard = 1e-14;

RealizationTriplet Backward(const RealizationTriplet& t) {
  return {t.N.transpose(), t.F.transpose(), t.H.transpose()};
}

}  // namespace

MatrixXd ResidualMatrix(const RealizationTriplet& triplet, double r0,
                        const MatrixXd& P) {
  const int n = triplet.order();
  if (P.rows() != n || P.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("P must be {}x{}", n, n));
  }
  MatrixXd lhs(n + 1, n + 1);
  lhs.topLeftCorner(n, n) = P;
  lhs.topRightCorner(n, 1) = triplet.N;
  lhs.bottomLeftCorner(1, n) = triplet.N.transpose();
  lhs(n, n) = r0;
  MatrixXd stacked(n + 1, n);
  stacked.topRows(n) = triplet.F;
  stacked.bottomRows(1) = triplet.H;
  return linalg::Symmetrize(lhs - stacked * P * stacked.transpose());
}

bool IsFeasible(const RealizationTriplet& triplet, double r0, const MatrixXd& P,
                const FeasibilityTolerance& tol) {
  if (P.size() > 0 && !(linalg::MinEigenvalue(P) > tol.strict)) return false;
  return linalg::IsPsd(ResidualMatrix(triplet, r0, P), tol.psd);
}

NoiseCovariances ExtractNoise(const RealizationTriplet& triplet, double r0,
                              const MatrixXd& P,
                              const FeasibilityTolerance& tol) {
  const MatrixXd residual = ResidualMatrix(triplet, r0, P);
  if (!linalg::IsPsd(P, tol.psd) || !linalg::IsPsd(residual, tol.psd)) {
    throw Error(ErrorCode::kInfeasible,
                fmt::format("P is not in the solution set (min eig P = {:.3e}, "
                            "min eig residual = {:.3e})",
                            linalg::MinEigenvalue(P),
                            linalg::MinEigenvalue(residual)));
  }
  const int n = triplet.order();
  return {P, residual.topLeftCorner(n, n), residual(n, n),
          residual.topRightCorner(n, 1)};
}

MatrixXd RiccatiStep(const RealizationTriplet& t, double r0, const MatrixXd& P) {
  const VectorXd gain = t.N - t.F * P * t.H.transpose();
  const double innovation = r0 - t.H.dot(P * t.H.transpose());
  return linalg::Symmetrize(t.F * P * t.F.transpose() +
                            gain * gain.transpose() / innovation);
}

double RiccatiResidual(const RealizationTriplet& t, double r0, const MatrixXd& P) {
  if (t.order() == 0) return 0.0;
  const double innovation = r0 - t.H.dot(P * t.H.transpose());
  if (!(innovation > 0.0)) return std::numeric_limits<double>::infinity();
  return linalg::MaxAbs(P - RiccatiStep(t, r0, P)) /
         std::max(1.0, linalg::MaxAbs(P));
}

MatrixXd MinimalSolution(const RealizationTriplet& t, double r0,
                         const RiccatiOptions& opts, int* iterations) {
  const int n = t.order();
  MatrixXd P = MatrixXd::Zero(n, n);
  if (iterations) *iterations = 0;
  if (n == 0) {
    if (r0 < 0.0) {
      throw Error(ErrorCode::kNotPositiveReal,
                  fmt::format("r0 = {} is negative", r0));
    }
    return P;
  }
  if (!(r0 > 0.0)) {
    throw Error(ErrorCode::kNotPositiveReal,
                fmt::format("r0 = {} must be positive for a non-trivial series",
                            r0));
  }
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double innovation = r0 - t.H.dot(P * t.H.transpose());
    if (!(innovation > kGuard * r0)) {
      throw Error(ErrorCode::kNotPositiveReal,
                  fmt::format("r0 - H P H^T = {:.3e} left (0, inf) at "
                              "iteration {}",
                              innovation, it));
    }
    MatrixXd next = RiccatiStep(t, r0, P);
    if (!next.allFinite()) {
      throw Error(ErrorCode::kNotPositiveReal,
                  fmt::format("Riccati iterate diverged at iteration {}", it));
    }
    const double step = linalg::MaxAbs(next - P);
    P = std::move(next);
    if (step <= opts.tol * linalg::MaxAbs(P)) {
      if (iterations) *iterations = it;
      return P;
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              fmt::format("Riccati iteration did not converge in {} steps",
                          opts.max_iter));
}

ExtremalSolutions ComputeExtremalP(const RealizationTriplet& triplet, double r0,
                                   const RiccatiOptions& opts) {
  ExtremalSolutions out;
  out.p_min = MinimalSolution(triplet, r0, opts, &out.iterations_min);
  if (triplet.order() == 0) {
    out.p_max = out.p_min;
    return out;
  }
  const MatrixXd backward =
      MinimalSolution(Backward(triplet), r0, opts, &out.iterations_max);
  if (!(linalg::ConditionNumber(backward) < 1e12)) {
    throw Error(ErrorCode::kNoConvergence,
                "backward minimal solution is singular; P_max undefined");
  }
  out.p_max = linalg::Symmetrize(backward.inverse());
  out.p_min_strict = linalg::MinEigenvalue(out.p_min) > FeasibilityTolerance{}.strict;
  return out;
}

std::optional<ScalarInterval> ComputeScalarInterval(double H, double F,
                                                    double N, double r0) {
  if (!(std::abs(F) <= 1.0) || H == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("scalar interval needs |F| <= 1 and H != 0 "
                            "(F = {}, H = {})",
                            F, H));
  }
  const double hn = H * N;
  if (hn < r0 * (F - 1.0) / 2.0 || hn > r0 * (F + 1.0) / 2.0) {
    return std::nullopt;
  }
  const double delta = std::max(
      0.0, (1.0 - F * F) * (r0 * (1.0 + F) - 2.0 * hn) * (r0 * (1.0 - F) + 2.0 * hn));
  const double sum = 2.0 * H * F * N + r0 * (1.0 - F * F);
  const double h2 = H * H;
  // Larger root from the sum, smaller one from the product N^2 / H^2 of the
  // roots, which avoids cancellation when N is small.
  const double big = sum + std::sqrt(delta);
  ScalarInterval out;
  out.upper = big / (2.0 * h2);
  out.lower = big > 0.0 ? 2.0 * N * N / big : 0.0;
  return out;
}

std::optional<ScalarInterval> ComputeScalarInterval(
    const RealizationTriplet& triplet, double r0) {
  if (triplet.order() != 1) {
    throw Error(ErrorCode::kNotScalar,
                fmt::format("closed-form interval needs order 1, got {}",
                            triplet.order()));
  }
  return ComputeScalarInterval(triplet.H(0), triplet.F(0, 0), triplet.N(0), r0);
}

double ToeplitzMinEigenvalue(const CovarianceSeries& series, int m) {
  if (m < 0 || m > series.K()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("Toeplitz order m = {} exceeds K = {}", m, series.K()));
  }
  MatrixXd toeplitz(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) toeplitz(i, j) = series.at(std::abs(i - j));
  }
  return linalg::MinEigenvalue(toeplitz);
}

bool ToeplitzIsCovariance(const CovarianceSeries& series, int m, double tol) {
  return ToeplitzMinEigenvalue(series, m) >= -tol * std::abs(series.r0);
}

PositiveRealResult PositiveRealCheck(const RealizationTriplet& triplet,
                                     double r0, const RiccatiOptions& opts) {
  PositiveRealResult out;
  try {
    out.certificate = ComputeExtremalP(triplet, r0, opts);
    out.positive_real = true;
    if (!out.certificate->p_min_strict) {
      out.diagnostic = "P_min is singular (degenerate boundary solution)";
    }
  } catch (const Error& e) {
    out.failure = e.code();
    out.diagnostic = e.what();
  }
  return out;
}

SolutionSetSummary SummarizeSolutionSet(const RealizationTriplet& triplet,
                                        double r0, const RiccatiOptions& opts) {
  SolutionSetSummary out;
  if (triplet.order() == 1 && std::abs(triplet.F(0, 0)) <= 1.0 &&
      triplet.H(0) != 0.0) {
    out.scalar_interval = ComputeScalarInterval(triplet, r0);
  }
  const PositiveRealResult check = PositiveRealCheck(triplet, r0, opts);
  out.feasible = check.positive_real;
  out.diagnostic = check.diagnostic;
  if (check.certificate) {
    out.p_min = check.certificate->p_min;
    out.p_max = check.certificate->p_max;
    out.p_min_strict = check.certificate->p_min_strict;
    out.residual_min_eig_at_p_min =
        linalg::MinEigenvalue(ResidualMatrix(triplet, r0, *out.p_min));
    out.residual_min_eig_at_p_max =
        linalg::MinEigenvalue(ResidualMatrix(triplet, r0, *out.p_max));
  }
  return out;
}

}  // namespace stochreal
