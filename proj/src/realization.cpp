#include "stochreal/realization.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "stochreal/errors.hpp"
#include "stochreal/linalg.hpp"

namespace stochreal {
namespace {

double SeriesScale(const CovarianceSeries& series, int last_lag) {
  double scale = std::abs(series.r0);
  for (int k = 1; k <= std::min(last_lag, series.K()); ++k) {
    scale = std::max(scale, std::abs(series.at(k)));
  }
  return scale;
}

double RelativeMismatch(const MatrixXd& lhs, const MatrixXd& rhs, double floor) {
  if (lhs.size() == 0) return 0.0;
  const double denom =
      std::max({linalg::MaxAbs(lhs), linalg::MaxAbs(rhs), floor});
  return linalg::MaxAbs(lhs - rhs) / denom;
}

}  // namespace

HankelBlock BuildHankel(const CovarianceSeries& series, int p, int q,
                        int shift) {
  if (p < 0 || q < 0 || shift < 0) {
    throw Error(ErrorCode::kInvalidArgument, "Hankel dimensions must be >= 0");
  }
  if (p > 0 && q > 0 && p + q - 1 + shift > series.K()) {
    throw Error(ErrorCode::kInsufficientLags,
                fmt::format("a {}x{} Hankel block (shift {}) needs {} lags, "
                            "series has {}",
                            p, q, shift, p + q - 1 + shift, series.K()));
  }
  HankelBlock block{MatrixXd(p, q)};
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      block.entries(i, j) = series.at(i + j + 1 + shift);
    }
  }
  return block;
}

RankEstimate NumericalRank(const HankelBlock& block, double tol) {
  RankEstimate out;
  if (block.entries.size() == 0) {
    out.singular_values = VectorXd(0);
    return out;
  }
  out.singular_values = block.entries.jacobiSvd().singularValues();
  const double cutoff = tol * out.singular_values(0);
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    const double s = out.singular_values(i);
    if (s > cutoff && s > kRankFloor) ++out.rank;
  }
  return out;
}

int EstimateOrder(const Eigen::VectorXd& s, double tol) {
  const Eigen::Index len = s.size();
  if (len == 0 || !(s(0) > kRankFloor)) return 0;
  for (Eigen::Index i = 0; i + 1 < len; ++i) {
    if (!(s(i + 1) > kRankFloor)) return static_cast<int>(i + 1);
    if (s(i) / s(i + 1) >= kRankGap) return static_cast<int>(i + 1);
  }
  int rank = 0;
  for (Eigen::Index i = 0; i < len; ++i) {
    if (s(i) > tol * s(0) && s(i) > kRankFloor) ++rank;
  }
  return rank;
}

RealizationResult HoKalman(const CovarianceSeries& series, int p, int q,
                           double tol) {
  if (p < 1 || q < 1) {
    throw Error(ErrorCode::kInvalidArgument, "Hankel window must be >= 1");
  }
  if (p + q > series.K()) {
    throw Error(ErrorCode::kInsufficientLags,
                fmt::format("window {}x{} needs {} lags (shifted block), "
                            "series has {}",
                            p, q, p + q, series.K()));
  }
  const HankelBlock hankel = BuildHankel(series, p, q);
  const HankelBlock shifted = BuildHankel(series, p, q, 1);

  Eigen::JacobiSVD<MatrixXd> svd(hankel.entries,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  RealizationResult out;
  out.p = p;
  out.q = q;
  out.singular_values = svd.singularValues();
  const int n = EstimateOrder(out.singular_values, tol);
  if (n >= std::min(p, q)) {
    throw Error(ErrorCode::kOrderTooLargeForWindow,
                fmt::format("estimated order {} needs a window of at least {} "
                            "(got {}x{})",
                            n, n + 1, p, q));
  }

  if (n == 0) {
    out.triplet = RealizationTriplet::Empty();
  } else {
    const VectorXd root = out.singular_values.head(n).cwiseSqrt();
    const VectorXd inv_root = root.cwiseInverse();
    const MatrixXd u = svd.matrixU().leftCols(n);
    const MatrixXd v = svd.matrixV().leftCols(n);
    const MatrixXd obs = u * root.asDiagonal();            // p x n
    const MatrixXd ctrl = root.asDiagonal() * v.transpose();  // n x q
    out.triplet.H = obs.row(0);
    out.triplet.N = ctrl.col(0);
    out.triplet.F = inv_root.asDiagonal() * u.transpose() * shifted.entries *
                    v * inv_root.asDiagonal();
  }

  const int used = p + q;
  const CovarianceSeries rebuilt = ReconstructSeries(out.triplet, series.r0, used);
  double worst = 0.0;
  for (int k = 1; k <= used; ++k) {
    worst = std::max(worst, std::abs(rebuilt.at(k) - series.at(k)));
  }
  const double scale = SeriesScale(series, used);
  out.reconstruction_error = scale > 0.0 ? worst / scale : worst;
  if (n > 0 && !(out.reconstruction_error <= kReconstructionTol)) {
    throw Error(ErrorCode::kReconstructionFailure,
                fmt::format("order-{} realization reproduces the lags with "
                            "relative error {:.3e}",
                            n, out.reconstruction_error));
  }
  return out;
}

int DefaultWindow(const CovarianceSeries& series, double tol) {
  const int widest = series.K() / 2;
  if (widest < 1) {
    throw Error(ErrorCode::kInsufficientLags,
                fmt::format("need at least 2 lags, series has {}", series.K()));
  }
  const RankEstimate probe = NumericalRank(BuildHankel(series, widest, widest), tol);
  const int n_est = EstimateOrder(probe.singular_values, tol);
  return std::min(std::max(2 * n_est + 2, 6), widest);
}

RealizationResult HoKalman(const CovarianceSeries& series, double tol) {
  const int w = DefaultWindow(series, tol);
  return HoKalman(series, w, w, tol);
}

CovarianceSeries ReconstructSeries(const RealizationTriplet& triplet, double r0,
                                   int K) {
  CovarianceSeries out;
  out.r0 = r0;
  out.lags.reserve(std::max(K, 0));
  if (triplet.order() == 0) {
    out.lags.assign(std::max(K, 0), 0.0);
    return out;
  }
  VectorXd v = triplet.N;
  for (int k = 1; k <= K; ++k) {
    out.lags.push_back(triplet.H.dot(v));
    v = triplet.F * v;
  }
  return out;
}

MatrixXd ObservabilityMatrix(const RealizationTriplet& triplet, int rows) {
  const int n = triplet.order();
  MatrixXd out(rows, n);
  RowVectorXd row = triplet.H;
  for (int i = 0; i < rows; ++i) {
    out.row(i) = row;
    row = row * triplet.F;
  }
  return out;
}

MatrixXd ReachabilityMatrix(const RealizationTriplet& triplet, int cols) {
  const int n = triplet.order();
  MatrixXd out(n, cols);
  VectorXd col = triplet.N;
  for (int j = 0; j < cols; ++j) {
    out.col(j) = col;
    col = triplet.F * col;
  }
  return out;
}

bool IsMinimal(const RealizationTriplet& triplet, double tol) {
  const int n = triplet.order();
  if (n == 0) return true;
  auto full_rank = [&](const MatrixXd& m) {
    const VectorXd s = m.jacobiSvd().singularValues();
    return s(n - 1) > tol * s(0) && s(n - 1) > kRankFloor;
  };
  return full_rank(ObservabilityMatrix(triplet, n)) &&
         full_rank(ReachabilityMatrix(triplet, n));
}

RealizationTriplet SimilarityTransform(const RealizationTriplet& triplet,
                                       const MatrixXd& transform) {
  const int n = triplet.order();
  if (transform.rows() != n || transform.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("transform must be {}x{}", n, n));
  }
  if (n == 0) return triplet;
  const double cond = linalg::ConditionNumber(transform);
  if (!(cond < 1e12)) {
    throw Error(ErrorCode::kSingularTransform,
                fmt::format("transform condition number {:.3e}", cond));
  }
  const MatrixXd inv = transform.partialPivLu().inverse();
  return {triplet.H * inv, transform * triplet.F * inv, transform * triplet.N};
}

std::optional<Isomorphism> FindIsomorphism(const RealizationTriplet& t1,
                                           const RealizationTriplet& t2,
                                           double tol) {
  if (t1.order() != t2.order()) {
    throw Error(ErrorCode::kDifferentOrders,
                fmt::format("orders differ: {} vs {}", t1.order(), t2.order()));
  }
  const int n = t1.order();
  if (n == 0) return Isomorphism{MatrixXd(0, 0), 0.0};

  const MatrixXd o1 = ObservabilityMatrix(t1, n);
  const MatrixXd o2 = ObservabilityMatrix(t2, n);
  Isomorphism iso;
  iso.transform = linalg::PseudoInverse(o2) * o1;
  if (!(linalg::ConditionNumber(iso.transform) < 1e12)) return std::nullopt;

  const MatrixXd inv = iso.transform.partialPivLu().inverse();
  iso.residual = std::max(
      {RelativeMismatch(t2.H, t1.H * inv, 1e-300),
       RelativeMismatch(t2.F, iso.transform * t1.F * inv, 1.0),
       RelativeMismatch(t2.N, iso.transform * t1.N, 1e-300)});
  if (!(iso.residual <= tol)) return std::nullopt;
  return iso;
}

RealizationTriplet DirectRealization(const GumParameters& params) {
  if (!IsStationary(params)) {
    throw Error(ErrorCode::kNotStationary, "GUM parameters are not stationary");
  }
  const double r0 = params.beta + params.b.dot(params.eta * params.b.transpose());
  return {params.b, ClosedLoopMatrix(params),
          params.a * params.eta * params.b.transpose() + params.c * r0};
}

}  // namespace stochreal
