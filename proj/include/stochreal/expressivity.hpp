#pragma once

// Which linear-Gaussian generative families (GUM, HMC, D-GUM, RNN) can
// produce a given factorizable covariance series, with witness parameters.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stochreal/model.hpp"
#include "stochreal/realization.hpp"
#include "stochreal/stochastic_realization.hpp"

namespace stochreal {

/// GUM parameters realizing the series from a feasible P:
///   a = F - S R^-1 H, b = H, c = S R^-1, beta = R,
///   alpha = Q - S R^-1 S^T, eta = P.
/// Throws Infeasible, DegenerateR if R <= r_tol * r0.
GumParameters GumFromRealization(const RealizationTriplet& triplet, double r0,
                                 const MatrixXd& P, double r_tol = 1e-10);

/// Relative residual (max-abs over max(1, ||P||)) of
/// P - F P F^T - (N - F P H^T)(r0 - H P H^T)^-1 (N - F P H^T)^T.
double DgumConditionResidual(const RealizationTriplet& triplet, double r0,
                             const MatrixXd& P);

/// Relative residual of P = r0 (r0 - H P H^T)^-2 (N - F P H^T)(N - F P H^T)^T.
double RnnConditionResidual(const RealizationTriplet& triplet, double r0,
                            const MatrixXd& P);

enum class HmcVerdict { kRealizable, kRefuted, kUndetermined };
std::string_view HmcVerdictName(HmcVerdict verdict);

struct HmcSearchOptions {
  int max_iter = 1000;
  FeasibilityTolerance tol;
  /// Singular values of F below this (relative to max(1, sigma_max)) count
  /// as zero for the span and invertibility screens.
  double rank_tol = 1e-9;
};

struct HmcResult {
  HmcVerdict verdict = HmcVerdict::kUndetermined;
  std::optional<MatrixXd> p_tilde;
  std::string reason;
  int iterations = 0;
  /// True when the verdict came from the alternating-projection search
  /// rather than a closed form or a necessary condition.
  bool from_search = false;
};

/// Searches {P : F P H^T = N, P > 0, P - F P F^T >= 0, r0 - H P H^T >= 0}.
/// Screens N in span(F) and, for invertible F, H F^-1 N > 0 first. n = 1 uses
/// the closed form P = N / (H F) checked against the scalar interval; n >= 2
/// runs alternating projections on the affine slice. `start`, when given, is
/// the initial point of the search (defaults to the midpoint of P_min and
/// P_max when a certificate is available, otherwise the slice's least-norm
/// point).
HmcResult HmcFeasible(const RealizationTriplet& triplet, double r0,
                      const HmcSearchOptions& opts = {},
                      const std::optional<MatrixXd>& start = std::nullopt);

struct FixedPoint {
  MatrixXd P;
  double residual = 0.0;
};

/// Extremal Riccati fixed points P_min, P_max that satisfy the D-GUM condition
/// to `tol` (and keep r0 - H P H^T > 0). Propagates NotPositiveReal /
/// NoConvergence. Order 0 yields the single empty fixed point.
std::vector<FixedPoint> DgumFeasible(const RealizationTriplet& triplet,
                                     double r0, const RiccatiOptions& opts = {},
                                     double tol = 1e-9);

struct RnnResult {
  bool realizable = false;
  std::optional<MatrixXd> p_tilde;
  double residual = std::numeric_limits<double>::infinity();
  std::string reason;
};

/// n > 1 is refuted outright (the RNN condition forces a rank-1 P). For n = 1
/// a D-GUM fixed point must also satisfy the RNN condition to `tol`.
RnnResult RnnFeasible(const RealizationTriplet& triplet, double r0,
                      const RiccatiOptions& opts = {}, double tol = 1e-9);

struct FamilyVerdict {
  bool realizable = false;
  /// "realizable", "refuted", "undetermined" or "not-covariance".
  std::string status = "refuted";
  std::string reason;
  std::optional<GumParameters> witness;
  /// Relative max deviation of the witness covariance from the input series.
  std::optional<double> witness_error;
  /// Certificate P (HMC, RNN) or candidate set (D-GUM).
  std::vector<MatrixXd> certificates;
  /// Residual of the family's defining condition at the certificate.
  std::optional<double> condition_residual;
  bool from_search = false;
};

struct ClassifyOptions {
  int p = 0;  // 0 = default window
  int q = 0;
  double rank_tol = kDefaultRankTol;
  RiccatiOptions riccati;
  HmcSearchOptions hmc;
  double condition_tol = 1e-9;
  /// Toeplitz order for the independent positivity check; -1 = min(K, 30).
  int toeplitz_m = -1;
  bool build_witnesses = true;
};

struct ClassificationReport {
  bool factorizable = false;
  int order = 0;
  bool is_covariance = false;
  /// Independent Toeplitz oracle (finite m, necessary condition only).
  bool toeplitz_covariance = false;
  double toeplitz_min_eig = 0.0;
  int toeplitz_m = 0;
  int window = 0;
  RealizationTriplet triplet = RealizationTriplet::Empty();
  VectorXd singular_values;
  double reconstruction_error = 0.0;
  std::optional<ExtremalSolutions> extremal;
  FamilyVerdict gum, hmc, dgum, rnn;
  std::vector<std::string> notes;
};

ClassificationReport Classify(const CovarianceSeries& series,
                              const ClassifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Scalar cartography over the (F, HN) plane for r_k = F^{k-1} HN.

enum class RegionLabel { kNo, kYes, kBoundary };
std::string_view RegionLabelName(RegionLabel label);

/// Parallelogram r0 (F - 1) / 2 <= HN <= r0 (F + 1) / 2, |F| < 1.
RegionLabel CovarianceRegion(double F, double HN, double r0, double tol);
/// 0 < HN <= r0 F for F >= 0, r0 F <= HN < 0 for F <= 0.
RegionLabel HmcRegion(double F, double HN, double r0, double tol);
/// HN = r0 F.
inline double RnnCurve1(double F, double r0) { return r0 * F; }
/// HN = r0 F (2 F^2 - 1).
inline double RnnCurve2(double F, double r0) { return r0 * F * (2.0 * F * F - 1.0); }

struct PipelineLabels {
  bool covariance = false;
  bool hmc = false;
  HmcVerdict hmc_verdict = HmcVerdict::kRefuted;
  bool dgum = false;
  bool rnn = false;
};

struct CartographyCell {
  double F = 0.0;
  double HN = 0.0;
  RegionLabel covariance = RegionLabel::kNo;
  RegionLabel hmc = RegionLabel::kNo;
  RegionLabel dgum = RegionLabel::kNo;
  double rnn_curve1_dist = 0.0;  // |HN - r0 F|
  double rnn_curve2_dist = 0.0;  // |HN - r0 F (2F^2 - 1)|
  bool rnn_band1 = false;        // within half a grid cell
  bool rnn_band2 = false;
  /// Exactly on a curve (within the boundary tolerance) inside the region.
  bool rnn_exact = false;
  std::optional<PipelineLabels> pipeline;
  bool off_boundary = false;
  bool agrees = true;
};

struct CartographyOptions {
  bool run_pipeline = true;
  int lags = 40;
  /// Distance to a region edge (relative to r0) that counts as "boundary".
  double boundary_tol = 1e-9;
  /// 0 = std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct CartographyGrid {
  double r0 = 1.0;
  std::vector<double> F_axis;
  std::vector<double> HN_axis;
  /// Row-major: cells[i * HN_axis.size() + j] has F = F_axis[i],
  /// HN = HN_axis[j].
  std::vector<CartographyCell> cells;
  double rnn_band = 0.0;
  int off_boundary_cells = 0;
  int mismatches = 0;
  double elapsed_seconds = 0.0;
};

/// Cell-centred grid over (-1, 1) x (-r0, r0). Requires grids >= 3.
CartographyGrid ScalarCartography(double r0, int grid_F, int grid_HN,
                                  const CartographyOptions& opts = {});

/// r_k = F^{k-1} HN, k = 1..K.
CovarianceSeries ScalarSeries(double F, double HN, double r0, int K);

}  // namespace stochreal
