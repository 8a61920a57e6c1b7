#pragma once

// Linear-Gaussian generative unified model (GUM):
//
//   h_0 ~ N(0, eta)
//   h_t = a h_{t-1} + c x_{t-1} + u_t,   u_t ~ N(0, alpha)
//   x_t = b h_t + v_t,                   v_t ~ N(0, beta)
//
// with scalar observations x_t and n-dimensional latents h_t. HMC, D-GUM and
// RNN are the sub-families obtained by constraining (c, alpha, eta).

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace stochreal {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

enum class ModelFamily { kGum, kHmc, kDgum, kRnn };

std::string_view FamilyName(ModelFamily family);
/// Parses "GUM", "HMC", "DGUM"/"D-GUM", "RNN" (case-insensitive).
std::optional<ModelFamily> ParseFamily(std::string_view name);

struct GumParameters {
  MatrixXd a;      // n x n state feedback
  RowVectorXd b;   // 1 x n emission
  VectorXd c;      // n x 1 observation feedback
  MatrixXd alpha;  // n x n state noise covariance
  double beta = 0.0;
  MatrixXd eta;    // n x n stationary state covariance

  int n() const { return static_cast<int>(a.rows()); }

  /// Throws InvalidArgument on shape mismatch, NotPSD if alpha/eta are not
  /// symmetric PSD within tolerance or beta < 0.
  void Validate() const;

  /// Builds parameters with eta solved from the stationarity equation.
  static GumParameters WithStationaryEta(MatrixXd a, RowVectorXd b, VectorXd c,
                                         MatrixXd alpha, double beta);
};

/// Observation covariance series: r0 plus lags[k-1] = r_k for k = 1..K.
struct CovarianceSeries {
  double r0 = 0.0;
  std::vector<double> lags;

  int K() const { return static_cast<int>(lags.size()); }
  /// r_k for 0 <= k <= K.
  double at(int k) const { return k == 0 ? r0 : lags.at(k - 1); }
};

struct Trajectory {
  std::vector<double> observations;  // x_0..x_T
  std::vector<VectorXd> latents;     // h_0..h_T
  std::uint64_t seed = 0;
};

struct StationarityTolerance {
  double stability_margin = 1e-12;
  /// Lyapunov residual bound, relative to 1 + ||eta||.
  double residual = 1e-9;
};

struct StationarityReport {
  double spectral_radius = 0.0;
  double lyapunov_residual = 0.0;  // max-abs entry of the residual
  bool stable = false;
  bool lyapunov_satisfied = false;
  bool stationary() const { return stable && lyapunov_satisfied; }
};

/// a + c b.
MatrixXd ClosedLoopMatrix(const GumParameters& params);

StationarityReport CheckStationarity(const GumParameters& params,
                                     const StationarityTolerance& tol = {});
bool IsStationary(const GumParameters& params,
                  const StationarityTolerance& tol = {});

/// Unique eta with eta = (alpha + c beta c^T) + F eta F^T, F = a + c b.
/// Solved on the n^2-dimensional vectorized system, with a fixed-point
/// iteration as fallback when that solve is inaccurate.
/// Throws NotStable if rho(F) >= 1, NotPSD if the solution has an eigenvalue
/// below -tol.
MatrixXd SolveStationaryEta(const MatrixXd& a, const RowVectorXd& b,
                            const VectorXd& c, const MatrixXd& alpha,
                            double beta);

/// r0 = beta + b eta b^T and r_k = b F^{k-1} (a eta b^T + c r0), k = 1..K.
/// Throws NotStationary.
CovarianceSeries AnalyticCovariance(const GumParameters& params, int K,
                                    const StationarityTolerance& tol = {});

/// Transient state covariances eta_0..eta_T from the recursion
/// eta_{t+1} = (alpha + c beta c^T) + F eta_t F^T, starting at params.eta.
/// Diagnostic only: non-stationary models are not classified.
std::vector<MatrixXd> TransientStateCovariances(const GumParameters& params,
                                                int T);

/// Checks the sub-family constraint: HMC needs c = 0, DGUM alpha = 0,
/// RNN alpha = 0 and eta = c (beta + b eta b^T) c^T. Tolerance is relative to
/// the magnitude of the parameters involved.
bool SatisfiesFamily(const GumParameters& params, ModelFamily family,
                     double tol = 1e-9);

/// Samples x_0..x_T. For RNN the latent starts at h_0 = 0 and x_0 is drawn
/// from its stationary marginal N(0, beta + b eta b^T). Deterministic given
/// the seed. Throws FamilyViolation.
Trajectory Simulate(const GumParameters& params, ModelFamily family, int T,
                    std::uint64_t seed);

struct EmpiricalCovariance {
  CovarianceSeries series;
  /// standard_errors[k] is the standard error of r_k, k = 0..K.
  std::vector<double> standard_errors;
};

/// Lag-k sample covariance (zero-mean model) averaged over time within each
/// trajectory, then across trajectories; standard errors come from the
/// spread across trajectories. Throws EmptyInput / InvalidArgument.
EmpiricalCovariance ComputeEmpiricalCovariance(
    std::span<const Trajectory> trajectories, int K);

}  // namespace stochreal
