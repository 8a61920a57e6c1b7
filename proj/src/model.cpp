#include "stochreal/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "stochreal/errors.hpp"
#include "stochreal/linalg.hpp"
#include "stochreal/random.hpp"

namespace stochreal {
namespace {

void RequireShape(bool ok, std::string_view what) {
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("GUM parameter shape mismatch: {}", what));
  }
}

void RequireSymmetricPsd(const MatrixXd& m, std::string_view name) {
  const double scale = 1.0 + linalg::MaxAbs(m);
  if (linalg::MaxAbs(m - m.transpose()) > linalg::kPsdTol * scale) {
    throw Error(ErrorCode::kNotPSD, fmt::format("{} is not symmetric", name));
  }
  if (!linalg::IsPsd(m)) {
    throw Error(ErrorCode::kNotPSD,
                fmt::format("{} has eigenvalue {:.3e} < 0", name,
                            linalg::MinEigenvalue(m)));
  }
}

// Noise covariance entering the stationarity recursion: alpha + c beta c^T.
MatrixXd DrivingCovariance(const GumParameters& p) {
  return p.alpha + p.beta * p.c * p.c.transpose();
}

}  // namespace

std::string_view FamilyName(ModelFamily family) {
  switch (family) {
    case ModelFamily::kGum: return "GUM";
    case ModelFamily::kHmc: return "HMC";
    case ModelFamily::kDgum: return "DGUM";
    case ModelFamily::kRnn: return "RNN";
  }
  return "GUM";
}

std::optional<ModelFamily> ParseFamily(std::string_view name) {
  std::string upper;
  for (char ch : name) {
    if (ch != '-') upper.push_back(static_cast<char>(std::toupper(ch)));
  }
  if (upper == "GUM") return ModelFamily::kGum;
  if (upper == "HMC" || upper == "HMM") return ModelFamily::kHmc;
  if (upper == "DGUM") return ModelFamily::kDgum;
  if (upper == "RNN") return ModelFamily::kRnn;
  return std::nullopt;
}

void GumParameters::Validate() const {
  const Eigen::Index dim = a.rows();
  RequireShape(a.cols() == dim, "a must be square");
  RequireShape(b.cols() == dim, "b must be 1 x n");
  RequireShape(c.rows() == dim, "c must be n x 1");
  RequireShape(alpha.rows() == dim && alpha.cols() == dim, "alpha must be n x n");
  RequireShape(eta.rows() == dim && eta.cols() == dim, "eta must be n x n");
  if (!std::isfinite(beta) || beta < 0.0) {
    throw Error(ErrorCode::kNotPSD, fmt::format("beta = {} must be >= 0", beta));
  }
  RequireSymmetricPsd(alpha, "alpha");
  RequireSymmetricPsd(eta, "eta");
}

GumParameters GumParameters::WithStationaryEta(MatrixXd a, RowVectorXd b,
                                               VectorXd c, MatrixXd alpha,
                                               double beta) {
  GumParameters p{std::move(a), std::move(b), std::move(c), std::move(alpha),
                  beta, MatrixXd()};
  p.eta = SolveStationaryEta(p.a, p.b, p.c, p.alpha, p.beta);
  return p;
}

MatrixXd ClosedLoopMatrix(const GumParameters& params) {
  return params.a + params.c * params.b;
}

StationarityReport CheckStationarity(const GumParameters& params,
                                     const StationarityTolerance& tol) {
  StationarityReport report;
  const MatrixXd f = ClosedLoopMatrix(params);
  report.spectral_radius = linalg::SpectralRadius(f);
  report.stable = report.spectral_radius < 1.0 - tol.stability_margin;
  const MatrixXd residual =
      params.eta - DrivingCovariance(params) - f * params.eta * f.transpose();
  report.lyapunov_residual = linalg::MaxAbs(residual);
  report.lyapunov_satisfied =
      report.lyapunov_residual < tol.residual * (1.0 + linalg::MaxAbs(params.eta));
  return report;
}

bool IsStationary(const GumParameters& params, const StationarityTolerance& tol) {
  return CheckStationarity(params, tol).stationary();
}

MatrixXd SolveStationaryEta(const MatrixXd& a, const RowVectorXd& b,
                            const VectorXd& c, const MatrixXd& alpha,
                            double beta) {
  const MatrixXd f = a + c * b;
  const double rho = linalg::SpectralRadius(f);
  if (!(rho < 1.0)) {
    throw Error(ErrorCode::kNotStable,
                fmt::format("spectral radius of a + c b is {:.6g} >= 1", rho));
  }
  const MatrixXd drive = alpha + beta * c * c.transpose();
  MatrixXd eta = linalg::SolveDiscreteLyapunov(f, drive);

  auto residual_of = [&](const MatrixXd& x) {
    return linalg::MaxAbs(x - drive - f * x * f.transpose());
  };
  const double accept = 1e-12 * (1.0 + linalg::MaxAbs(eta));
  if (!(residual_of(eta) <= accept)) {
    // Vectorized solve lost accuracy (rho close to 1); polish by fixed point.
    MatrixXd x = eta.allFinite() ? eta : drive;
    for (int it = 0; it < 1000000; ++it) {
      MatrixXd next = drive + f * x * f.transpose();
      const double step = linalg::MaxAbs(next - x);
      x = std::move(next);
      if (step <= 1e-15 * (1.0 + linalg::MaxAbs(x))) break;
    }
    eta = linalg::Symmetrize(x);
  }

  const double min_eig = linalg::MinEigenvalue(eta);
  const double floor = -linalg::kPsdTol * (1.0 + eta.norm());
  if (min_eig < floor) {
    throw Error(ErrorCode::kNotPSD,
                fmt::format("stationary eta has eigenvalue {:.3e}", min_eig));
  }
  if (min_eig < 0.0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(eta);
    const VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    eta = es.eigenvectors() * clipped.asDiagonal() *
          es.eigenvectors().transpose();
    eta = linalg::Symmetrize(eta);
  }
  return eta;
}

CovarianceSeries AnalyticCovariance(const GumParameters& params, int K,
                                    const StationarityTolerance& tol) {
  if (K < 0) throw Error(ErrorCode::kInvalidArgument, "K must be >= 0");
  params.Validate();
  const StationarityReport st = CheckStationarity(params, tol);
  if (!st.stationary()) {
    throw Error(ErrorCode::kNotStationary,
                fmt::format("model is not stationary (rho = {:.6g}, Lyapunov "
                            "residual = {:.3e})",
                            st.spectral_radius, st.lyapunov_residual));
  }
  CovarianceSeries series;
  series.r0 = params.beta + (params.b * params.eta * params.b.transpose())(0, 0);
  series.lags.reserve(K);
  const MatrixXd f = ClosedLoopMatrix(params);
  VectorXd v = params.a * params.eta * params.b.transpose() + params.c * series.r0;
  for (int k = 1; k <= K; ++k) {
    series.lags.push_back(params.b.dot(v));
    v = f * v;
  }
  return series;
}

std::vector<MatrixXd> TransientStateCovariances(const GumParameters& params,
                                                int T) {
  const MatrixXd f = ClosedLoopMatrix(params);
  const MatrixXd drive = DrivingCovariance(params);
  std::vector<MatrixXd> out;
  out.reserve(std::max(T, 0) + 1);
  out.push_back(params.eta);
  for (int t = 0; t < T; ++t) {
    out.push_back(drive + f * out.back() * f.transpose());
  }
  return out;
}

bool SatisfiesFamily(const GumParameters& params, ModelFamily family,
                     double tol) {
  const double eta_scale = 1.0 + linalg::MaxAbs(params.eta);
  switch (family) {
    case ModelFamily::kGum:
      return true;
    case ModelFamily::kHmc:
      return linalg::MaxAbs(params.c) <= tol;
    case ModelFamily::kDgum:
      return linalg::MaxAbs(params.alpha) <= tol * eta_scale;
    case ModelFamily::kRnn: {
      if (linalg::MaxAbs(params.alpha) > tol * eta_scale) return false;
      const double r0 =
          params.beta + (params.b * params.eta * params.b.transpose())(0, 0);
      const MatrixXd induced = r0 * params.c * params.c.transpose();
      return linalg::MaxAbs(params.eta - induced) <= tol * eta_scale;
    }
  }
  return false;
}

Trajectory Simulate(const GumParameters& params, ModelFamily family, int T,
                    std::uint64_t seed) {
  if (T < 0) throw Error(ErrorCode::kInvalidArgument, "T must be >= 0");
  params.Validate();
  if (!SatisfiesFamily(params, family)) {
    throw Error(ErrorCode::kFamilyViolation,
                fmt::format("parameters violate the {} constraint",
                            FamilyName(family)));
  }
  const int n = params.n();
  GaussianSource rng(seed);
  auto draw = [&rng](int dim) {
    VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z(i) = rng.StandardNormal();
    return z;
  };

  const MatrixXd eta_factor = linalg::PsdFactor(params.eta);
  const MatrixXd alpha_factor = linalg::PsdFactor(params.alpha);
  const double emission_sd = std::sqrt(params.beta);

  Trajectory traj;
  traj.seed = seed;
  traj.observations.reserve(T + 1);
  traj.latents.reserve(T + 1);

  VectorXd h;
  double x = 0.0;
  if (family == ModelFamily::kRnn) {
    // h_0 = 0 and x_0 is drawn from its own marginal, independent of h_0.
    h = VectorXd::Zero(n);
    const double r0 =
        params.beta + (params.b * params.eta * params.b.transpose())(0, 0);
    draw(n);  // keeps the draw layout identical across families
    x = std::sqrt(std::max(r0, 0.0)) * rng.StandardNormal();
  } else {
    h = eta_factor * draw(n);
    x = params.b.dot(h) + emission_sd * rng.StandardNormal();
  }
  traj.latents.push_back(h);
  traj.observations.push_back(x);

  for (int t = 1; t <= T; ++t) {
    h = params.a * h + params.c * x + alpha_factor * draw(n);
    x = params.b.dot(h) + emission_sd * rng.StandardNormal();
    traj.latents.push_back(h);
    traj.observations.push_back(x);
  }
  return traj;
}

EmpiricalCovariance ComputeEmpiricalCovariance(
    std::span<const Trajectory> trajectories, int K) {
  if (trajectories.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no trajectories");
  }
  if (K < 0) throw Error(ErrorCode::kInvalidArgument, "K must be >= 0");
  const std::size_t length = trajectories.front().observations.size();
  for (const Trajectory& tr : trajectories) {
    if (tr.observations.size() != length) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trajectories must share the same length");
    }
  }
  if (length < static_cast<std::size_t>(K) + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("trajectory length {} < K + 1 = {}", length, K + 1));
  }

  const std::size_t m = trajectories.size();
  std::vector<double> sum(K + 1, 0.0), sum_sq(K + 1, 0.0);
  for (const Trajectory& tr : trajectories) {
    const std::vector<double>& x = tr.observations;
    for (int k = 0; k <= K; ++k) {
      double acc = 0.0;
      const std::size_t count = length - k;
      for (std::size_t t = 0; t < count; ++t) acc += x[t] * x[t + k];
      const double estimate = acc / static_cast<double>(count);
      sum[k] += estimate;
      sum_sq[k] += estimate * estimate;
    }
  }

  EmpiricalCovariance out;
  out.standard_errors.resize(K + 1, 0.0);
  std::vector<double> mean(K + 1);
  for (int k = 0; k <= K; ++k) {
    mean[k] = sum[k] / static_cast<double>(m);
    if (m > 1) {
      const double var =
          std::max(0.0, (sum_sq[k] - m * mean[k] * mean[k]) / (m - 1.0));
      out.standard_errors[k] = std::sqrt(var / static_cast<double>(m));
    }
  }
  out.series.r0 = mean[0];
  out.series.lags.assign(mean.begin() + 1, mean.end());
  return out;
}

}  // namespace stochreal
