#pragma once

// Kalman filter for the linear-Gaussian GUM, used to validate simulated data
// and the stationary covariance structure.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stochreal/model.hpp"

namespace stochreal {

struct Innovation {
  double value = 0.0;
  double variance = 0.0;  // predicted variance of x_t given x_0..x_{t-1}
};

struct FilterState {
  VectorXd mean;        // E[h_T | x_0..x_T]
  MatrixXd covariance;  // Var[h_T | x_0..x_T]
  double loglik = 0.0;
  std::vector<Innovation> innovations;
};

/// Predict h_t from a m + c x_{t-1}, then a Joseph-form update on x_t. The
/// prior at t = 0 is N(0, eta). Throws DegenerateInnovation when a predicted
/// variance is not above `min_variance`, InvalidArgument on empty input.
FilterState KalmanFilter(const GumParameters& params,
                         std::span<const double> observations,
                         double min_variance = 1e-12);

/// Sample autocorrelation of the standardized innovations at lags 1..max_lag.
std::vector<double> InnovationAutocorrelation(
    std::span<const Innovation> innovations, int max_lag, int burn_in = 0);

struct ValidationReport {
  int T = 0;
  double steady_state_variance = 0.0;  // last predicted innovation variance
  double riccati_variance = 0.0;       // r0 - H P_min H^T
  double variance_gap = 0.0;           // relative difference of the two
  std::vector<double> autocorrelation;  // lags 1..max_lag
  double whiteness_bound = 0.0;         // 3 / sqrt(T)
  bool white = false;
  bool steady_state_matches = false;
  double loglik = 0.0;
};

/// Filters `observations` with the generating parameters and compares the
/// final innovation variance with the minimal Riccati solution of the
/// parameters' own triplet.
ValidationReport ValidateFilter(const GumParameters& params,
                                std::span<const double> observations,
                                int max_lag = 5, double variance_tol = 1e-6);

}  // namespace stochreal
