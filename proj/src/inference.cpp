#include "stochreal/inference.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "stochreal/errors.hpp"
#include "stochreal/linalg.hpp"
#include "stochreal/realization.hpp"
#include "stochreal/stochastic_realization.hpp"

namespace stochreal {

FilterState KalmanFilter(const GumParameters& params,
                         std::span<const double> observations,
                         double min_variance) {
  params.Validate();
  if (observations.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no observations to filter");
  }
  const int n = params.n();
  FilterState state;
  state.innovations.reserve(observations.size());
  VectorXd m = VectorXd::Zero(n);
  MatrixXd P = params.eta;
  const MatrixXd I = MatrixXd::Identity(n, n);

  for (std::size_t t = 0; t < observations.size(); ++t) {
    if (t > 0) {
      m = params.a * m + params.c * observations[t - 1];
      P = linalg::Symmetrize(params.a * P * params.a.transpose() + params.alpha);
    }
    const double predicted = params.b.dot(m);
    const double variance = params.b.dot(P * params.b.transpose()) + params.beta;
    if (!(variance > min_variance)) {
      throw Error(ErrorCode::kDegenerateInnovation,
                  fmt::format("predicted variance {:.3e} at t = {}", variance, t));
    }
    const double e = observations[t] - predicted;
    state.innovations.push_back({e, variance});
    state.loglik -= 0.5 * (std::log(2.0 * std::numbers::pi * variance) +
                           e * e / variance);

    const VectorXd gain = P * params.b.transpose() / variance;
    m += gain * e;
    const MatrixXd J = I - gain * params.b;
    P = linalg::Symmetrize(J * P * J.transpose() +
                           gain * params.beta * gain.transpose());
  }
  state.mean = std::move(m);
  state.covariance = std::move(P);
  return state;
}

std::vector<double> InnovationAutocorrelation(
    std::span<const Innovation> innovations, int max_lag, int burn_in) {
  if (burn_in < 0 || max_lag < 1 ||
      static_cast<int>(innovations.size()) - burn_in <= max_lag) {
    throw Error(ErrorCode::kInvalidArgument,
                "not enough innovations for the requested lags");
  }
  std::vector<double> z;
  for (std::size_t t = burn_in; t < innovations.size(); ++t) {
    z.push_back(innovations[t].value / std::sqrt(innovations[t].variance));
  }
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double denom = 0.0;
  for (double v : z) denom += (v - mean) * (v - mean);

  std::vector<double> out;
  for (int k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = k; t < z.size(); ++t) {
      num += (z[t] - mean) * (z[t - k] - mean);
    }
    out.push_back(num / denom);
  }
  return out;
}

ValidationReport ValidateFilter(const GumParameters& params,
                                std::span<const double> observations,
                                int max_lag, double variance_tol) {
  const FilterState state = KalmanFilter(params, observations);
  const RealizationTriplet triplet = DirectRealization(params);
  const double r0 = params.beta + params.b.dot(params.eta * params.b.transpose());
  const MatrixXd p_min = MinimalSolution(triplet, r0, RiccatiOptions{});

  ValidationReport report;
  report.T = static_cast<int>(observations.size());
  report.loglik = state.loglik;
  report.steady_state_variance = state.innovations.back().variance;
  report.riccati_variance = r0 - triplet.H.dot(p_min * triplet.H.transpose());
  report.variance_gap =
      std::abs(report.steady_state_variance - report.riccati_variance) /
      std::abs(report.riccati_variance);
  report.steady_state_matches = report.variance_gap <= variance_tol;
  report.autocorrelation =
      InnovationAutocorrelation(state.innovations, max_lag);
  report.whiteness_bound = 3.0 / std::sqrt(static_cast<double>(report.T));
  report.white = true;
  for (double rho : report.autocorrelation) {
    report.white = report.white && std::abs(rho) < report.whiteness_bound;
  }
  return report;
}

}  // namespace stochreal
