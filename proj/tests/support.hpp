#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "stochreal/model.hpp"
#include "stochreal/realization.hpp"

namespace stochreal::testkit {

using Rng = std::mt19937_64;

double UniformReal(Rng& rng, double lo, double hi);

/// n x n matrix with eigenvalue moduli in [rho_lo, rho_hi] (real or complex
/// pairs, moduli at least 0.1 apart), conjugated by a well-conditioned
/// random transform.
MatrixXd RandomStableMatrix(int n, Rng& rng, double rho_lo = 0.3,
                            double rho_hi = 0.9);

/// Random full-rank covariance with eigenvalues in [lo, hi].
MatrixXd RandomCovariance(int n, Rng& rng, double lo = 0.2, double hi = 1.5);

/// GUM with closed loop F = a + c b drawn by RandomStableMatrix.
GumParameters RandomGum(int n, Rng& rng);
/// c = 0 and a stable.
GumParameters RandomHmc(int n, Rng& rng);
/// alpha = 0.
GumParameters RandomDgum(int n, Rng& rng);
/// Scalar RNN: alpha = 0, a = 0 or a = -2 c b, eta = c^2 beta / (1 - c^2 b^2).
GumParameters RandomScalarRnn(Rng& rng, bool cubic_branch);

/// Brute-force r_k = Cov(x_{t+k}, x_t) from the joint state/observation
/// recursion, independent of AnalyticCovariance.
CovarianceSeries BruteForceCovariance(const GumParameters& params, int K);

/// Smallest root of a continuous f on [lo, hi] with a sign change, by
/// bisection.
template <typename Fn>
double Bisect(Fn f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace stochreal::testkit
