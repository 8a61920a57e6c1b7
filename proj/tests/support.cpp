#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stochreal::testkit {
namespace {

MatrixXd RandomGaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal;
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

MatrixXd RandomOrthogonal(int n, Rng& rng) {
  Eigen::HouseholderQR<MatrixXd> qr(RandomGaussian(n, n, rng));
  return qr.householderQ() * MatrixXd::Identity(n, n);
}

}  // namespace

double UniformReal(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

MatrixXd RandomStableMatrix(int n, Rng& rng, double rho_lo, double rho_hi) {
  // Distinct moduli on a jittered ladder inside [rho_lo, rho_hi].
  std::vector<double> moduli;
  const double step = (rho_hi - rho_lo) / std::max(1, n - 1);
  for (int i = 0; i < n; ++i) {
    const double jitter = n > 1 ? UniformReal(rng, -0.2, 0.2) * step : 0.0;
    moduli.push_back(n > 1 ? std::clamp(rho_lo + i * step + jitter, rho_lo, rho_hi)
                           : UniformReal(rng, rho_lo, rho_hi));
  }
  std::shuffle(moduli.begin(), moduli.end(), rng);

  MatrixXd block = MatrixXd::Zero(n, n);
  int i = 0;
  while (i < n) {
    if (i + 1 < n && UniformReal(rng, 0.0, 1.0) < 0.4) {
      const double r = moduli[i];
      const double theta = UniformReal(rng, 0.3, std::numbers::pi - 0.3);
      block(i, i) = r * std::cos(theta);
      block(i, i + 1) = -r * std::sin(theta);
      block(i + 1, i) = r * std::sin(theta);
      block(i + 1, i + 1) = r * std::cos(theta);
      i += 2;
    } else {
      block(i, i) = UniformReal(rng, 0.0, 1.0) < 0.5 ? moduli[i] : -moduli[i];
      ++i;
    }
  }
  VectorXd scales(n);
  for (int k = 0; k < n; ++k) scales(k) = std::exp(UniformReal(rng, -0.5, 0.5));
  const MatrixXd T = RandomOrthogonal(n, rng) * scales.asDiagonal();
  return T * block * T.inverse();
}

MatrixXd RandomCovariance(int n, Rng& rng, double lo, double hi) {
  VectorXd ev(n);
  for (int k = 0; k < n; ++k) ev(k) = UniformReal(rng, lo, hi);
  const MatrixXd U = RandomOrthogonal(n, rng);
  const MatrixXd m = U * ev.asDiagonal() * U.transpose();
  return 0.5 * (m + m.transpose());
}

GumParameters RandomGum(int n, Rng& rng) {
  const MatrixXd F = RandomStableMatrix(n, rng);
  const RowVectorXd b = RandomGaussian(1, n, rng);
  const VectorXd c = 0.5 * RandomGaussian(n, 1, rng);
  return GumParameters::WithStationaryEta(F - c * b, b, c, RandomCovariance(n, rng),
                                          UniformReal(rng, 0.2, 1.0));
}

GumParameters RandomHmc(int n, Rng& rng) {
  return GumParameters::WithStationaryEta(
      RandomStableMatrix(n, rng), RandomGaussian(1, n, rng), VectorXd::Zero(n),
      RandomCovariance(n, rng), UniformReal(rng, 0.2, 1.0));
}

GumParameters RandomDgum(int n, Rng& rng) {
  const MatrixXd F = RandomStableMatrix(n, rng);
  const RowVectorXd b = RandomGaussian(1, n, rng);
  const VectorXd c = RandomGaussian(n, 1, rng);
  return GumParameters::WithStationaryEta(F - c * b, b, c, MatrixXd::Zero(n, n),
                                          UniformReal(rng, 0.2, 1.0));
}

GumParameters RandomScalarRnn(Rng& rng, bool cubic_branch) {
  const double b = UniformReal(rng, 0.5, 1.5) * (UniformReal(rng, 0, 1) < 0.5 ? -1 : 1);
  const double cb = UniformReal(rng, 0.2, 0.9) * (UniformReal(rng, 0, 1) < 0.5 ? -1 : 1);
  const double c = cb / b;
  const double beta = UniformReal(rng, 0.3, 1.0);
  GumParameters p;
  p.a = MatrixXd::Constant(1, 1, cubic_branch ? -2.0 * cb : 0.0);
  p.b = RowVectorXd::Constant(1, b);
  p.c = VectorXd::Constant(1, c);
  p.alpha = MatrixXd::Zero(1, 1);
  p.beta = beta;
  p.eta = MatrixXd::Constant(1, 1, c * c * beta / (1.0 - cb * cb));
  return p;
}

CovarianceSeries BruteForceCovariance(const GumParameters& params, int K) {
  // z_t = (h_t, x_t) is a first-order Markov chain z_t = A z_{t-1} + w_t.
  const int n = params.n();
  MatrixXd A = MatrixXd::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = params.a;
  A.topRightCorner(n, 1) = params.c;
  A.bottomLeftCorner(1, n) = params.b * params.a;
  A(n, n) = params.b.dot(params.c);
  MatrixXd G(n + 1, n);
  G.topRows(n) = MatrixXd::Identity(n, n);
  G.bottomRows(1) = params.b;
  MatrixXd W = G * params.alpha * G.transpose();
  W(n, n) += params.beta;

  MatrixXd sigma = MatrixXd::Zero(n + 1, n + 1);
  for (int it = 0; it < 20000; ++it) {
    MatrixXd next = A * sigma * A.transpose() + W;
    const double step = (next - sigma).cwiseAbs().maxCoeff();
    sigma = next;
    if (step < 1e-15 * (1.0 + sigma.cwiseAbs().maxCoeff())) break;
  }
  CovarianceSeries s;
  s.r0 = sigma(n, n);
  MatrixXd lagged = sigma;
  for (int k = 1; k <= K; ++k) {
    lagged = A * lagged;
    s.lags.push_back(lagged(n, n));
  }
  return s;
}

}  // namespace stochreal::testkit
