#include "stochreal/expressivity.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "stochreal/errors.hpp"
#include "stochreal/linalg.hpp"

namespace stochreal {
namespace {

double Innovation(const RealizationTriplet& t, double r0, const MatrixXd& P) {
  return r0 - t.H.dot(P * t.H.transpose());
}

MatrixXd ClipEigenvalues(const MatrixXd& m, double floor) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(linalg::Symmetrize(m));
  const VectorXd clipped = es.eigenvalues().cwiseMax(floor);
  return linalg::Symmetrize(es.eigenvectors() * clipped.asDiagonal() *
                            es.eigenvectors().transpose());
}

// Relative deviation of the witness covariance from the target series.
double WitnessError(const GumParameters& witness, const CovarianceSeries& target) {
  const CovarianceSeries produced = AnalyticCovariance(witness, target.K());
  double scale = std::abs(target.r0);
  double worst = std::abs(produced.r0 - target.r0);
  for (int k = 1; k <= target.K(); ++k) {
    scale = std::max(scale, std::abs(target.at(k)));
    worst = std::max(worst, std::abs(produced.at(k) - target.at(k)));
  }
  return scale > 0.0 ? worst / scale : worst;
}

GumParameters WhiteNoiseWitness(double r0) {
  return {MatrixXd(0, 0), RowVectorXd(0), VectorXd(0), MatrixXd(0, 0), r0,
          MatrixXd(0, 0)};
}

GumParameters HmcWitness(const RealizationTriplet& t, double r0,
                         const MatrixXd& P) {
  const int n = t.order();
  GumParameters w;
  w.a = t.F;
  w.b = t.H;
  w.c = VectorXd::Zero(n);
  w.alpha = ClipEigenvalues(P - t.F * P * t.F.transpose(), 0.0);
  w.beta = std::max(0.0, Innovation(t, r0, P));
  w.eta = linalg::Symmetrize(P);
  return w;
}

// Sym(n) basis: E_ii and E_ij + E_ji for i < j.
std::vector<MatrixXd> SymmetricBasis(int n) {
  std::vector<MatrixXd> basis;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      MatrixXd e = MatrixXd::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

// Points (P, P - F P F^T, r0 - H P H^T) with F P H^T = N, parameterized as
// P = base + sum_j y_j directions[j]. Project() returns the y minimizing the
// Frobenius distance of that triple to a target triple.
class HmcSlice {
 public:
  HmcSlice(const RealizationTriplet& t, double r0) {
    const int n = t.order();
    const std::vector<MatrixXd> basis = SymmetricBasis(n);
    const int d = static_cast<int>(basis.size());
    MatrixXd constraint(n, d);
    for (int k = 0; k < d; ++k) constraint.col(k) = t.F * basis[k] * t.H.transpose();

    Eigen::JacobiSVD<MatrixXd> svd(constraint, Eigen::ComputeFullV | Eigen::ComputeThinU);
    const VectorXd& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > 1e-12 * std::max(1.0, s(0))) ++rank;
    }
    VectorXd inv = VectorXd::Zero(s.size());
    for (int i = 0; i < rank; ++i) inv(i) = 1.0 / s(i);
    const VectorXd coeffs = svd.matrixV().leftCols(s.size()) * inv.asDiagonal() *
                            svd.matrixU().transpose() * t.N;
    base_ = MatrixXd::Zero(n, n);
    for (int k = 0; k < d; ++k) base_ += coeffs(k) * basis[k];
    const double scale = std::max(linalg::MaxAbs(t.N), 1e-300);
    consistency_ = linalg::MaxAbs(t.F * base_ * t.H.transpose() - t.N) / scale;

    const MatrixXd null = svd.matrixV().rightCols(d - rank);
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
      MatrixXd dir = MatrixXd::Zero(n, n);
      for (int k = 0; k < d; ++k) dir += null(k, j) * basis[k];
      directions_.push_back(std::move(dir));
    }

    const int rows = 2 * n * n + 1;
    design_.resize(rows, static_cast<Eigen::Index>(directions_.size()));
    for (std::size_t j = 0; j < directions_.size(); ++j) {
      design_.col(j) = Stack(directions_[j], directions_[j] - t.F * directions_[j] * t.F.transpose(),
                             -t.H.dot(directions_[j] * t.H.transpose()));
    }
    offset_ = Stack(base_, base_ - t.F * base_ * t.F.transpose(),
                    r0 - t.H.dot(base_ * t.H.transpose()));
    if (design_.cols() > 0) qr_.compute(design_);
  }

  double consistency() const { return consistency_; }
  int dimension() const { return static_cast<int>(directions_.size()); }

  MatrixXd PointAt(const VectorXd& y) const {
    MatrixXd P = base_;
    for (std::size_t j = 0; j < directions_.size(); ++j) P += y(j) * directions_[j];
    return linalg::Symmetrize(P);
  }

  VectorXd Project(const MatrixXd& P, const MatrixXd& Q, double R) const {
    if (design_.cols() == 0) return VectorXd(0);
    return qr_.solve(Stack(P, Q, R) - offset_);
  }

 private:
  VectorXd Stack(const MatrixXd& P, const MatrixXd& Q, double R) const {
    const Eigen::Index nn = P.size();
    VectorXd out(2 * nn + 1);
    out.head(nn) = Eigen::Map<const VectorXd>(P.data(), nn);
    out.segment(nn, nn) = Eigen::Map<const VectorXd>(Q.data(), nn);
    out(2 * nn) = R;
    return out;
  }

  MatrixXd base_;
  std::vector<MatrixXd> directions_;
  MatrixXd design_;
  VectorXd offset_;
  Eigen::ColPivHouseholderQR<MatrixXd> qr_;
  double consistency_ = 0.0;
};

HmcResult ScalarHmc(const RealizationTriplet& t, double r0,
                    const HmcSearchOptions& opts) {
  HmcResult out;
  const double H = t.H(0), F = t.F(0, 0), N = t.N(0);
  if (!(std::abs(F) > opts.rank_tol)) {
    out.verdict = HmcVerdict::kRefuted;
    out.reason = "N is not in the span of F (F = 0)";
    return out;
  }
  const double p_tilde = N / (H * F);
  out.p_tilde = MatrixXd::Constant(1, 1, p_tilde);
  if (!(p_tilde > 0.0)) {
    out.verdict = HmcVerdict::kRefuted;
    out.reason = fmt::format("H F^-1 N = {:.6g} is not positive", H * H * p_tilde);
    return out;
  }
  if (!(std::abs(F) <= 1.0)) {
    out.verdict = HmcVerdict::kRefuted;
    out.reason = "|F| > 1: not a covariance series";
    return out;
  }
  const std::optional<ScalarInterval> interval = ComputeScalarInterval(H, F, N, r0);
  if (!interval) {
    out.verdict = HmcVerdict::kRefuted;
    out.reason = "solution set is empty";
    return out;
  }
  const double slack = 1e-9 * std::max(interval->upper, 1e-300);
  if (interval->contains(p_tilde, slack)) {
    out.verdict = HmcVerdict::kRealizable;
    out.reason = fmt::format("P = N/(HF) = {:.9g} lies in [{:.9g}, {:.9g}]",
                             p_tilde, interval->lower, interval->upper);
  } else {
    out.verdict = HmcVerdict::kRefuted;
    out.reason = fmt::format("P = N/(HF) = {:.9g} lies outside [{:.9g}, {:.9g}]",
                             p_tilde, interval->lower, interval->upper);
  }
  return out;
}

}  // namespace

GumParameters GumFromRealization(const RealizationTriplet& triplet, double r0,
                                 const MatrixXd& P, double r_tol) {
  const NoiseCovariances noise = ExtractNoise(triplet, r0, P);
  if (!(noise.R > r_tol * std::abs(r0))) {
    throw Error(ErrorCode::kDegenerateR,
                fmt::format("R = r0 - H P H^T = {:.3e} is not positive", noise.R));
  }
  const VectorXd gain = noise.S / noise.R;
  GumParameters w;
  w.a = triplet.F - gain * triplet.H;
  w.b = triplet.H;
  w.c = gain;
  w.beta = noise.R;
  w.alpha = ClipEigenvalues(noise.Q - gain * noise.S.transpose(), 0.0);
  w.eta = linalg::Symmetrize(P);
  return w;
}

double DgumConditionResidual(const RealizationTriplet& triplet, double r0,
                             const MatrixXd& P) {
  return RiccatiResidual(triplet, r0, P);
}

double RnnConditionResidual(const RealizationTriplet& t, double r0,
                            const MatrixXd& P) {
  if (t.order() == 0) return 0.0;
  const double innovation = Innovation(t, r0, P);
  if (!(innovation > 0.0)) return std::numeric_limits<double>::infinity();
  const VectorXd gain = t.N - t.F * P * t.H.transpose();
  const MatrixXd induced =
      r0 / (innovation * innovation) * gain * gain.transpose();
  return linalg::MaxAbs(P - induced) / std::max(1e-300, linalg::MaxAbs(P));
}

std::string_view HmcVerdictName(HmcVerdict verdict) {
  switch (verdict) {
    case HmcVerdict::kRealizable: return "realizable";
    case HmcVerdict::kRefuted: return "refuted";
    case HmcVerdict::kUndetermined: return "undetermined";
  }
  return "undetermined";
}

HmcResult HmcFeasible(const RealizationTriplet& t, double r0,
                      const HmcSearchOptions& opts,
                      const std::optional<MatrixXd>& start) {
  const int n = t.order();
  HmcResult out;
  if (n == 0) {
    out.verdict = r0 >= 0.0 ? HmcVerdict::kRealizable : HmcVerdict::kRefuted;
    out.p_tilde = MatrixXd(0, 0);
    out.reason = "order 0: white noise";
    return out;
  }
  if (n == 1) return ScalarHmc(t, r0, opts);

  // Necessary screens: N = F P H^T needs N in span(F); with F invertible,
  // H F^-1 N = H P H^T must be positive.
  Eigen::JacobiSVD<MatrixXd> fsvd(t.F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& fs = fsvd.singularValues();
  const double fcut = opts.rank_tol * std::max(1.0, fs(0));
  const VectorXd x = linalg::PseudoInverse(t.F, fcut / std::max(fs(0), 1e-300)) * t.N;
  const double span_gap = (t.F * x - t.N).norm() / std::max(t.N.norm(), 1e-300);
  if (span_gap > 1e-8) {
    out.verdict = HmcVerdict::kRefuted;
    out.reason = fmt::format("N is not in the span of F (relative gap {:.3e})", span_gap);
    return out;
  }
  if (fs(n - 1) > fcut) {
    const double hfn = t.H.dot(t.F.partialPivLu().solve(t.N));
    if (!(hfn > 0.0)) {
      out.verdict = HmcVerdict::kRefuted;
      out.reason = fmt::format("H F^-1 N = {:.6g} is not positive", hfn);
      return out;
    }
  }

  const HmcSlice slice(t, r0);
  if (slice.consistency() > 1e-8) {
    out.verdict = HmcVerdict::kRefuted;
    out.reason = "no symmetric P satisfies F P H^T = N";
    return out;
  }

  out.from_search = true;
  const FeasibilityTolerance& tol = opts.tol;
  auto triple = [&](const MatrixXd& P) {
    return std::make_pair(linalg::Symmetrize(P - t.F * P * t.F.transpose()),
                          Innovation(t, r0, P));
  };
  VectorXd y = VectorXd::Zero(slice.dimension());
  if (start) {
    auto [q0, rr0] = triple(*start);
    y = slice.Project(*start, q0, rr0);
  }
  VectorXd previous = y;
  for (int it = 1; it <= opts.max_iter; ++it) {
    out.iterations = it;
    const MatrixXd P = slice.PointAt(y);
    const auto [Q, R] = triple(P);
    const double scale = 1.0 + linalg::MaxAbs(P);
    const bool ok = linalg::MinEigenvalue(P) > tol.strict * scale &&
                    linalg::IsPsd(Q, tol.psd) && R >= -tol.psd * scale;
    if (ok && IsFeasible(t, r0, P, tol)) {
      out.verdict = HmcVerdict::kRealizable;
      out.p_tilde = P;
      out.reason = fmt::format("alternating projections converged in {} steps", it);
      return out;
    }
    const MatrixXd p_plus = ClipEigenvalues(P, 1e-9 * scale);
    const MatrixXd q_plus = ClipEigenvalues(Q, 0.0);
    y = slice.Project(p_plus, q_plus, std::max(R, 0.0));
    if (it > 1 && (y - previous).norm() <= 1e-15 * (1.0 + y.norm())) break;
    previous = y;
  }
  out.verdict = HmcVerdict::kUndetermined;
  out.reason = fmt::format(
      "projection search found no feasible point in {} steps", out.iterations);
  return out;
}

std::vector<FixedPoint> DgumFeasible(const RealizationTriplet& triplet, double r0,
                                     const RiccatiOptions& opts, double tol) {
  std::vector<FixedPoint> out;
  const ExtremalSolutions ext = ComputeExtremalP(triplet, r0, opts);
  if (triplet.order() == 0) {
    out.push_back({MatrixXd(0, 0), 0.0});
    return out;
  }
  for (const MatrixXd* P : {&ext.p_min, &ext.p_max}) {
    if (!(Innovation(triplet, r0, *P) > 1e-10 * r0)) continue;
    const double res = DgumConditionResidual(triplet, r0, *P);
    if (!(res < tol)) continue;
    const bool duplicate =
        !out.empty() && linalg::MaxAbs(out.front().P - *P) <=
                            1e-9 * std::max(1.0, linalg::MaxAbs(*P));
    if (!duplicate) out.push_back({*P, res});
  }
  return out;
}

RnnResult RnnFeasible(const RealizationTriplet& triplet, double r0,
                      const RiccatiOptions& opts, double tol) {
  RnnResult out;
  const int n = triplet.order();
  if (n > 1) {
    out.reason = fmt::format(
        "rank-1 constraint: the RNN condition forces a rank-1 P, but P must be "
        "definite with n = {}",
        n);
    return out;
  }
  const std::vector<FixedPoint> fixed = DgumFeasible(triplet, r0, opts, tol);
  if (n == 0) {
    out.realizable = true;
    out.p_tilde = MatrixXd(0, 0);
    out.residual = 0.0;
    out.reason = "order 0: white noise";
    return out;
  }
  for (const FixedPoint& fp : fixed) {
    const double res = RnnConditionResidual(triplet, r0, fp.P);
    if (res < out.residual) {
      out.residual = res;
      out.p_tilde = fp.P;
    }
  }
  out.realizable = out.residual < tol;
  out.reason = out.realizable
                   ? fmt::format("D-GUM fixed point satisfies the RNN condition "
                                 "(residual {:.3e})",
                                 out.residual)
                   : fmt::format("no D-GUM fixed point satisfies the RNN "
                                 "condition (best residual {:.3e})",
                                 out.residual);
  if (!out.realizable) out.p_tilde.reset();
  return out;
}

ClassificationReport Classify(const CovarianceSeries& series,
                              const ClassifyOptions& opts) {
  ClassificationReport rep;
  const double r0 = series.r0;
  auto refute_all = [&rep](const std::string& status, const std::string& reason) {
    for (FamilyVerdict* v : {&rep.gum, &rep.hmc, &rep.dgum, &rep.rnn}) {
      v->realizable = false;
      v->status = status;
      v->reason = reason;
    }
  };

  rep.toeplitz_m = opts.toeplitz_m < 0 ? std::min(series.K(), 30)
                                       : std::min(opts.toeplitz_m, series.K());
  rep.toeplitz_min_eig = ToeplitzMinEigenvalue(series, rep.toeplitz_m);
  rep.toeplitz_covariance = ToeplitzIsCovariance(series, rep.toeplitz_m);

  RealizationResult realization;
  int wide_order = 0;
  try {
    const int window = DefaultWindow(series, opts.rank_tol);
    const int p = opts.p > 0 ? opts.p : window;
    const int q = opts.q > 0 ? opts.q : window;
    rep.window = std::max(p, q);
    const int widest = series.K() / 2;
    wide_order = EstimateOrder(
        NumericalRank(BuildHankel(series, widest, widest), opts.rank_tol)
            .singular_values,
        opts.rank_tol);
    realization = HoKalman(series, p, q, opts.rank_tol);
  } catch (const Error& e) {
    rep.notes.push_back(fmt::format("realization failed: {} ({})",
                                    ErrorName(e.code()), e.what()));
    refute_all("refuted", "series is not factorizable within the available lags");
    return rep;
  }
  rep.triplet = realization.triplet;
  rep.order = realization.triplet.order();
  rep.singular_values = realization.singular_values;
  rep.reconstruction_error = realization.reconstruction_error;
  rep.factorizable = rep.order == wide_order;
  if (!rep.factorizable) {
    rep.notes.push_back(fmt::format(
        "Hankel rank not stable across windows ({} vs {})", rep.order, wide_order));
    refute_all("refuted", "series is not factorizable within the available lags");
    return rep;
  }

  const RealizationTriplet& t = rep.triplet;
  const PositiveRealResult pr = PositiveRealCheck(t, r0, opts.riccati);
  rep.is_covariance = pr.positive_real;
  if (!pr.diagnostic.empty()) rep.notes.push_back(pr.diagnostic);
  if (!pr.positive_real) {
    refute_all("not-covariance",
               fmt::format("positive real test failed: {}", pr.diagnostic));
    return rep;
  }
  rep.extremal = pr.certificate;
  const MatrixXd& p_min = rep.extremal->p_min;
  const MatrixXd& p_max = rep.extremal->p_max;

  auto attach = [&](FamilyVerdict& v, GumParameters witness) {
    if (!opts.build_witnesses) return;
    try {
      v.witness_error = WitnessError(witness, series);
    } catch (const Error& e) {
      rep.notes.push_back(fmt::format("witness check failed: {}", e.what()));
    }
    v.witness = std::move(witness);
  };

  // Order 0: white noise, every family with n = 0.
  if (rep.order == 0) {
    for (FamilyVerdict* v : {&rep.gum, &rep.hmc, &rep.dgum, &rep.rnn}) {
      v->realizable = true;
      v->status = "realizable";
      v->reason = "order 0: white noise";
      v->condition_residual = 0.0;
      v->certificates.push_back(MatrixXd(0, 0));
      attach(*v, WhiteNoiseWitness(r0));
    }
    return rep;
  }

  // GUM: any point of the solution set with R > 0.
  rep.gum.realizable = true;
  rep.gum.status = "realizable";
  rep.gum.reason = "positive real: the solution set is non-empty";
  const MatrixXd p_mid = linalg::Symmetrize(0.5 * (p_min + p_max));
  if (opts.build_witnesses) {
    for (const MatrixXd* P : {&p_mid, &p_min, &p_max}) {
      try {
        attach(rep.gum, GumFromRealization(t, r0, *P));
        rep.gum.certificates.push_back(*P);
        break;
      } catch (const Error&) {
      }
    }
  }

  // HMC.
  const HmcResult hmc = HmcFeasible(t, r0, opts.hmc, p_mid);
  rep.hmc.realizable = hmc.verdict == HmcVerdict::kRealizable;
  rep.hmc.status = std::string(HmcVerdictName(hmc.verdict));
  rep.hmc.reason = hmc.reason;
  rep.hmc.from_search = hmc.from_search;
  if (rep.hmc.realizable) {
    rep.hmc.certificates.push_back(*hmc.p_tilde);
    rep.hmc.condition_residual =
        linalg::MaxAbs(t.N - t.F * *hmc.p_tilde * t.H.transpose()) /
        std::max(1e-300, linalg::MaxAbs(t.N));
    attach(rep.hmc, HmcWitness(t, r0, *hmc.p_tilde));
  }
  if (hmc.from_search) {
    rep.notes.push_back("HMC verdict from the projection search (no closed form for n >= 2)");
  }

  // D-GUM.
  std::vector<FixedPoint> fixed;
  try {
    fixed = DgumFeasible(t, r0, opts.riccati, opts.condition_tol);
  } catch (const Error& e) {
    rep.notes.push_back(fmt::format("D-GUM search failed: {}", e.what()));
  }
  rep.dgum.realizable = !fixed.empty();
  rep.dgum.status = rep.dgum.realizable ? "realizable" : "refuted";
  rep.dgum.reason = rep.dgum.realizable
                        ? fmt::format("{} extremal Riccati fixed point(s)", fixed.size())
                        : "no extremal solution satisfies the D-GUM condition";
  for (const FixedPoint& fp : fixed) {
    rep.dgum.certificates.push_back(fp.P);
    rep.dgum.condition_residual =
        std::max(rep.dgum.condition_residual.value_or(0.0), fp.residual);
  }
  if (rep.dgum.realizable && opts.build_witnesses) {
    GumParameters w = GumFromRealization(t, r0, fixed.front().P);
    w.alpha.setZero();
    attach(rep.dgum, std::move(w));
  }

  // RNN.
  const RnnResult rnn = RnnFeasible(t, r0, opts.riccati, opts.condition_tol);
  rep.rnn.realizable = rnn.realizable;
  rep.rnn.status = rnn.realizable ? "realizable" : "refuted";
  rep.rnn.reason = rnn.reason;
  if (std::isfinite(rnn.residual)) rep.rnn.condition_residual = rnn.residual;
  if (rnn.realizable) {
    rep.rnn.certificates.push_back(*rnn.p_tilde);
    if (opts.build_witnesses) {
      GumParameters w = GumFromRealization(t, r0, *rnn.p_tilde);
      w.alpha.setZero();
      w.eta = r0 * w.c * w.c.transpose();
      attach(rep.rnn, std::move(w));
    }
  }
  return rep;
}

}  // namespace stochreal
