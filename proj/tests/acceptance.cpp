// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "stochreal/expressivity.hpp"
#include "stochreal/inference.hpp"
#include "stochreal/linalg.hpp"
#include "stochreal/model.hpp"
#include "stochreal/realization.hpp"
#include "stochreal/stochastic_realization.hpp"
#include "support.hpp"

using namespace stochreal;
using stochreal::testkit::Rng;
using stochreal::testkit::UniformReal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double RelativeLagError(const CovarianceSeries& a, const CovarianceSeries& b) {
  double worst = 0.0;
  for (int k = 0; k <= a.K(); ++k) {
    const double scale = std::max(std::abs(a.r0), std::abs(a.at(k)));
    worst = std::max(worst, std::abs(a.at(k) - b.at(k)) / scale);
  }
  return worst;
}

Outcome Cartography() {
  const CartographyGrid grid = ScalarCartography(1.0, 101, 101);
  const bool pass = grid.off_boundary_cells > 0 && grid.mismatches == 0 &&
                    grid.elapsed_seconds < 5.0;
  return {pass, fmt::format("{} off-boundary cells, {} mismatches, {:.2f} s",
                            grid.off_boundary_cells, grid.mismatches,
                            grid.elapsed_seconds)};
}

Outcome ScalarExample() {
  const RealizationTriplet t{RowVectorXd::Constant(1, 1.0), MatrixXd::Constant(1, 1, 0.5),
                             VectorXd::Constant(1, 0.3)};
  const auto interval = ComputeScalarInterval(t, 1.0);
  const ExtremalSolutions ext = ComputeExtremalP(t, 1.0);
  const HmcResult hmc = HmcFeasible(t, 1.0);
  const RnnResult rnn = RnnFeasible(t, 1.0);
  const bool interval_ok = interval && std::abs(interval->lower - 0.094158) <= 1e-6 &&
                           std::abs(interval->upper - 0.955842) <= 1e-6 &&
                           std::abs(ext.p_min(0, 0) - interval->lower) <= 1e-9 &&
                           std::abs(ext.p_max(0, 0) - interval->upper) <= 1e-9;
  const bool hmc_ok = hmc.verdict == HmcVerdict::kRealizable && hmc.p_tilde &&
                      std::abs((*hmc.p_tilde)(0, 0) - 0.6) <= 1e-12 &&
                      IsFeasible(t, 1.0, *hmc.p_tilde);
  const bool pass = interval_ok && hmc_ok && !rnn.realizable;
  return {pass, fmt::format("P = [{:.9f}, {:.9f}], HMC P~ = {}, RNN {}",
                            interval ? interval->lower : NAN,
                            interval ? interval->upper : NAN,
                            hmc.p_tilde ? fmt::format("{:.12g}", (*hmc.p_tilde)(0, 0))
                                        : std::string("none"),
                            rnn.realizable ? "accepted" : "refused")};
}

Outcome RealizationRoundTrip() {
  Rng rng(20240601);
  int failures = 0;
  double worst_recon = 0.0, worst_iso = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 4;
    const GumParameters params = testkit::RandomGum(n, rng);
    const CovarianceSeries series = AnalyticCovariance(params, 40);
    try {
      const RealizationResult hk = HoKalman(series);
      const double recon =
          RelativeLagError(series, ReconstructSeries(hk.triplet, series.r0, 40));
      const auto iso = FindIsomorphism(DirectRealization(params), hk.triplet);
      worst_recon = std::max(worst_recon, recon);
      if (iso) worst_iso = std::max(worst_iso, iso->residual);
      if (hk.triplet.order() != n || recon > 1e-6 || !iso || iso->residual >= 1e-8) {
        ++failures;
      }
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0,
          fmt::format("{} / 50 failed, worst reconstruction {:.2e}, worst "
                      "isomorphism residual {:.2e}",
                      failures, worst_recon, worst_iso)};
}

Outcome PositiveRealStructure() {
  Rng rng(777);
  int failures = 0;
  double worst_gap = INFINITY;
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 4;
    const GumParameters params = testkit::RandomGum(n, rng);
    const RealizationTriplet t = DirectRealization(params);
    const double r0 = AnalyticCovariance(params, 0).r0;
    try {
      const ExtremalSolutions ext = ComputeExtremalP(t, r0);
      const double gap = linalg::MinEigenvalue(ext.p_max - ext.p_min);
      worst_gap = std::min(worst_gap, gap);
      bool ok = gap > -1e-9;
      for (int j = 0; j < 10; ++j) {
        const double lambda = UniformReal(rng, 0.0, 1.0);
        ok = ok && IsFeasible(t, r0, lambda * ext.p_min + (1.0 - lambda) * ext.p_max);
      }
      if (!ok) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0,
          fmt::format("{} / 50 failed, smallest eig(P_max - P_min) {:.3e}", failures,
                      worst_gap)};
}

Outcome FamilyRoundTrips() {
  Rng rng(4242);
  int hmc_fail = 0, dgum_fail = 0, rnn_fail = 0, refute_fail = 0, total_refute = 0;
  double worst_dgum = 0.0, worst_rnn = 0.0;

  for (int i = 0; i < 12; ++i) {
    const int n = 1 + i % 3;
    const GumParameters params = testkit::RandomHmc(n, rng);
    const ClassificationReport rep = Classify(AnalyticCovariance(params, 40));
    const FamilyVerdict& v = rep.hmc;
    const bool witness_ok = v.witness && SatisfiesFamily(*v.witness, ModelFamily::kHmc) &&
                            IsStationary(*v.witness) && v.witness_error &&
                            *v.witness_error < 1e-6;
    if (!v.realizable || !witness_ok) ++hmc_fail;
    if (n >= 2) {
      ++total_refute;
      if (rep.rnn.realizable) ++refute_fail;
    }
  }
  for (int i = 0; i < 12; ++i) {
    const GumParameters params = testkit::RandomDgum(1, rng);
    const ClassificationReport rep = Classify(AnalyticCovariance(params, 40));
    const double res = rep.dgum.condition_residual.value_or(INFINITY);
    worst_dgum = std::max(worst_dgum, res);
    if (!rep.dgum.realizable || !(res < 1e-9)) ++dgum_fail;
  }
  for (int i = 0; i < 12; ++i) {
    const GumParameters params = testkit::RandomScalarRnn(rng, i % 2 == 1);
    const ClassificationReport rep = Classify(AnalyticCovariance(params, 40));
    const double res = rep.rnn.condition_residual.value_or(INFINITY);
    worst_rnn = std::max(worst_rnn, res);
    if (!rep.rnn.realizable || !(res < 1e-9)) ++rnn_fail;
  }
  for (int i = 0; i < 12; ++i) {
    const int n = 2 + i % 3;
    const GumParameters params =
        i % 2 ? testkit::RandomGum(n, rng) : testkit::RandomDgum(n, rng);
    ++total_refute;
    if (Classify(AnalyticCovariance(params, 40)).rnn.realizable) ++refute_fail;
  }
  const bool pass = hmc_fail + dgum_fail + rnn_fail + refute_fail == 0;
  return {pass, fmt::format("HMC {} / 12 failed, D-GUM {} / 12 failed (worst residual "
                            "{:.1e}), RNN {} / 12 failed (worst residual {:.1e}), "
                            "{} / {} n>=2 not refuted",
                            hmc_fail, dgum_fail, worst_dgum, rnn_fail, worst_rnn,
                            refute_fail, total_refute)};
}

Outcome MonteCarlo() {
  Rng rng(99);
  struct Case {
    ModelFamily family;
    GumParameters params;
  };
  const std::vector<Case> cases = {
      {ModelFamily::kGum, testkit::RandomGum(2, rng)},
      {ModelFamily::kHmc, testkit::RandomHmc(2, rng)},
      {ModelFamily::kDgum, testkit::RandomDgum(2, rng)},
      {ModelFamily::kRnn, testkit::RandomScalarRnn(rng, true)},
  };
  std::string detail;
  bool pass = true;
  std::uint64_t seed = 1000;
  for (const Case& c : cases) {
    std::vector<Trajectory> runs;
    runs.reserve(200);
    for (int m = 0; m < 200; ++m) runs.push_back(Simulate(c.params, c.family, 5000, seed++));
    const EmpiricalCovariance emp = ComputeEmpiricalCovariance(runs, 5);
    const CovarianceSeries exact = AnalyticCovariance(c.params, 5);
    double worst = 0.0;
    for (int k = 0; k <= 5; ++k) {
      worst = std::max(worst, std::abs(emp.series.at(k) - exact.at(k)) /
                                  emp.standard_errors[k]);
    }
    pass = pass && worst <= 5.0;
    detail += fmt::format("{}{} max {:.2f} SE", detail.empty() ? "" : ", ",
                          FamilyName(c.family), worst);
  }
  return {pass, detail};
}

Outcome OracleAgreement() {
  Rng rng(31337);
  const double r0 = 1.0;
  int disagreements = 0, covariances = 0;
  for (int i = 0; i < 100; ++i) {
    double F = 0.0, HN = 0.0;
    for (;;) {
      F = UniformReal(rng, -0.9, 0.9);
      HN = UniformReal(rng, -1.0, 1.0);
      const double lo = r0 * (F - 1.0) / 2.0, hi = r0 * (F + 1.0) / 2.0;
      if (std::abs(HN - lo) >= 0.02 * r0 && std::abs(HN - hi) >= 0.02 * r0 &&
          std::abs(F) >= 1e-3 && std::abs(HN) >= 1e-3) {
        break;
      }
    }
    const double H = UniformReal(rng, 0.5, 2.0);
    const RealizationTriplet t{RowVectorXd::Constant(1, H), MatrixXd::Constant(1, 1, F),
                               VectorXd::Constant(1, HN / H)};
    const bool toeplitz = ToeplitzIsCovariance(ScalarSeries(F, HN, r0, 30), 30);
    const bool pr = PositiveRealCheck(t, r0).positive_real;
    covariances += pr;
    if (toeplitz != pr) ++disagreements;
  }
  return {disagreements == 0, fmt::format("{} disagreements over 100 triplets ({} "
                                          "covariance)",
                                          disagreements, covariances)};
}

Outcome KalmanCrossLink() {
  Rng rng(5150);
  const std::vector<std::pair<ModelFamily, GumParameters>> cases = {
      {ModelFamily::kGum, testkit::RandomGum(2, rng)},
      {ModelFamily::kHmc, testkit::RandomHmc(3, rng)},
      {ModelFamily::kDgum, testkit::RandomDgum(2, rng)},
  };
  bool pass = true;
  std::string detail;
  std::uint64_t seed = 77;
  for (const auto& [family, params] : cases) {
    const Trajectory tr = Simulate(params, family, 5000, seed++);
    const FilterState state = KalmanFilter(params, tr.observations);
    const RealizationTriplet t = DirectRealization(params);
    const double r0 = AnalyticCovariance(params, 0).r0;
    const MatrixXd p_min = ComputeExtremalP(t, r0).p_min;
    const double R = ExtractNoise(t, r0, p_min).R;
    const double gap = std::abs(state.innovations[1000].variance - R) / R;
    const std::vector<double> rho = InnovationAutocorrelation(state.innovations, 5);
    const double bound = 3.0 / std::sqrt(static_cast<double>(tr.observations.size()));
    double worst = 0.0;
    for (double v : rho) worst = std::max(worst, std::abs(v));
    pass = pass && gap <= 1e-6 && worst < bound;
    detail += fmt::format("{}{} variance gap {:.1e}, max |rho| {:.3f} < {:.3f}",
                          detail.empty() ? "" : "; ", FamilyName(family), gap, worst,
                          bound);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"cartography reproduction", Cartography},
      {"scalar worked example", ScalarExample},
      {"realization round-trip", RealizationRoundTrip},
      {"positive-real structure", PositiveRealStructure},
      {"family round-trips", FamilyRoundTrips},
      {"Monte-Carlo consistency", MonteCarlo},
      {"oracle agreement", OracleAgreement},
      {"Kalman cross-link", KalmanCrossLink},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += !o.pass;
    std::printf("criterion %zu (%s): %s: %s\n", i + 1, criteria[i].first,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
