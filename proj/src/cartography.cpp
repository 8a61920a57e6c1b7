#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "stochreal/errors.hpp"
#include "stochreal/expressivity.hpp"

namespace stochreal {
namespace {

bool Near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

PipelineLabels RunPipeline(double F, double HN, double r0, int lags) {
  ClassifyOptions opts;
  opts.build_witnesses = false;
  const ClassificationReport rep = Classify(ScalarSeries(F, HN, r0, lags), opts);
  PipelineLabels out;
  out.covariance = rep.factorizable && rep.is_covariance;
  out.hmc = rep.hmc.realizable;
  out.hmc_verdict = rep.hmc.status == "realizable"     ? HmcVerdict::kRealizable
                    : rep.hmc.status == "undetermined" ? HmcVerdict::kUndetermined
                                                       : HmcVerdict::kRefuted;
  out.dgum = rep.dgum.realizable;
  out.rnn = rep.rnn.realizable;
  return out;
}

void FillCell(CartographyCell& cell, double r0, double band,
              const CartographyOptions& opts) {
  const double tol = opts.boundary_tol * r0;
  cell.covariance = CovarianceRegion(cell.F, cell.HN, r0, opts.boundary_tol);
  cell.hmc = HmcRegion(cell.F, cell.HN, r0, opts.boundary_tol);
  cell.dgum = cell.covariance;
  cell.rnn_curve1_dist = std::abs(cell.HN - RnnCurve1(cell.F, r0));
  cell.rnn_curve2_dist = std::abs(cell.HN - RnnCurve2(cell.F, r0));
  cell.rnn_band1 = cell.rnn_curve1_dist <= band;
  cell.rnn_band2 = cell.rnn_curve2_dist <= band;
  cell.rnn_exact = cell.covariance == RegionLabel::kYes &&
                   (cell.rnn_curve1_dist <= tol || cell.rnn_curve2_dist <= tol);
  cell.off_boundary = cell.covariance != RegionLabel::kBoundary &&
                      cell.hmc != RegionLabel::kBoundary;
  if (!opts.run_pipeline) return;

  cell.pipeline = RunPipeline(cell.F, cell.HN, r0, opts.lags);
  if (cell.off_boundary) {
    const PipelineLabels& p = *cell.pipeline;
    cell.agrees = p.covariance == (cell.covariance == RegionLabel::kYes) &&
                  p.hmc == (cell.hmc == RegionLabel::kYes) &&
                  p.hmc_verdict != HmcVerdict::kUndetermined &&
                  p.dgum == (cell.dgum == RegionLabel::kYes) &&
                  p.rnn == cell.rnn_exact;
  }
}

}  // namespace

std::string_view RegionLabelName(RegionLabel label) {
  switch (label) {
    case RegionLabel::kNo: return "no";
    case RegionLabel::kYes: return "yes";
    case RegionLabel::kBoundary: return "boundary";
  }
  return "no";
}

RegionLabel CovarianceRegion(double F, double HN, double r0, double tol) {
  const double abs_tol = tol * r0;
  if (std::abs(F) > 1.0 + tol) return RegionLabel::kNo;
  const double lower = r0 * (F - 1.0) / 2.0;
  const double upper = r0 * (F + 1.0) / 2.0;
  const bool on_edge = Near(HN, lower, abs_tol) || Near(HN, upper, abs_tol);
  if (on_edge && HN >= lower - abs_tol && HN <= upper + abs_tol) {
    return RegionLabel::kBoundary;
  }
  if (Near(std::abs(F), 1.0, tol)) {
    return HN >= lower && HN <= upper ? RegionLabel::kBoundary : RegionLabel::kNo;
  }
  return HN > lower && HN < upper ? RegionLabel::kYes : RegionLabel::kNo;
}

RegionLabel HmcRegion(double F, double HN, double r0, double tol) {
  const double abs_tol = tol * r0;
  if (std::abs(F) >= 1.0 - tol) {
    return CovarianceRegion(F, HN, r0, tol) == RegionLabel::kNo
               ? RegionLabel::kNo
               : RegionLabel::kBoundary;
  }
  if (Near(HN, 0.0, abs_tol) || Near(HN, r0 * F, abs_tol)) {
    return RegionLabel::kBoundary;
  }
  if (F > 0.0) return HN > 0.0 && HN < r0 * F ? RegionLabel::kYes : RegionLabel::kNo;
  if (F < 0.0) return HN < 0.0 && HN > r0 * F ? RegionLabel::kYes : RegionLabel::kNo;
  return RegionLabel::kNo;
}

CovarianceSeries ScalarSeries(double F, double HN, double r0, int K) {
  CovarianceSeries s;
  s.r0 = r0;
  s.lags.reserve(K);
  double value = HN;
  for (int k = 1; k <= K; ++k) {
    s.lags.push_back(value);
    value *= F;
  }
  return s;
}

CartographyGrid ScalarCartography(double r0, int grid_F, int grid_HN,
                                  const CartographyOptions& opts) {
  if (grid_F < 3 || grid_HN < 3) {
    throw Error(ErrorCode::kInvalidArgument, "cartography grids must be >= 3");
  }
  if (!(r0 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cartography needs r0 > 0");
  }
  const auto started = std::chrono::steady_clock::now();

  CartographyGrid grid;
  grid.r0 = r0;
  for (int i = 0; i < grid_F; ++i) {
    grid.F_axis.push_back(-1.0 + (2.0 * i + 1.0) / grid_F);
  }
  for (int j = 0; j < grid_HN; ++j) {
    grid.HN_axis.push_back(r0 * (-1.0 + (2.0 * j + 1.0) / grid_HN));
  }
  grid.rnn_band = r0 / grid_HN;  // half of the HN spacing 2 r0 / grid_HN
  grid.cells.resize(static_cast<std::size_t>(grid_F) * grid_HN);
  for (int i = 0; i < grid_F; ++i) {
    for (int j = 0; j < grid_HN; ++j) {
      CartographyCell& cell = grid.cells[static_cast<std::size_t>(i) * grid_HN + j];
      cell.F = grid.F_axis[i];
      cell.HN = grid.HN_axis[j];
    }
  }

  // Cells are independent; each worker owns a strided subset of rows, so the
  // output layout does not depend on scheduling.
  unsigned workers = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1u, static_cast<unsigned>(grid_F));
  auto work = [&](unsigned id) {
    for (int i = static_cast<int>(id); i < grid_F; i += static_cast<int>(workers)) {
      for (int j = 0; j < grid_HN; ++j) {
        FillCell(grid.cells[static_cast<std::size_t>(i) * grid_HN + j], r0,
                 grid.rnn_band, opts);
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
  }

  for (const CartographyCell& cell : grid.cells) {
    if (!cell.off_boundary) continue;
    ++grid.off_boundary_cells;
    if (!cell.agrees) ++grid.mismatches;
  }
  grid.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return grid;
}

}  // namespace stochreal
