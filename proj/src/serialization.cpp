#include "stochreal/serialization.hpp"

#include <cmath>

#include <fmt/format.h>

#include "stochreal/errors.hpp"

namespace stochreal {
namespace {

[[noreturn]] void Malformed(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

const Json& Require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    Malformed(fmt::format("missing key \"{}\"", key));
  }
  return j.at(key);
}

double Number(const Json& j, const char* what) {
  if (!j.is_number()) Malformed(fmt::format("\"{}\" must be a number", what));
  return j.get<double>();
}

Json OptionalMatrix(const std::optional<MatrixXd>& m) {
  return m ? MatrixToJson(*m) : Json(nullptr);
}

Json VerdictToJson(const FamilyVerdict& v) {
  Json j{{"realizable", v.realizable},
         {"status", v.status},
         {"reason", v.reason},
         {"from_search", v.from_search}};
  j["witness"] = v.witness ? ParamsToJson(*v.witness) : Json(nullptr);
  j["witness_error"] = v.witness_error ? Json(*v.witness_error) : Json(nullptr);
  j["condition_residual"] =
      v.condition_residual ? Json(*v.condition_residual) : Json(nullptr);
  Json certs = Json::array();
  for (const MatrixXd& p : v.certificates) certs.push_back(MatrixToJson(p));
  j["certificates"] = std::move(certs);
  return j;
}

}  // namespace

std::string FormatReal(double v) { return fmt::format("{:.17g}", v); }

Json MatrixToJson(const MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd MatrixFromJson(const Json& j, const char* what) {
  if (!j.is_array()) Malformed(fmt::format("\"{}\" must be a nested array", what));
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return MatrixXd(0, 0);
  if (!j[0].is_array()) Malformed(fmt::format("\"{}\" must be a nested array", what));
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      Malformed(fmt::format("\"{}\" has ragged rows", what));
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = Number(row[k], what);
  }
  return m;
}

Json VectorToJson(const Eigen::Ref<const VectorXd>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorXd VectorFromJson(const Json& j, const char* what) {
  if (j.is_number()) return VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) Malformed(fmt::format("\"{}\" must be an array", what));
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    // Accept [[x], [y]] column vectors as well as flat arrays.
    const Json& e = j[i].is_array() && j[i].size() == 1 ? j[i][0] : j[i];
    v(static_cast<Eigen::Index>(i)) = Number(e, what);
  }
  return v;
}

Json ParamsToJson(const GumParameters& params, std::optional<ModelFamily> family) {
  return Json{{"n", params.n()},
              {"a", MatrixToJson(params.a)},
              {"b", VectorToJson(params.b.transpose())},
              {"c", VectorToJson(params.c)},
              {"alpha", MatrixToJson(params.alpha)},
              {"beta", params.beta},
              {"eta", MatrixToJson(params.eta)},
              {"family", family ? Json(std::string(FamilyName(*family)))
                                : Json(nullptr)}};
}

GumParameters ParamsFromJson(const Json& j, std::optional<ModelFamily>* family) {
  const MatrixXd a = MatrixFromJson(Require(j, "a"), "a");
  const RowVectorXd b = VectorFromJson(Require(j, "b"), "b").transpose();
  const VectorXd c = VectorFromJson(Require(j, "c"), "c");
  const MatrixXd alpha = MatrixFromJson(Require(j, "alpha"), "alpha");
  const double beta = Number(Require(j, "beta"), "beta");
  if (j.contains("n") && j.at("n").get<int>() != a.rows()) {
    Malformed(fmt::format("\"n\" = {} does not match a ({} rows)",
                          j.at("n").get<int>(), a.rows()));
  }
  GumParameters params;
  if (!j.contains("eta") || j.at("eta").is_null()) {
    params = GumParameters::WithStationaryEta(a, b, c, alpha, beta);
  } else {
    params = {a, b, c, alpha, beta, MatrixFromJson(j.at("eta"), "eta")};
  }
  params.Validate();
  std::optional<ModelFamily> parsed;
  if (j.contains("family") && !j.at("family").is_null()) {
    const std::string name = j.at("family").get<std::string>();
    parsed = ParseFamily(name);
    if (!parsed) Malformed(fmt::format("unknown family \"{}\"", name));
  }
  if (family) *family = parsed;
  return params;
}

Json SeriesToJson(const CovarianceSeries& series) {
  return Json{{"r0", series.r0}, {"lags", series.lags}};
}

CovarianceSeries SeriesFromJson(const Json& j) {
  CovarianceSeries s;
  s.r0 = Number(Require(j, "r0"), "r0");
  const Json& lags = Require(j, "lags");
  if (!lags.is_array()) Malformed("\"lags\" must be an array");
  for (const Json& v : lags) s.lags.push_back(Number(v, "lags"));
  return s;
}

Json TripletToJson(const RealizationTriplet& t) {
  return Json{{"n", t.order()},
              {"H", VectorToJson(t.H.transpose())},
              {"F", MatrixToJson(t.F)},
              {"N", VectorToJson(t.N)}};
}

RealizationTriplet TripletFromJson(const Json& j) {
  RealizationTriplet t;
  t.H = VectorFromJson(Require(j, "H"), "H").transpose();
  t.F = MatrixFromJson(Require(j, "F"), "F");
  t.N = VectorFromJson(Require(j, "N"), "N");
  const int n = t.order();
  if (t.F.cols() != n || t.H.size() != n || t.N.size() != n) {
    Malformed("triplet shapes are inconsistent");
  }
  if (j.contains("n") && j.at("n").get<int>() != n) {
    Malformed("\"n\" does not match F");
  }
  return t;
}

Json RealizationToJson(const RealizationResult& result) {
  Json j = TripletToJson(result.triplet);
  j["diagnostics"] = {{"singular_values", VectorToJson(result.singular_values)},
                      {"reconstruction_error", result.reconstruction_error},
                      {"p", result.p},
                      {"q", result.q}};
  return j;
}

Json SolutionSetToJson(const SolutionSetSummary& s) {
  Json j{{"feasible", s.feasible},
         {"p_min", OptionalMatrix(s.p_min)},
         {"p_max", OptionalMatrix(s.p_max)},
         {"p_min_strict", s.p_min_strict},
         {"residual_min_eig_at_p_min", s.residual_min_eig_at_p_min},
         {"residual_min_eig_at_p_max", s.residual_min_eig_at_p_max},
         {"diagnostic", s.diagnostic}};
  j["scalar_interval"] =
      s.scalar_interval
          ? Json{{"lower", s.scalar_interval->lower}, {"upper", s.scalar_interval->upper}}
          : Json(nullptr);
  return j;
}

Json ClassificationToJson(const ClassificationReport& r) {
  Json j{{"factorizable", r.factorizable},
         {"order", r.order},
         {"is_covariance", r.is_covariance},
         {"toeplitz", {{"covariance", r.toeplitz_covariance},
                       {"min_eigenvalue", r.toeplitz_min_eig},
                       {"m", r.toeplitz_m}}},
         {"window", r.window},
         {"triplet", TripletToJson(r.triplet)},
         {"singular_values", VectorToJson(r.singular_values)},
         {"reconstruction_error", r.reconstruction_error},
         {"notes", r.notes}};
  j["extremal"] = r.extremal
                      ? Json{{"p_min", MatrixToJson(r.extremal->p_min)},
                             {"p_max", MatrixToJson(r.extremal->p_max)},
                             {"iterations_min", r.extremal->iterations_min},
                             {"iterations_max", r.extremal->iterations_max},
                             {"p_min_strict", r.extremal->p_min_strict}}
                      : Json(nullptr);
  j["families"] = {{"GUM", VerdictToJson(r.gum)},
                   {"HMC", VerdictToJson(r.hmc)},
                   {"DGUM", VerdictToJson(r.dgum)},
                   {"RNN", VerdictToJson(r.rnn)}};
  return j;
}

Json ValidationToJson(const ValidationReport& r) {
  return Json{{"T", r.T},
              {"loglik", r.loglik},
              {"steady_state_variance", r.steady_state_variance},
              {"riccati_variance", r.riccati_variance},
              {"variance_gap", r.variance_gap},
              {"steady_state_matches", r.steady_state_matches},
              {"autocorrelation", r.autocorrelation},
              {"whiteness_bound", r.whiteness_bound},
              {"white", r.white}};
}

std::string CartographyCsv(const CartographyGrid& grid) {
  std::string out = "F,HN,covariance,hmc,dgum,rnn_curve1_dist,rnn_curve2_dist\n";
  for (const CartographyCell& c : grid.cells) {
    out += fmt::format("{},{},{},{},{},{},{}\n", FormatReal(c.F), FormatReal(c.HN),
                       RegionLabelName(c.covariance), RegionLabelName(c.hmc),
                       RegionLabelName(c.dgum), FormatReal(c.rnn_curve1_dist),
                       FormatReal(c.rnn_curve2_dist));
  }
  return out;
}

Json CartographySidecar(const CartographyGrid& grid) {
  const double r0 = grid.r0;
  return Json{
      {"r0", r0},
      {"grid_F", grid.F_axis.size()},
      {"grid_HN", grid.HN_axis.size()},
      {"F_range", {grid.F_axis.front(), grid.F_axis.back()}},
      {"HN_range", {grid.HN_axis.front(), grid.HN_axis.back()}},
      {"regions",
       {{"covariance", {{"equation", "r0*(F-1)/2 <= HN <= r0*(F+1)/2, |F| < 1"},
                        {"lower", {{"slope", r0 / 2}, {"intercept", -r0 / 2}}},
                        {"upper", {{"slope", r0 / 2}, {"intercept", r0 / 2}}}}},
        {"hmc", {{"equation", "0 < HN <= r0*F for F >= 0; r0*F <= HN < 0 for F <= 0"},
                 {"diagonal", {{"slope", r0}, {"intercept", 0.0}}}}},
        {"dgum", {{"equation", "same as covariance"}}}}},
      {"rnn_curves",
       {{{"name", "rnn_curve1"}, {"equation", "HN = r0*F"}, {"coefficients", {0.0, r0}}},
        {{"name", "rnn_curve2"},
         {"equation", "HN = r0*F*(2*F^2-1)"},
         {"coefficients", {0.0, -r0, 0.0, 2 * r0}}}}},
      {"rnn_band", grid.rnn_band},
      {"off_boundary_cells", grid.off_boundary_cells},
      {"mismatches", grid.mismatches}};
}

}  // namespace stochreal
