#pragma once

// JSON and CSV encodings. Matrices are row-major nested arrays, vectors flat
// arrays. Malformed documents throw Error(kInvalidArgument).

#include <optional>
#include <string>

#include <json.hpp>

#include "stochreal/expressivity.hpp"
#include "stochreal/inference.hpp"
#include "stochreal/model.hpp"
#include "stochreal/realization.hpp"
#include "stochreal/stochastic_realization.hpp"

namespace stochreal {

using Json = nlohmann::json;

Json MatrixToJson(const MatrixXd& m);
MatrixXd MatrixFromJson(const Json& j, const char* what);
Json VectorToJson(const Eigen::Ref<const VectorXd>& v);
VectorXd VectorFromJson(const Json& j, const char* what);

/// {"n","a","b","c","alpha","beta","eta","family"}. "family" may be null.
Json ParamsToJson(const GumParameters& params,
                  std::optional<ModelFamily> family = std::nullopt);
/// A missing or null "eta" is solved from the stationarity equation.
GumParameters ParamsFromJson(const Json& j,
                             std::optional<ModelFamily>* family = nullptr);

Json SeriesToJson(const CovarianceSeries& series);
CovarianceSeries SeriesFromJson(const Json& j);

Json TripletToJson(const RealizationTriplet& triplet);
RealizationTriplet TripletFromJson(const Json& j);

Json RealizationToJson(const RealizationResult& result);
Json SolutionSetToJson(const SolutionSetSummary& summary);
Json ClassificationToJson(const ClassificationReport& report);
Json ValidationToJson(const ValidationReport& report);

/// Columns F, HN, covariance, hmc, dgum, rnn_curve1_dist, rnn_curve2_dist;
/// reals printed with 17 significant digits.
std::string CartographyCsv(const CartographyGrid& grid);
/// Curve equations, region definitions and agreement counts.
Json CartographySidecar(const CartographyGrid& grid);

/// %.17g formatting.
std::string FormatReal(double v);

}  // namespace stochreal
