#include "cli.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "stochreal/errors.hpp"
#include "stochreal/expressivity.hpp"
#include "stochreal/inference.hpp"
#include "stochreal/model.hpp"
#include "stochreal/realization.hpp"
#include "stochreal/serialization.hpp"
#include "stochreal/version.hpp"

namespace stochreal::cli {
namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string command;
  std::optional<std::uint64_t> seed_flag;
  std::uint64_t seed = 0;
  std::string seed_source = "default";
  double tol_psd = 1e-9;
  double tol_rank = kDefaultRankTol;
  double tol_riccati = RiccatiOptions{}.tol;
  double tol_condition = 1e-9;
  std::optional<int> lags;
  std::string window;
  std::optional<std::pair<int, int>> pq;
  int grid = 101;
  double r0 = 1.0;
  unsigned threads = 0;
  std::string out;
  std::string input;
  std::string family;
  int length = 0;
  int trajectories = 1;
  int empirical = 0;
};

Json LoadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open \"{}\"", path));
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("\"{}\" is not valid JSON: {}", path, e.what()));
  }
}

void Emit(const Config& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) throw IoError(fmt::format("cannot write \"{}\"", cfg.out));
  file << text;
}

Json ConfigToJson(const Config& cfg) {
  Json j{{"command", cfg.command},
         {"seed", cfg.seed},
         {"seed_source", cfg.seed_source},
         {"tolerances", {{"psd", cfg.tol_psd},
                         {"rank", cfg.tol_rank},
                         {"riccati", cfg.tol_riccati},
                         {"condition", cfg.tol_condition},
                         {"strict", FeasibilityTolerance{}.strict}}},
         {"window", cfg.pq ? Json{cfg.pq->first, cfg.pq->second} : Json(nullptr)},
         {"lags", cfg.lags ? Json(*cfg.lags) : Json(nullptr)},
         {"out", cfg.out.empty() ? Json(nullptr) : Json(cfg.out)}};
  if (!cfg.input.empty()) j["input"] = cfg.input;
  if (cfg.command == "cartography") {
    j["grid"] = cfg.grid;
    j["r0"] = cfg.r0;
  }
  if (cfg.command == "simulate" || cfg.command == "validate") {
    j["length"] = cfg.length;
    j["family"] = cfg.family;
  }
  if (cfg.command == "simulate") j["trajectories"] = cfg.trajectories;
  if (cfg.command == "covariance") {
    j["empirical_trajectories"] = cfg.empirical;
    j["length"] = cfg.length;
  }
  return j;
}

Json Envelope(const Config& cfg, Json result) {
  return Json{{"version", kVersion},
              {"config", ConfigToJson(cfg)},
              {"result", std::move(result)}};
}

void EmitJson(const Config& cfg, const Json& doc, std::ostream& out) {
  Emit(cfg, doc.dump(2) + "\n", out);
}

void ResolveSeed(Config& cfg) {
  if (cfg.seed_flag) {
    cfg.seed = *cfg.seed_flag;
    cfg.seed_source = "flag";
    return;
  }
  if (const char* env = std::getenv("STOCHREAL_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || errno != 0 || env[0] == '-') {
      throw UsageError(fmt::format("STOCHREAL_SEED=\"{}\" is not a seed", env));
    }
    cfg.seed = v;
    cfg.seed_source = "env";
  }
}

void ResolveWindow(Config& cfg) {
  if (cfg.window.empty()) return;
  int p = 0, q = 0;
  char comma = 0;
  std::istringstream in(cfg.window);
  if (!(in >> p >> comma >> q) || comma != ',' || !in.eof() || p < 1 || q < 1) {
    throw UsageError(fmt::format("--window expects p,q with p, q >= 1, got \"{}\"",
                                 cfg.window));
  }
  cfg.pq = {p, q};
}

ModelFamily ResolveFamily(Config& cfg, std::optional<ModelFamily> from_file) {
  if (!cfg.family.empty()) {
    const auto parsed = ParseFamily(cfg.family);
    if (!parsed) throw UsageError(fmt::format("unknown family \"{}\"", cfg.family));
    cfg.family = std::string(FamilyName(*parsed));
    return *parsed;
  }
  const ModelFamily f = from_file.value_or(ModelFamily::kGum);
  cfg.family = std::string(FamilyName(f));
  return f;
}

CovarianceSeries LoadSeries(const Config& cfg) {
  CovarianceSeries series = SeriesFromJson(LoadJson(cfg.input));
  if (cfg.lags) {
    if (*cfg.lags > series.K()) {
      throw Error(ErrorCode::kInsufficientLags,
                  fmt::format("--lags {} exceeds the {} lags in \"{}\"", *cfg.lags,
                              series.K(), cfg.input));
    }
    series.lags.resize(*cfg.lags);
  }
  return series;
}

void RunSimulate(Config& cfg, std::ostream& out) {
  std::optional<ModelFamily> from_file;
  const GumParameters params = ParamsFromJson(LoadJson(cfg.input), &from_file);
  const ModelFamily family = ResolveFamily(cfg, from_file);
  Json runs = Json::array();
  for (int i = 0; i < cfg.trajectories; ++i) {
    const Trajectory tr = Simulate(params, family, cfg.length, cfg.seed + i);
    runs.push_back({{"seed", tr.seed}, {"observations", tr.observations}});
  }
  EmitJson(cfg, Envelope(cfg, {{"trajectories", runs}}), out);
}

void RunCovariance(Config& cfg, std::ostream& out) {
  std::optional<ModelFamily> from_file;
  const GumParameters params = ParamsFromJson(LoadJson(cfg.input), &from_file);
  const int K = cfg.lags.value_or(20);
  Json result{{"analytic", SeriesToJson(AnalyticCovariance(params, K))}};
  if (cfg.empirical > 0) {
    const ModelFamily family = ResolveFamily(cfg, from_file);
    std::vector<Trajectory> runs;
    for (int i = 0; i < cfg.empirical; ++i) {
      runs.push_back(Simulate(params, family, cfg.length, cfg.seed + i));
    }
    const EmpiricalCovariance emp = ComputeEmpiricalCovariance(runs, K);
    result["empirical"] = SeriesToJson(emp.series);
    result["empirical"]["standard_errors"] = emp.standard_errors;
  }
  EmitJson(cfg, Envelope(cfg, std::move(result)), out);
}

void RunRealize(Config& cfg, std::ostream& out) {
  const CovarianceSeries series = LoadSeries(cfg);
  const RealizationResult result =
      cfg.pq ? HoKalman(series, cfg.pq->first, cfg.pq->second, cfg.tol_rank)
             : HoKalman(series, cfg.tol_rank);
  Json doc = RealizationToJson(result);
  doc["r0"] = series.r0;
  EmitJson(cfg, Envelope(cfg, std::move(doc)), out);
}

void RunFeasibility(Config& cfg, std::ostream& out) {
  const Json doc = LoadJson(cfg.input);
  const Json& triplet_doc = doc.contains("triplet") ? doc.at("triplet") : doc;
  if (!doc.contains("r0") || !doc.at("r0").is_number()) {
    throw Error(ErrorCode::kInvalidArgument, "feasibility input needs a numeric \"r0\"");
  }
  const RealizationTriplet triplet = TripletFromJson(triplet_doc);
  const SolutionSetSummary summary =
      SummarizeSolutionSet(triplet, doc.at("r0").get<double>(),
                           RiccatiOptions{.tol = cfg.tol_riccati});
  EmitJson(cfg, Envelope(cfg, SolutionSetToJson(summary)), out);
}

void RunClassify(Config& cfg, std::ostream& out) {
  const CovarianceSeries series = LoadSeries(cfg);
  ClassifyOptions opts;
  if (cfg.pq) {
    opts.p = cfg.pq->first;
    opts.q = cfg.pq->second;
  }
  opts.rank_tol = cfg.tol_rank;
  opts.riccati.tol = cfg.tol_riccati;
  opts.hmc.tol.psd = cfg.tol_psd;
  opts.condition_tol = cfg.tol_condition;
  EmitJson(cfg, Envelope(cfg, ClassificationToJson(Classify(series, opts))), out);
}

void RunCartography(Config& cfg, std::ostream& out) {
  CartographyOptions opts;
  opts.lags = cfg.lags.value_or(opts.lags);
  opts.threads = cfg.threads;
  const CartographyGrid grid = ScalarCartography(cfg.r0, cfg.grid, cfg.grid, opts);
  const std::string csv = CartographyCsv(grid);
  if (cfg.out.empty()) {
    out << csv;
    return;
  }
  Emit(cfg, csv, out);
  std::filesystem::path sidecar(cfg.out);
  sidecar.replace_extension(".curves.json");
  Json doc = CartographySidecar(grid);
  doc["version"] = kVersion;
  doc["config"] = ConfigToJson(cfg);
  std::ofstream file(sidecar, std::ios::binary);
  if (!file) throw IoError(fmt::format("cannot write \"{}\"", sidecar.string()));
  file << doc.dump(2) << "\n";
}

void RunValidate(Config& cfg, std::ostream& out) {
  std::optional<ModelFamily> from_file;
  const GumParameters params = ParamsFromJson(LoadJson(cfg.input), &from_file);
  const ModelFamily family = ResolveFamily(cfg, from_file);
  const Trajectory tr = Simulate(params, family, cfg.length, cfg.seed);
  const ValidationReport report =
      ValidateFilter(params, tr.observations, cfg.lags.value_or(5));
  EmitJson(cfg, Envelope(cfg, ValidationToJson(report)), out);
}

void WriteError(std::ostream& err, std::string_view code, std::string_view message) {
  err << Json{{"error", code}, {"message", message}, {"version", kVersion}}.dump()
      << "\n";
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Linear-Gaussian GUM realization and expressivity toolkit", "stochreal"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed_flag, "RNG seed (default: $STOCHREAL_SEED or 0)");
    sub->add_option("--tol-psd", cfg.tol_psd, "PSD tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-rank", cfg.tol_rank, "Hankel rank tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-riccati", cfg.tol_riccati, "Riccati convergence tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--lags", cfg.lags, "Number of lags K")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "Output path (default: stdout)");
  };
  auto add_input = [&cfg](CLI::App* sub, const char* name, const char* what) {
    sub->add_option(name, cfg.input, what)->required();
  };

  auto* simulate = app.add_subcommand("simulate", "Sample trajectories from a GUM");
  add_common(simulate);
  add_input(simulate, "--params", "GumParameters JSON");
  simulate->add_option("--family", cfg.family, "GUM, HMC, DGUM or RNN");
  simulate->add_option("--length", cfg.length, "Last time index T")
      ->default_val(1000)->check(CLI::NonNegativeNumber);
  simulate->add_option("--trajectories", cfg.trajectories, "Number of trajectories")
      ->default_val(1)->check(CLI::PositiveNumber);

  auto* covariance = app.add_subcommand("covariance", "Analytic (and empirical) covariance");
  add_common(covariance);
  add_input(covariance, "--params", "GumParameters JSON");
  covariance->add_option("--family", cfg.family, "Family used for simulation");
  covariance->add_option("--empirical", cfg.empirical,
                         "Trajectories for the empirical estimate (0 = none)")
      ->default_val(0)->check(CLI::NonNegativeNumber);
  covariance->add_option("--length", cfg.length, "Trajectory length T")
      ->default_val(5000)->check(CLI::PositiveNumber);

  auto* realize = app.add_subcommand("realize", "Ho-Kalman realization of a series");
  add_common(realize);
  add_input(realize, "--series", "CovarianceSeries JSON");
  realize->add_option("--window", cfg.window, "Hankel window p,q");

  auto* feasibility =
      app.add_subcommand("feasibility", "Stochastic realization set of a triplet");
  add_common(feasibility);
  add_input(feasibility, "--triplet", "Triplet JSON with r0");

  auto* classify = app.add_subcommand("classify", "Family realizability of a series");
  add_common(classify);
  add_input(classify, "--series", "CovarianceSeries JSON");
  classify->add_option("--window", cfg.window, "Hankel window p,q");
  classify->add_option("--tol-condition", cfg.tol_condition,
                       "D-GUM / RNN condition tolerance")
      ->check(CLI::PositiveNumber);

  auto* cartography = app.add_subcommand("cartography", "Scalar (F, HN) cartography");
  add_common(cartography);
  cartography->add_option("--r0", cfg.r0, "Variance r0")->check(CLI::PositiveNumber);
  cartography->add_option("--grid", cfg.grid, "Grid size M (M x M cells)")
      ->check(CLI::Range(3, 100000));
  cartography->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");

  auto* validate = app.add_subcommand("validate", "Kalman-filter validation of simulated data");
  add_common(validate);
  add_input(validate, "--params", "GumParameters JSON");
  validate->add_option("--family", cfg.family, "Family used for simulation");
  validate->add_option("--length", cfg.length, "Last time index T")
      ->default_val(5000)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    ResolveSeed(cfg);
    ResolveWindow(cfg);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    WriteError(err, "UsageError", e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    WriteError(err, "UsageError", e.what());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  try {
    if (sub == simulate) RunSimulate(cfg, out);
    if (sub == covariance) RunCovariance(cfg, out);
    if (sub == realize) RunRealize(cfg, out);
    if (sub == feasibility) RunFeasibility(cfg, out);
    if (sub == classify) RunClassify(cfg, out);
    if (sub == cartography) RunCartography(cfg, out);
    if (sub == validate) RunValidate(cfg, out);
  } catch (const UsageError& e) {
    WriteError(err, "UsageError", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    WriteError(err, ErrorName(e.code()), e.what());
    return kExitFailure;
  } catch (const IoError& e) {
    WriteError(err, "IOError", e.what());
    return kExitFailure;
  } catch (const Json::exception& e) {
    WriteError(err, "InvalidArgument", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    WriteError(err, "InternalError", e.what());
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace stochreal::cli
