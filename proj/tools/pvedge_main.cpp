// pvedge: train, evaluate and deploy LSBoost inverter-power forecasting
// models, compute V-Q droop setpoints, and verify edge deployments via
// parity reports and latency benchmarks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvedge/bench.hpp"
#include "pvedge/dataio.hpp"
#include "pvedge/droop.hpp"
#include "pvedge/ensemble.hpp"
#include "pvedge/errors.hpp"
#include "pvedge/metrics.hpp"
#include "pvedge/model_io.hpp"
#include "pvedge/textio.hpp"
#include "pvedge/train.hpp"

namespace {

// Exit-code contract: 0 success, 1 comparison-threshold failure,
// 2 usage/config error, 3 data-shape error, 4 model-corruption error.
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;

struct TrainArgs {
  std::string data, schema, target, out;
  std::string config_file;
  std::string log, report;
  double train_fraction = 0.8;
  int max_gap = 4;
  pvedge::TrainConfig config;
};

// key = value lines, # or ; comments. Recognized keys: trees, learn-rate,
// max-depth, min-leaf, seed (underscores accepted too). Flags given on the
// command line take precedence; file values beat the built-in defaults.
void apply_config_file(const std::string& path, const CLI::App& train,
                       pvedge::TrainConfig& config) {
  std::ifstream in(path);
  if (!in) throw pvedge::ConfigError("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = pvedge::trim(line);
    if (text.empty() || text.front() == '#' || text.front() == ';') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw pvedge::ConfigError(path + ":" + std::to_string(line_no) +
                                ": expected key=value");
    }
    std::string key(pvedge::trim(text.substr(0, eq)));
    for (auto& c : key) {
      if (c == '_') c = '-';
    }
    const auto value_text = pvedge::trim(text.substr(eq + 1));
    const auto value = pvedge::parse_double(value_text);
    if (!value) {
      throw pvedge::ConfigError(path + ":" + std::to_string(line_no) +
                                ": value for '" + key + "' is not a number");
    }
    const auto given = [&train](const std::string& flag) {
      return train.count(flag) > 0;
    };
    if (key == "trees") {
      if (!given("--trees")) config.n_trees = static_cast<int>(*value);
    } else if (key == "learn-rate") {
      if (!given("--learn-rate")) config.learn_rate = *value;
    } else if (key == "max-depth") {
      if (!given("--max-depth")) config.max_depth = static_cast<int>(*value);
    } else if (key == "min-leaf") {
      if (!given("--min-leaf")) config.min_leaf = static_cast<int>(*value);
    } else if (key == "seed") {
      if (!given("--seed")) config.seed = static_cast<std::uint64_t>(*value);
    } else {
      throw pvedge::ConfigError(path + ":" + std::to_string(line_no) +
                                ": unknown key '" + key + "'");
    }
  }
}

struct PredictArgs {
  std::string model, data, out, schema;
};

struct DroopArgs {
  std::string params, voltages, csv;
};

struct CompareArgs {
  std::string ref, cand;
  double capacity = 0.0;
  double threshold = 1e-6;
};

struct BenchArgs {
  std::string model, data, schema;
  int reps = 0;  // 0 = enough passes for >= 1000 predictions
};

struct InspectArgs {
  std::string model, json;
};

Eigen::MatrixXd load_features(const std::string& data_path,
                              const std::string& schema_path) {
  if (schema_path.empty()) {
    return pvedge::load_matrix_csv(data_path);
  }
  const auto schema = pvedge::Schema::load_json(schema_path);
  return pvedge::feature_matrix(pvedge::load_csv(data_path, schema));
}

int run_train(const TrainArgs& args) {
  const auto schema = pvedge::Schema::load_json(args.schema);
  const auto target =
      args.target == "active" ? pvedge::Target::active : pvedge::Target::reactive;

  auto dataset = pvedge::load_csv(args.data, schema);
  auto cleaned = pvedge::clean(dataset, pvedge::CleanRules::defaults(schema.capacity));
  auto imputed = pvedge::impute(cleaned.data, args.max_gap);
  const auto parts = pvedge::split(imputed, args.train_fraction);

  const auto train = pvedge::extract(parts.train, target);
  if (train.X.rows() < 1) {
    throw pvedge::DataError("no complete training rows after preprocessing");
  }
  std::vector<double> round_rmse;
  const auto model = pvedge::fit_lsboost(train.X, train.y, args.config, &round_rmse);

  pvedge::save_model(model, args.out);
  const std::string log_path = args.log.empty() ? args.out + ".log" : args.log;
  pvedge::write_training_log(round_rmse, log_path);

  const auto test = pvedge::extract(parts.test, target);
  if (test.X.rows() >= 1) {
    const auto predicted = pvedge::predict_ensemble_rows(model, test.X);
    const auto report =
        pvedge::evaluate_predictions(test.y, predicted, schema.capacity);
    std::cout << "model:         " << args.out << "\n";
    std::cout << "trees:         " << model.tree_count() << "\n";
    std::cout << "test split (" << args.target << " target):\n";
    std::cout << pvedge::report_text(report);
    if (!args.report.empty()) {
      std::ofstream out(args.report, std::ios::trunc);
      if (!out) throw pvedge::ConfigError("cannot write report: " + args.report);
      out << pvedge::report_csv_header() << '\n'
          << pvedge::report_csv_line(report) << '\n';
    }
  } else {
    std::cout << "model: " << args.out << " (test split had no complete rows)\n";
  }
  return 0;
}

int run_predict(const PredictArgs& args) {
  const auto model = pvedge::load_model(args.model);
  const Eigen::MatrixXd X = load_features(args.data, args.schema);
  if (X.cols() != static_cast<Eigen::Index>(model.n_features)) {
    throw pvedge::DimensionError("model expects " +
                                 std::to_string(model.n_features) +
                                 " features, data has " + std::to_string(X.cols()));
  }
  const auto predictions = pvedge::predict_ensemble_rows(model, X);
  pvedge::write_prediction_csv(predictions, args.out);
  std::cout << "wrote " << predictions.size() << " predictions to " << args.out
            << "\n";
  return 0;
}

int run_droop(const DroopArgs& args) {
  const auto inverters = pvedge::load_droop_params_csv(args.params);

  std::vector<double> voltages;
  std::string field;
  std::stringstream stream(args.voltages);
  while (std::getline(stream, field, ',')) {
    const auto value = pvedge::parse_double(field);
    if (!value) {
      throw pvedge::DataError("bad voltage value: '" + field + "'");
    }
    voltages.push_back(*value);
  }
  if (voltages.size() != inverters.size()) {
    throw pvedge::DataError("got " + std::to_string(voltages.size()) +
                            " voltages for " + std::to_string(inverters.size()) +
                            " inverters");
  }

  std::vector<pvedge::Setpoint> setpoints;
  for (std::size_t i = 0; i < inverters.size(); ++i) {
    setpoints.push_back(pvedge::droop_setpoints(inverters[i].params, voltages[i]));
  }

  std::printf("%-13s%s\n", "Pref:", "Qref:");
  for (const auto& s : setpoints) {
    std::printf("%-13s%s\n", pvedge::format_fixed(s.p_ref, 5).c_str(),
                pvedge::format_fixed(s.q_ref, 5).c_str());
  }

  if (!args.csv.empty()) {
    std::ofstream out(args.csv, std::ios::trunc);
    if (!out) throw pvedge::ConfigError("cannot write csv: " + args.csv);
    out << "id,p_ref,q_ref,k_q\n";
    for (std::size_t i = 0; i < inverters.size(); ++i) {
      out << inverters[i].id << ',' << pvedge::format_double(setpoints[i].p_ref)
          << ',' << pvedge::format_double(setpoints[i].q_ref) << ','
          << pvedge::format_double(setpoints[i].k_q) << '\n';
    }
  }
  return 0;
}

int run_compare(const CompareArgs& args) {
  const auto reference = pvedge::read_prediction_csv(args.ref);
  const auto candidate = pvedge::read_prediction_csv(args.cand);
  if (reference.size() != candidate.size()) {
    throw pvedge::DimensionError("prediction streams differ in length: " +
                                 std::to_string(reference.size()) + " vs " +
                                 std::to_string(candidate.size()));
  }
  const auto report = pvedge::parity_report(reference, candidate, args.capacity);
  std::cout << pvedge::report_text(report);
  const bool ok = report.rmse <= args.threshold;
  std::cout << (ok ? "PARITY OK" : "PARITY FAILED") << " (rmse "
            << pvedge::format_double(report.rmse) << " vs threshold "
            << pvedge::format_double(args.threshold) << ")\n";
  return ok ? 0 : kExitThreshold;
}

int run_bench(const BenchArgs& args) {
  const auto model = pvedge::load_model(args.model);
  const Eigen::MatrixXd X = load_features(args.data, args.schema);
  if (X.cols() != static_cast<Eigen::Index>(model.n_features)) {
    throw pvedge::DimensionError("model expects " +
                                 std::to_string(model.n_features) +
                                 " features, data has " + std::to_string(X.cols()));
  }
  const int reps = args.reps > 0 ? args.reps : pvedge::default_repetitions(X.rows());
  const auto report = pvedge::bench_model(model, X, reps);
  std::cout << pvedge::bench_text(report);
  return 0;
}

int run_inspect(const InspectArgs& args) {
  const auto model = pvedge::load_model(args.model);  // throws on corruption
  std::cout << "status:     valid\n";
  std::cout << "n_features: " << model.n_features << "\n";
  std::cout << "n_trees:    " << model.tree_count() << "\n";
  std::cout << "bias:       " << pvedge::format_double(model.bias) << "\n";
  std::cout << "nodes:      ";
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    std::cout << (k ? "," : "") << model.trees[k].node_count();
  }
  std::cout << "\n";
  if (!args.json.empty()) {
    pvedge::save_model_json(model, args.json);
    std::cout << "json:       " << args.json << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PV-inverter power forecasting and droop control toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit an LSBoost model on smart-meter data");
  train->add_option("--data", train_args.data, "smart-meter CSV")->required();
  train->add_option("--schema", train_args.schema, "schema JSON")->required();
  train->add_option("--target", train_args.target, "forecast target")
      ->required()
      ->check(CLI::IsMember({"active", "reactive"}));
  train->add_option("--out", train_args.out, "output model file")->required();
  train->add_option("--config", train_args.config_file, "key=value training config file");
  train->add_option("--trees", train_args.config.n_trees, "boosting rounds");
  train->add_option("--learn-rate", train_args.config.learn_rate, "shrinkage in (0,1]");
  train->add_option("--max-depth", train_args.config.max_depth, "tree depth cap");
  train->add_option("--min-leaf", train_args.config.min_leaf, "min samples per leaf");
  train->add_option("--seed", train_args.config.seed, "subsampling seed hook");
  train->add_option("--train-fraction", train_args.train_fraction,
                    "chronological train share");
  train->add_option("--max-gap", train_args.max_gap, "imputation gap cap (intervals)");
  train->add_option("--log", train_args.log, "training log path (default MODEL.log)");
  train->add_option("--report", train_args.report, "write test-split report CSV");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "run a model over a feature CSV");
  predict->add_option("--model", predict_args.model, "model file")->required();
  predict->add_option("--data", predict_args.data, "feature CSV")->required();
  predict->add_option("--out", predict_args.out, "prediction CSV")->required();
  predict->add_option("--schema", predict_args.schema,
                      "treat --data as smart-meter CSV with this schema");

  DroopArgs droop_args;
  auto* droop = app.add_subcommand("droop", "compute V-Q droop setpoints");
  droop->add_option("--params", droop_args.params, "inverter parameter CSV")->required();
  droop->add_option("--voltages", droop_args.voltages,
                    "comma-separated measured voltages, one per inverter")
      ->required();
  droop->add_option("--csv", droop_args.csv, "also write setpoints CSV");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "parity-check two prediction streams");
  compare->add_option("--ref", compare_args.ref, "reference prediction CSV")->required();
  compare->add_option("--cand", compare_args.cand, "candidate prediction CSV")->required();
  compare->add_option("--capacity", compare_args.capacity, "inverter capacity")
      ->required();
  compare->add_option("--threshold", compare_args.threshold,
                      "max RMSE for success (default 1e-6)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "single-sample inference latency");
  bench->add_option("--model", bench_args.model, "model file")->required();
  bench->add_option("--data", bench_args.data, "feature CSV")->required();
  bench->add_option("--reps", bench_args.reps, "full passes over the input");
  bench->add_option("--schema", bench_args.schema,
                    "treat --data as smart-meter CSV with this schema");

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "dump and validate a model file");
  inspect->add_option("--model", inspect_args.model, "model file")->required();
  inspect->add_option("--json", inspect_args.json, "write JSON mirror here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      if (!train_args.config_file.empty()) {
        apply_config_file(train_args.config_file, *train, train_args.config);
      }
      return run_train(train_args);
    }
    if (predict->parsed()) return run_predict(predict_args);
    if (droop->parsed()) return run_droop(droop_args);
    if (compare->parsed()) return run_compare(compare_args);
    if (bench->parsed()) return run_bench(bench_args);
    if (inspect->parsed()) return run_inspect(inspect_args);
  } catch (const pvedge::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pvedge::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const pvedge::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
