#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pvedge/dataio.hpp"
#include "pvedge/ensemble.hpp"
#include "pvedge/metrics.hpp"
#include "pvedge/model_io.hpp"
#include "pvedge/synth.hpp"
#include "pvedge/textio.hpp"
#include "support/oracles.hpp"

namespace ts = pvedge::testsupport;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

std::string cli_path() {
  const char* path = std::getenv("PVEDGE_CLI");
  REQUIRE_MESSAGE(path != nullptr, "PVEDGE_CLI must point at the built binary");
  return path;
}

CmdResult run_cli(const std::string& args) {
  const std::string command = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult result;
  std::array<char, 512> buf;
  while (fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One shared workspace: synthetic data, schema, and a trained model.
struct Workspace {
  ts::TempDir dir;
  std::string data, schema, model;

  Workspace() {
    pvedge::SynthConfig config;
    config.days = 6;
    config.seed = 5;
    data = dir.file("data.csv");
    schema = dir.file("schema.json");
    model = dir.file("model.gbtm");
    pvedge::write_synthetic_csv(config, data);
    pvedge::write_synthetic_schema(config, schema);
    const auto result = run_cli("train --data " + data + " --schema " + schema +
                                " --target active --trees 12 --out " + model);
    REQUIRE(result.exit_code == 0);
  }
};

Workspace& workspace() {
  static Workspace ws;
  return ws;
}

}  // namespace

TEST_CASE("train writes model, log, and a finite test-split report") {
  auto& ws = workspace();
  CHECK(read_file(ws.model).substr(0, 4) == "GBTM");

  const auto log = read_file(ws.model + ".log");
  CHECK(log.find("round rmse") == 0);
  CHECK(std::count(log.begin(), log.end(), '\n') == 13);  // header + 12 rounds

  const auto result = run_cli("train --data " + ws.data + " --schema " + ws.schema +
                              " --target active --trees 12 --out " +
                              ws.dir.file("again.gbtm"));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("r2:") != std::string::npos);
  // Byte-identical across runs.
  CHECK(read_file(ws.dir.file("again.gbtm")) == read_file(ws.model));
}

TEST_CASE("full synthetic month trains end to end with defaults") {
  auto& ws = workspace();
  const auto data = ws.dir.file("month.csv");
  const auto schema = ws.dir.file("month_schema.json");
  pvedge::SynthConfig config;
  config.days = 30;
  config.seed = 2;
  config.missing_fraction = 0.01;
  pvedge::write_synthetic_csv(config, data);
  pvedge::write_synthetic_schema(config, schema);

  const auto model = ws.dir.file("month.gbtm");
  const auto report = ws.dir.file("month_report.csv");
  const auto result = run_cli("train --data " + data + " --schema " + schema +
                              " --target reactive --out " + model + " --report " +
                              report);
  CHECK(result.exit_code == 0);

  // The report line carries a finite r2 on the chronological test split.
  const auto csv = read_file(report);
  CHECK(csv.find("n,capacity,r2,") == 0);
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::stringstream fields(row);
  std::string n, capacity, r2;
  std::getline(fields, n, ',');
  std::getline(fields, capacity, ',');
  std::getline(fields, r2, ',');
  REQUIRE(!r2.empty());
  CHECK(std::isfinite(std::stod(r2)));
  CHECK(pvedge::load_model(model).tree_count() == 100);
}

TEST_CASE("train exit codes: missing schema file names it") {
  auto& ws = workspace();
  const auto result =
      run_cli("train --data " + ws.data + " --schema /nonexistent/schema.json" +
              " --target active --out " + ws.dir.file("x.gbtm"));
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("/nonexistent/schema.json") != std::string::npos);

  const auto usage = run_cli("train --data " + ws.data);
  CHECK(usage.exit_code == 2);
}

TEST_CASE("active and reactive targets give distinct models") {
  auto& ws = workspace();
  const auto reactive_model = ws.dir.file("reactive.gbtm");
  const auto result = run_cli("train --data " + ws.data + " --schema " + ws.schema +
                              " --target reactive --trees 12 --out " + reactive_model);
  CHECK(result.exit_code == 0);
  CHECK(read_file(reactive_model) != read_file(ws.model));
}

TEST_CASE("config file feeds the trainer, flags win over it") {
  auto& ws = workspace();
  const auto config = ws.dir.file("train.ini");
  {
    std::ofstream out(config);
    out << "trees=3\nmax-depth=2\n";
  }
  const auto from_file = ws.dir.file("cfg.gbtm");
  auto result = run_cli("train --data " + ws.data + " --schema " + ws.schema +
                        " --target active --config " + config + " --out " + from_file);
  CHECK(result.exit_code == 0);
  CHECK(pvedge::load_model(from_file).tree_count() == 3);

  const auto overridden = ws.dir.file("cfg2.gbtm");
  result = run_cli("train --data " + ws.data + " --schema " + ws.schema +
                   " --target active --config " + config + " --trees 5 --out " +
                   overridden);
  CHECK(result.exit_code == 0);
  CHECK(pvedge::load_model(overridden).tree_count() == 5);
}

TEST_CASE("predict matches the library row for row") {
  auto& ws = workspace();
  const auto out = ws.dir.file("pred.csv");
  const auto result = run_cli("predict --model " + ws.model + " --data " + ws.data +
                              " --schema " + ws.schema + " --out " + out);
  CHECK(result.exit_code == 0);

  const auto model = pvedge::load_model(ws.model);
  const auto dataset =
      pvedge::load_csv(ws.data, pvedge::Schema::load_json(ws.schema));
  const auto expected =
      pvedge::predict_ensemble_rows(model, pvedge::feature_matrix(dataset));
  const auto got = pvedge::read_prediction_csv(out);
  REQUIRE(got.size() == expected.size());
  for (Eigen::Index i = 0; i < got.size(); ++i) CHECK(got[i] == expected[i]);

  // Determinism at the byte level.
  const auto out2 = ws.dir.file("pred2.csv");
  run_cli("predict --model " + ws.model + " --data " + ws.data + " --schema " +
          ws.schema + " --out " + out2);
  CHECK(read_file(out2) == read_file(out));
}

TEST_CASE("predict on a constant model emits identical rows") {
  auto& ws = workspace();
  pvedge::GBTEnsemble constant;
  constant.n_features = 2;
  constant.bias = 0.0;
  constant.trees = {pvedge::CompactRegressionTree::leaf(4.25)};
  constant.weights = {1.0};
  const auto model_path = ws.dir.file("const.gbtm");
  pvedge::save_model(constant, model_path);

  const auto data = ws.dir.file("five.csv");
  {
    std::ofstream out(data);
    out << "f1,f2\n1,2\n3,4\n5,6\n7,8\n9,10\n";
  }
  const auto out = ws.dir.file("const_pred.csv");
  const auto result =
      run_cli("predict --model " + model_path + " --data " + data + " --out " + out);
  CHECK(result.exit_code == 0);
  const auto got = pvedge::read_prediction_csv(out);
  REQUIRE(got.size() == 5);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(got[i] == 4.25);
}

TEST_CASE("predict rejects a feature-count mismatch with exit 3") {
  auto& ws = workspace();
  const auto data = ws.dir.file("narrow.csv");
  {
    std::ofstream out(data);
    out << "a,b,c\n1,2,3\n";
  }
  const auto result = run_cli("predict --model " + ws.model + " --data " + data +
                              " --out " + ws.dir.file("no.csv"));
  CHECK(result.exit_code == 3);
}

TEST_CASE("droop reproduces the reference deployment output") {
  auto& ws = workspace();
  const auto params = ws.dir.file("droop.csv");
  {
    std::ofstream out(params);
    out << "id,s_rate,q_min,q_max,u_min,u_max\n";
    const double s_rates[4] = {15.0, 25.0, 21.0, 16.0};
    for (int i = 0; i < 4; ++i) {
      const double q = s_rates[i] * std::sin(std::acos(0.85));
      out << "inv" << (i + 1) << ',' << pvedge::format_double(s_rates[i]) << ','
          << pvedge::format_double(-q) << ',' << pvedge::format_double(q)
          << ",198,242\n";
    }
  }
  // Voltages recovered by inverting the droop law for the reference rows.
  const double q_setting[4] = {0.0, -12.0, -9.5, 6.12983};
  std::string voltages;
  const double s_rates[4] = {15.0, 25.0, 21.0, 16.0};
  for (int i = 0; i < 4; ++i) {
    const double q_lim = s_rates[i] * std::sin(std::acos(0.85));
    const double k = 2.0 * q_lim / 44.0;
    const double u = 242.0 - (q_setting[i] + q_lim) / k;
    if (i) voltages += ',';
    voltages += pvedge::format_double(u);
  }

  const auto csv_out = ws.dir.file("setpoints.csv");
  const auto result = run_cli("droop --params " + params + " --voltages " + voltages +
                              " --csv " + csv_out);
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("Pref:") != std::string::npos);
  CHECK(result.output.find("Qref:") != std::string::npos);
  CHECK(result.output.find("15.00000") != std::string::npos);
  CHECK(result.output.find("21.93171") != std::string::npos);
  CHECK(result.output.find("-12.00000") != std::string::npos);
  CHECK(result.output.find("18.72832") != std::string::npos);
  CHECK(result.output.find("-9.50000") != std::string::npos);
  CHECK(result.output.find("14.77921") != std::string::npos);
  CHECK(result.output.find("6.1298") != std::string::npos);

  const auto table = read_file(csv_out);
  CHECK(table.find("id,p_ref,q_ref,k_q") == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);

  SUBCASE("voltage at the ceiling prints q_min") {
    const auto single = ws.dir.file("single.csv");
    std::ofstream out(single);
    out << "id,s_rate,q_min,q_max,u_min,u_max\ninv1,20,-8,8,198,242\n";
    out.close();
    const auto r = run_cli("droop --params " + single + " --voltages 242");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("-8.00000") != std::string::npos);
  }
  SUBCASE("capacity violation exits nonzero naming the inverter") {
    const auto bad = ws.dir.file("bad.csv");
    std::ofstream out(bad);
    out << "id,s_rate,q_min,q_max,u_min,u_max\ninv9,10,-12,12,198,242\n";
    out.close();
    const auto r = run_cli("droop --params " + bad + " --voltages 220");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("inv9") != std::string::npos);
  }
  SUBCASE("voltage count mismatch is a data-shape error") {
    const auto r = run_cli("droop --params " + params + " --voltages 220,221");
    CHECK(r.exit_code == 3);
  }
}

TEST_CASE("compare: parity thresholds and exit codes") {
  auto& ws = workspace();
  const auto ref = ws.dir.file("ref.csv");
  Eigen::VectorXd values(400);
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> power(-20.0, 20.0);
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = power(rng);
  pvedge::write_prediction_csv(values, ref);

  SUBCASE("file against itself passes with a zero report") {
    const auto r = run_cli("compare --ref " + ref + " --cand " + ref +
                           " --capacity 25");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("rmse:          0\n") != std::string::npos);
    CHECK(r.output.find("PARITY OK") != std::string::npos);
  }
  SUBCASE("six-decimal rounding stays under the default threshold") {
    Eigen::VectorXd rounded = values;
    for (Eigen::Index i = 0; i < rounded.size(); ++i) {
      rounded[i] = std::round(rounded[i] * 1e6) / 1e6;
    }
    const auto cand = ws.dir.file("cand6.csv");
    pvedge::write_prediction_csv(rounded, cand);
    const auto r = run_cli("compare --ref " + ref + " --cand " + cand +
                           " --capacity 25");
    CHECK(r.exit_code == 0);
  }
  SUBCASE("a single perturbed value breaches the threshold") {
    Eigen::VectorXd bent = values;
    bent[7] += 0.01;
    const auto cand = ws.dir.file("bent.csv");
    pvedge::write_prediction_csv(bent, cand);
    const auto r = run_cli("compare --ref " + ref + " --cand " + cand +
                           " --capacity 25");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("PARITY FAILED") != std::string::npos);
  }
  SUBCASE("length mismatch exits 3") {
    const auto cand = ws.dir.file("short.csv");
    pvedge::write_prediction_csv(values.head(10), cand);
    const auto r = run_cli("compare --ref " + ref + " --cand " + cand +
                           " --capacity 25");
    CHECK(r.exit_code == 3);
  }
}

TEST_CASE("bench runs and reports a parseable mean") {
  auto& ws = workspace();
  const auto result = run_cli("bench --model " + ws.model + " --data " + ws.data +
                              " --schema " + ws.schema + " --reps 1");
  CHECK(result.exit_code == 0);
  const auto pos = result.output.find("mean_us:");
  REQUIRE(pos != std::string::npos);
  const double mean = std::stod(result.output.substr(pos + 8));
  CHECK(mean > 0.0);
  CHECK(result.output.find("samples:") != std::string::npos);
}

TEST_CASE("inspect echoes the model fields and validates") {
  auto& ws = workspace();
  const auto json = ws.dir.file("model.json");
  const auto result = run_cli("inspect --model " + ws.model + " --json " + json);
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("status:     valid") != std::string::npos);
  CHECK(result.output.find("n_features: 10") != std::string::npos);
  CHECK(result.output.find("n_trees:    12") != std::string::npos);

  SUBCASE("JSON mirror is predict-equivalent through the CLI") {
    const auto out_bin = ws.dir.file("from_bin.csv");
    const auto out_json = ws.dir.file("from_json.csv");
    run_cli("predict --model " + ws.model + " --data " + ws.data + " --schema " +
            ws.schema + " --out " + out_bin);
    run_cli("predict --model " + json + " --data " + ws.data + " --schema " +
            ws.schema + " --out " + out_json);
    CHECK(read_file(out_bin) == read_file(out_json));
  }
  SUBCASE("truncated model exits 4") {
    const auto broken = ws.dir.file("broken.gbtm");
    const auto bytes = read_file(ws.model);
    std::ofstream out(broken, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    const auto r = run_cli("inspect --model " + broken);
    CHECK(r.exit_code == 4);
  }
}
