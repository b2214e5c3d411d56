#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "pvedge/dataio.hpp"
#include "pvedge/textio.hpp"
#include "pvedge/errors.hpp"
#include "pvedge/synth.hpp"
#include "support/oracles.hpp"

using pvedge::Dataset;
using pvedge::Schema;
namespace ts = pvedge::testsupport;

namespace {

Schema tiny_schema() {
  Schema s;
  s.feature_columns = {"va", "ia"};
  s.capacity = 25.0;
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

bool same_values(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const bool both_nan = std::isnan(a(i, j)) && std::isnan(b(i, j));
      if (!both_nan && a(i, j) != b(i, j)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("well-formed file loads, sorts, and derives the interval index") {
  ts::TempDir dir;
  const auto path = dir.file("data.csv");
  write_file(path,
             "timestamp,va,ia,p,q\n"
             "2024-05-01T00:30:00,221,3,1.0,0.1\n"
             "2024-05-01T00:00:00,220,1,0.0,0.0\n"  // out of order on purpose
             "2024-05-01T00:15:00,222,2,0.5,\n"
             "2024-05-01T00:45:00,219,,1.5,0.3\n");

  Schema schema = tiny_schema();
  schema.feature_columns.push_back(pvedge::kIntervalIndexColumn);
  const auto data = pvedge::load_csv(path, schema);
  REQUIRE(data.rows() == 4);
  for (std::size_t i = 1; i < data.rows(); ++i) {
    CHECK(data.timestamps[i] > data.timestamps[i - 1]);
  }
  CHECK(data.values(0, data.column_index("va")) == 220.0);
  CHECK(data.values(1, data.column_index("va")) == 222.0);
  CHECK(std::isnan(data.values(1, data.column_index("q"))));
  CHECK(std::isnan(data.values(3, data.column_index("ia"))));
  CHECK(data.values(2, data.column_index(pvedge::kIntervalIndexColumn)) == 2.0);

  const auto rec = data.record(3);
  CHECK(rec.va == 219.0);
  CHECK(std::isnan(rec.ia));
  CHECK(rec.p == 1.5);
}

TEST_CASE("load errors carry line numbers and column names") {
  ts::TempDir dir;
  const auto path = dir.file("data.csv");
  Schema schema = tiny_schema();

  SUBCASE("duplicate timestamp") {
    write_file(path,
               "timestamp,va,ia,p,q\n"
               "2024-05-01T00:00:00,220,1,0,0\n"
               "2024-05-01T00:00:00,221,2,1,0\n");
    CHECK_THROWS_WITH_AS(pvedge::load_csv(path, schema),
                         doctest::Contains("duplicate timestamp"),
                         pvedge::DataError);
  }
  SUBCASE("missing mandatory column") {
    write_file(path, "timestamp,va,p,q\n2024-05-01T00:00:00,220,0,0\n");
    CHECK_THROWS_WITH_AS(pvedge::load_csv(path, schema), doctest::Contains("ia"),
                         pvedge::DataError);
  }
  SUBCASE("unparseable cell names its line") {
    write_file(path,
               "timestamp,va,ia,p,q\n"
               "2024-05-01T00:00:00,220,1,0,0\n"
               "2024-05-01T00:15:00,oops,1,0,0\n");
    CHECK_THROWS_WITH_AS(pvedge::load_csv(path, schema), doctest::Contains("line 3"),
                         pvedge::DataError);
  }
  SUBCASE("bad timestamp names its line") {
    write_file(path, "timestamp,va,ia,p,q\nyesterday,220,1,0,0\n");
    CHECK_THROWS_WITH_AS(pvedge::load_csv(path, schema), doctest::Contains("line 2"),
                         pvedge::DataError);
  }
  SUBCASE("missing file is a config error") {
    CHECK_THROWS_AS(pvedge::load_csv(dir.file("nope.csv"), schema),
                    pvedge::ConfigError);
  }
}

TEST_CASE("synthetic month: 2880 rows, strictly increasing timestamps") {
  ts::TempDir dir;
  pvedge::SynthConfig config;
  config.days = 30;
  const auto path = dir.file("month.csv");
  CHECK(pvedge::write_synthetic_csv(config, path) == 2880);

  const auto data = pvedge::load_csv(path, Schema::smart_meter_default(25.0));
  REQUIRE(data.rows() == 2880);
  for (std::size_t i = 1; i < data.rows(); ++i) {
    CHECK(data.timestamps[i] > data.timestamps[i - 1]);
    CHECK(data.timestamps[i] - data.timestamps[i - 1] == 900);
  }
}

TEST_CASE("the generator is deterministic for a fixed seed") {
  ts::TempDir dir;
  pvedge::SynthConfig config;
  config.days = 2;
  config.seed = 99;
  config.missing_fraction = 0.02;
  pvedge::write_synthetic_csv(config, dir.file("a.csv"));
  pvedge::write_synthetic_csv(config, dir.file("b.csv"));
  std::ifstream a(dir.file("a.csv")), b(dir.file("b.csv"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
}

TEST_CASE("clean: bounds, logging, idempotence") {
  ts::TempDir dir;
  const auto path = dir.file("data.csv");
  write_file(path,
             "timestamp,va,ia,p,q\n"
             "2024-05-01T00:00:00,220,1,0,0\n"
             "2024-05-01T00:15:00,999,2,1,0\n"    // impossible voltage
             "2024-05-01T00:30:00,221,3,99,0\n"   // power beyond capacity
             "2024-05-01T00:45:00,222,4,2,0.5\n");
  const auto data = pvedge::load_csv(path, tiny_schema());
  const auto rules = pvedge::CleanRules::defaults(25.0);

  const auto result = pvedge::clean(data, rules);
  REQUIRE(result.log.size() == 2);
  CHECK(result.log[0].column == "va");
  CHECK(result.log[0].value == 999.0);
  CHECK(result.log[1].column == "p");
  CHECK(std::isnan(result.data.values(1, result.data.column_index("va"))));
  CHECK(std::isnan(result.data.values(2, result.data.column_index("p"))));

  SUBCASE("all-in-bounds dataset is untouched") {
    const auto again = pvedge::clean(result.data, rules);
    CHECK(again.log.empty());
    CHECK(same_values(again.data.values, result.data.values));
  }
}

TEST_CASE("clean drops rows with nothing left and stays idempotent") {
  ts::TempDir dir;
  const auto path = dir.file("data.csv");
  write_file(path,
             "timestamp,va,ia,p,q\n"
             "2024-05-01T00:00:00,220,1,0,0\n"
             "2024-05-01T00:15:00,,,,\n"
             "2024-05-01T00:30:00,221,3,1,0\n");
  // The all-blank row survives loading but is dropped by clean.
  const auto data = pvedge::load_csv(path, tiny_schema());
  REQUIRE(data.rows() == 3);
  const auto rules = pvedge::CleanRules::defaults(25.0);
  const auto result = pvedge::clean(data, rules);
  CHECK(result.data.rows() == 2);
  REQUIRE(result.log.size() == 1);
  CHECK(result.log[0].row_dropped);
}

TEST_CASE("adversarial corruption: cleaned dataset has zero rule violations") {
  ts::TempDir dir;
  pvedge::SynthConfig config;
  config.days = 5;
  config.corrupt_fraction = 0.05;
  config.seed = 9;
  const auto path = dir.file("dirty.csv");
  pvedge::write_synthetic_csv(config, path);

  const auto schema = Schema::smart_meter_default(config.capacity_kva);
  const auto data = pvedge::load_csv(path, schema);
  const auto rules = pvedge::CleanRules::defaults(config.capacity_kva);
  const auto result = pvedge::clean(data, rules);
  CHECK(!result.log.empty());

  for (const auto& [column, bounds] : rules.bounds) {
    if (!result.data.has_column(column)) continue;
    const auto col = result.data.values.col(result.data.column_index(column));
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::isnan(col[i])) continue;
      CHECK(col[i] >= bounds.lo);
      CHECK(col[i] <= bounds.hi);
    }
  }
}

TEST_CASE("impute fills short interior gaps only") {
  ts::TempDir dir;
  const auto path = dir.file("data.csv");
  std::string text = "timestamp,va,ia,p,q\n";
  // va: 10, gap, 12           -> filled with 11
  // ia: leading gap           -> stays missing
  // p: gap of 5 > max_gap 4   -> stays missing
  const char* rows[] = {
      "2024-05-01T00:00:00,10,,1,0",  "2024-05-01T00:15:00,,2,,0",
      "2024-05-01T00:30:00,12,3,,0",  "2024-05-01T00:45:00,13,4,,0",
      "2024-05-01T01:00:00,14,5,,0",  "2024-05-01T01:15:00,15,6,,0",
      "2024-05-01T01:30:00,16,7,7,0",
  };
  for (const auto* row : rows) text += std::string(row) + "\n";
  write_file(path, text);

  const auto data = pvedge::load_csv(path, tiny_schema());
  const auto filled = pvedge::impute(data, 4);

  CHECK(filled.values(1, filled.column_index("va")) == 11.0);
  CHECK(std::isnan(filled.values(0, filled.column_index("ia"))));
  for (int i = 1; i <= 5; ++i) {
    CHECK(std::isnan(filled.values(i, filled.column_index("p"))));
  }
  // Observed cells never change.
  CHECK(filled.values(0, filled.column_index("va")) == 10.0);
  CHECK(filled.values(6, filled.column_index("p")) == 7.0);

  SUBCASE("a gap of exactly max_gap is filled") {
    const auto wide = pvedge::impute(data, 5);
    CHECK(wide.values(3, wide.column_index("p")) ==
          doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("random masking: filled values stay between their flanks") {
  ts::TempDir dir;
  pvedge::SynthConfig config;
  config.days = 4;
  config.missing_fraction = 0.03;
  config.seed = 21;
  const auto path = dir.file("gappy.csv");
  pvedge::write_synthetic_csv(config, path);

  const auto schema = Schema::smart_meter_default(config.capacity_kva);
  const auto data = pvedge::load_csv(path, schema);
  const auto filled = pvedge::impute(data, 4);

  int fills = 0;
  for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const double before = data.values(static_cast<Eigen::Index>(i), c);
      const double after = filled.values(static_cast<Eigen::Index>(i), c);
      if (!std::isnan(before)) {
        CHECK(after == before);
        continue;
      }
      if (std::isnan(after)) continue;
      ++fills;
      // Find the flanking observations in the original column.
      std::size_t lo = i;
      while (std::isnan(data.values(static_cast<Eigen::Index>(lo), c))) --lo;
      std::size_t hi = i;
      while (std::isnan(data.values(static_cast<Eigen::Index>(hi), c))) ++hi;
      const double a = data.values(static_cast<Eigen::Index>(lo), c);
      const double b = data.values(static_cast<Eigen::Index>(hi), c);
      CHECK(after >= std::min(a, b));
      CHECK(after <= std::max(a, b));
    }
  }
  CHECK(fills > 0);
}

TEST_CASE("chronological split ratios and ordering") {
  ts::TempDir dir;
  const auto make = [&](int n) {
    const auto path = dir.file("rows" + std::to_string(n) + ".csv");
    std::string text = "timestamp,va,ia,p,q\n";
    for (int i = 0; i < n; ++i) {
      text += pvedge::format_iso8601(1714521600 + i * 900) + ",220,1,0.5,0\n";
    }
    write_file(path, text);
    return pvedge::load_csv(path, tiny_schema());
  };

  const auto ten = pvedge::split(make(10), 0.8);
  CHECK(ten.train.rows() == 8);
  CHECK(ten.test.rows() == 2);

  const auto five = pvedge::split(make(5), 0.8);
  CHECK(five.train.rows() == 4);
  CHECK(five.test.rows() == 1);

  const auto two = pvedge::split(make(2), 0.8);
  CHECK(two.train.rows() == 1);
  CHECK(two.test.rows() == 1);

  const auto data = make(10);
  const auto parts = pvedge::split(data, 0.8);
  CHECK(parts.train.timestamps.back() < parts.test.timestamps.front());
  CHECK(parts.train.rows() + parts.test.rows() == data.rows());
  CHECK(same_values(parts.train.values, data.values.topRows(8)));
  CHECK(same_values(parts.test.values, data.values.bottomRows(2)));

  CHECK_THROWS_AS(pvedge::split(make(2), 0.0), pvedge::ConfigError);
  ts::TempDir dir2;
  const auto one = dir2.file("one.csv");
  write_file(one, "timestamp,va,ia,p,q\n2024-05-01T00:00:00,220,1,0,0\n");
  CHECK_THROWS_AS(pvedge::split(pvedge::load_csv(one, tiny_schema()), 0.8),
                  pvedge::DataError);
}

TEST_CASE("extraction excludes incomplete rows and target columns") {
  ts::TempDir dir;
  const auto path = dir.file("data.csv");
  write_file(path,
             "timestamp,va,ia,p,q\n"
             "2024-05-01T00:00:00,220,1,0.5,0.1\n"
             "2024-05-01T00:15:00,,2,0.6,0.2\n"    // missing feature
             "2024-05-01T00:30:00,221,3,,0.3\n"    // missing active target
             "2024-05-01T00:45:00,222,4,0.7,0.4\n");
  const auto data = pvedge::load_csv(path, tiny_schema());

  const auto active = pvedge::extract(data, pvedge::Target::active);
  CHECK(active.X.rows() == 2);
  CHECK(active.X.cols() == 2);  // va, ia only; no target leakage
  CHECK(active.source_rows == std::vector<std::size_t>{0, 3});
  CHECK(active.y[0] == 0.5);
  CHECK(active.y[1] == 0.7);

  // The row missing only the active target is usable for the reactive one.
  const auto reactive = pvedge::extract(data, pvedge::Target::reactive);
  CHECK(reactive.X.rows() == 3);
  CHECK(reactive.y[1] == 0.3);

  const auto X = pvedge::feature_matrix(data);
  CHECK(X.rows() == 4);  // predict path keeps incomplete rows
  CHECK(std::isnan(X(1, 0)));
}

TEST_CASE("schema validation rejects leaky or silly configurations") {
  Schema s = tiny_schema();
  s.feature_columns.push_back("p");
  CHECK_THROWS_AS(s.check(), pvedge::ConfigError);

  s = tiny_schema();
  s.capacity = 0.0;
  CHECK_THROWS_AS(s.check(), pvedge::ConfigError);

  s = tiny_schema();
  s.feature_columns = {"va", "va"};
  CHECK_THROWS_AS(s.check(), pvedge::ConfigError);

  s = tiny_schema();
  s.feature_columns.clear();
  CHECK_THROWS_AS(s.check(), pvedge::ConfigError);

  s = tiny_schema();
  s.reactive_target = "p";
  CHECK_THROWS_AS(s.check(), pvedge::ConfigError);
}

TEST_CASE("schema JSON round trip") {
  ts::TempDir dir;
  const auto path = dir.file("schema.json");
  Schema schema = Schema::smart_meter_default(21.0);
  schema.save_json(path);
  const auto loaded = Schema::load_json(path);
  CHECK(loaded.capacity == 21.0);
  CHECK(loaded.feature_columns == schema.feature_columns);
  CHECK(loaded.active_target == "p");
  CHECK_THROWS_AS(Schema::load_json(dir.file("missing.json")), pvedge::ConfigError);
}

TEST_CASE("plain matrix CSV loading") {
  ts::TempDir dir;
  const auto path = dir.file("mat.csv");
  write_file(path, "f1,f2,f3\n1,2,3\n4,,6\n");
  const auto X = pvedge::load_matrix_csv(path);
  REQUIRE(X.rows() == 2);
  REQUIRE(X.cols() == 3);
  CHECK(X(0, 0) == 1.0);
  CHECK(std::isnan(X(1, 1)));

  write_file(path, "f1,f2\n1,2\n3\n");
  CHECK_THROWS_AS(pvedge::load_matrix_csv(path), pvedge::DataError);
}
