#include "pvedge/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "pvedge/csv.hpp"
#include "pvedge/errors.hpp"
#include "pvedge/textio.hpp"

namespace pvedge {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double interval_index_of(std::int64_t ts) {
  std::int64_t seconds = ts % 86400;
  if (seconds < 0) seconds += 86400;
  const std::int64_t interval = seconds / 900;  // whole 15-minute slots
  return static_cast<double>(interval);
}

}  // namespace

Schema Schema::smart_meter_default(double capacity) {
  Schema s;
  s.feature_columns = {"va", "vb", "vc", "ia", "ib", "ic",
                       "pf", "p_set_prev", "q_set_prev", kIntervalIndexColumn};
  s.capacity = capacity;
  s.check();
  return s;
}

Schema Schema::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("schema " + path + ": " + e.what());
  }
  Schema s;
  try {
    s.timestamp_column = doc.value("timestamp", "timestamp");
    s.capacity = doc.at("capacity").get<double>();
    s.feature_columns = doc.at("features").get<std::vector<std::string>>();
    s.active_target = doc.value("target_active", "p");
    s.reactive_target = doc.value("target_reactive", "q");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("schema " + path + ": " + e.what());
  }
  try {
    s.check();
  } catch (const ConfigError& e) {
    throw ConfigError("schema " + path + ": " + e.what());
  }
  return s;
}

void Schema::save_json(const std::string& path) const {
  nlohmann::json doc;
  doc["timestamp"] = timestamp_column;
  doc["capacity"] = capacity;
  doc["features"] = feature_columns;
  doc["target_active"] = active_target;
  doc["target_reactive"] = reactive_target;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write schema file: " + path);
  out << doc.dump(2) << '\n';
}

void Schema::check() const {
  if (feature_columns.empty()) {
    throw ConfigError("schema: feature list must not be empty");
  }
  if (active_target.empty() || reactive_target.empty()) {
    throw ConfigError("schema: both target columns must be named");
  }
  if (active_target == reactive_target) {
    throw ConfigError("schema: active and reactive targets must differ");
  }
  std::set<std::string> seen;
  for (const auto& name : feature_columns) {
    if (name == active_target || name == reactive_target) {
      throw ConfigError("schema: target column '" + name +
                        "' must not appear in the feature list");
    }
    if (name == timestamp_column) {
      throw ConfigError("schema: timestamp column cannot be a feature");
    }
    if (!seen.insert(name).second) {
      throw ConfigError("schema: duplicate feature column '" + name + "'");
    }
  }
  if (!(capacity > 0.0)) {
    throw ConfigError("schema: capacity must be positive");
  }
}

Eigen::Index Dataset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw DataError("dataset has no column '" + name + "'");
}

bool Dataset::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

MeasurementRecord Dataset::record(std::size_t row) const {
  MeasurementRecord r;
  r.timestamp = timestamps.at(row);
  const auto get = [&](const char* name) {
    return has_column(name) ? values(static_cast<Eigen::Index>(row), column_index(name))
                            : kNaN;
  };
  r.va = get("va");
  r.vb = get("vb");
  r.vc = get("vc");
  r.ia = get("ia");
  r.ib = get("ib");
  r.ic = get("ic");
  r.pf = get("pf");
  r.p_set_prev = get("p_set_prev");
  r.q_set_prev = get("q_set_prev");
  r.p = get("p");
  r.q = get("q");
  static const std::set<std::string> known = {
      "va", "vb", "vc", "ia", "ib", "ic", "pf", "p_set_prev", "q_set_prev", "p", "q"};
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (!known.count(columns[c])) {
      r.extras.emplace_back(columns[c],
                            values(static_cast<Eigen::Index>(row),
                                   static_cast<Eigen::Index>(c)));
    }
  }
  return r;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  schema.check();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  CsvReader reader(in);

  CsvRecord header;
  if (!reader.next(header)) throw DataError(path + ": empty file");
  std::map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    header_index.emplace(std::string(trim(header.fields[i])), i);
  }

  // Columns stored: declared features (in schema order) plus both targets.
  std::vector<std::string> stored = schema.feature_columns;
  for (const auto& target : {schema.active_target, schema.reactive_target}) {
    if (std::find(stored.begin(), stored.end(), target) == stored.end()) {
      stored.push_back(target);
    }
  }

  if (!header_index.count(schema.timestamp_column)) {
    throw DataError(path + ": missing mandatory column '" +
                    schema.timestamp_column + "'");
  }
  std::vector<std::ptrdiff_t> source_col(stored.size(), -1);  // -1 = derived
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const auto it = header_index.find(stored[i]);
    if (it != header_index.end()) {
      source_col[i] = static_cast<std::ptrdiff_t>(it->second);
    } else if (stored[i] != kIntervalIndexColumn) {
      throw DataError(path + ": missing mandatory column '" + stored[i] + "'");
    }
  }
  const std::size_t ts_col = header_index.at(schema.timestamp_column);

  struct Row {
    std::int64_t ts;
    std::size_t line;
    std::vector<double> cells;
  };
  std::vector<Row> rows;
  std::vector<std::string> problems;

  CsvRecord record;
  while (reader.next(record)) {
    if (record.fields.size() != header.fields.size()) {
      problems.push_back("line " + std::to_string(record.line) + ": expected " +
                         std::to_string(header.fields.size()) + " fields, got " +
                         std::to_string(record.fields.size()));
      continue;
    }
    Row row;
    row.line = record.line;
    const auto ts = parse_iso8601(record.fields[ts_col]);
    if (!ts) {
      problems.push_back("line " + std::to_string(record.line) +
                         ": bad timestamp '" + record.fields[ts_col] + "'");
      continue;
    }
    row.ts = *ts;
    row.cells.resize(stored.size(), kNaN);
    bool bad = false;
    for (std::size_t i = 0; i < stored.size(); ++i) {
      if (source_col[i] < 0) {
        row.cells[i] = interval_index_of(row.ts);
        continue;
      }
      const auto text = trim(record.fields[static_cast<std::size_t>(source_col[i])]);
      if (text.empty()) continue;  // missing cell
      const auto value = parse_double(text);
      if (!value) {
        problems.push_back("line " + std::to_string(record.line) + ": column '" +
                           stored[i] + "' is not a number: '" + std::string(text) +
                           "'");
        bad = true;
        break;
      }
      row.cells[i] = *value;
    }
    if (!bad) rows.push_back(std::move(row));
  }

  if (!problems.empty()) {
    std::string message = path + ": " + std::to_string(problems.size()) +
                          " unparseable row(s):";
    for (std::size_t i = 0; i < problems.size() && i < 5; ++i) {
      message += "\n  " + problems[i];
    }
    if (problems.size() > 5) message += "\n  ...";
    throw DataError(message);
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.ts < b.ts; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].ts == rows[i - 1].ts) {
      throw DataError(path + ":" + std::to_string(rows[i].line) +
                      ": duplicate timestamp " + format_iso8601(rows[i].ts));
    }
  }

  Dataset data;
  data.schema = schema;
  data.columns = std::move(stored);
  data.timestamps.reserve(rows.size());
  data.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(data.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.timestamps.push_back(rows[i].ts);
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
      data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rows[i].cells[c];
    }
  }
  return data;
}

CleanRules CleanRules::defaults(double capacity, double nominal_voltage) {
  CleanRules rules;
  const Bounds voltage{0.0, 1.5 * nominal_voltage};
  rules.bounds["va"] = voltage;
  rules.bounds["vb"] = voltage;
  rules.bounds["vc"] = voltage;
  rules.bounds["pf"] = Bounds{-1.0, 1.0};
  const Bounds power{-capacity, capacity};
  rules.bounds["p"] = power;
  rules.bounds["q"] = power;
  rules.bounds["p_set_prev"] = power;
  rules.bounds["q_set_prev"] = power;
  return rules;
}

CleanResult clean(const Dataset& input, const CleanRules& rules) {
  CleanResult result;
  result.data = input;
  Dataset& data = result.data;
  const Eigen::Index n_cols = data.values.cols();

  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    const auto rule = rules.bounds.find(data.columns[c]);
    if (rule == rules.bounds.end()) continue;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      double& cell = data.values(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(c));
      if (std::isnan(cell)) continue;
      if (cell < rule->second.lo || cell > rule->second.hi || !std::isfinite(cell)) {
        result.log.push_back(CleanAction{i, data.timestamps[i], data.columns[c],
                                         cell, false});
        cell = kNaN;
      }
    }
  }

  // Rows with every cell missing carry no information; drop them.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const bool all_missing =
        data.values.row(static_cast<Eigen::Index>(i)).array().isNaN().all();
    if (all_missing) {
      result.log.push_back(CleanAction{i, data.timestamps[i], "", 0.0, true});
    } else {
      keep.push_back(i);
    }
  }
  if (keep.size() != data.rows()) {
    Eigen::MatrixXd kept(static_cast<Eigen::Index>(keep.size()), n_cols);
    std::vector<std::int64_t> kept_ts;
    kept_ts.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      kept.row(static_cast<Eigen::Index>(i)) =
          data.values.row(static_cast<Eigen::Index>(keep[i]));
      kept_ts.push_back(data.timestamps[keep[i]]);
    }
    data.values = std::move(kept);
    data.timestamps = std::move(kept_ts);
  }
  return result;
}

Dataset impute(const Dataset& input, int max_gap) {
  if (max_gap < 1) throw ConfigError("impute: max_gap must be at least 1");
  Dataset data = input;
  const std::size_t n = data.rows();
  for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
    std::size_t i = 0;
    while (i < n) {
      if (!std::isnan(data.values(static_cast<Eigen::Index>(i), c))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < n && std::isnan(data.values(static_cast<Eigen::Index>(j), c))) ++j;
      // [i, j) is a missing run; fill only interior runs short enough.
      const std::size_t run = j - i;
      if (i > 0 && j < n && run <= static_cast<std::size_t>(max_gap)) {
        const double left = data.values(static_cast<Eigen::Index>(i - 1), c);
        const double right = data.values(static_cast<Eigen::Index>(j), c);
        const double lo = std::min(left, right);
        const double hi = std::max(left, right);
        for (std::size_t k = i; k < j; ++k) {
          const double t = static_cast<double>(k - i + 1) /
                           static_cast<double>(run + 1);
          data.values(static_cast<Eigen::Index>(k), c) =
              std::clamp(std::lerp(left, right, t), lo, hi);
        }
      }
      i = j;
    }
  }
  return data;
}

namespace {

Dataset slice(const Dataset& input, std::size_t start, std::size_t count) {
  Dataset out;
  out.schema = input.schema;
  out.columns = input.columns;
  out.timestamps.assign(input.timestamps.begin() + static_cast<std::ptrdiff_t>(start),
                        input.timestamps.begin() +
                            static_cast<std::ptrdiff_t>(start + count));
  out.values = input.values.middleRows(static_cast<Eigen::Index>(start),
                                       static_cast<Eigen::Index>(count));
  return out;
}

}  // namespace

SplitResult split(const Dataset& input, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train fraction must lie in (0, 1)");
  }
  const std::size_t n = input.rows();
  if (n < 2) throw DataError("split: need at least 2 rows, got " + std::to_string(n));
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  return SplitResult{slice(input, 0, n_train), slice(input, n_train, n - n_train)};
}

DesignMatrix extract(const Dataset& data, Target target) {
  const std::size_t n_features = data.schema.feature_columns.size();
  std::vector<Eigen::Index> feature_cols;
  feature_cols.reserve(n_features);
  for (const auto& name : data.schema.feature_columns) {
    feature_cols.push_back(data.column_index(name));
  }
  const Eigen::Index target_col = data.column_index(data.schema.target_column(target));

  DesignMatrix out;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i);
    bool complete = !std::isnan(data.values(row, target_col));
    for (const auto c : feature_cols) {
      complete = complete && !std::isnan(data.values(row, c));
    }
    if (complete) out.source_rows.push_back(i);
  }
  out.X.resize(static_cast<Eigen::Index>(out.source_rows.size()),
               static_cast<Eigen::Index>(n_features));
  out.y.resize(static_cast<Eigen::Index>(out.source_rows.size()));
  for (std::size_t i = 0; i < out.source_rows.size(); ++i) {
    const Eigen::Index src = static_cast<Eigen::Index>(out.source_rows[i]);
    const Eigen::Index dst = static_cast<Eigen::Index>(i);
    for (std::size_t f = 0; f < n_features; ++f) {
      out.X(dst, static_cast<Eigen::Index>(f)) = data.values(src, feature_cols[f]);
    }
    out.y[dst] = data.values(src, target_col);
  }
  return out;
}

Eigen::MatrixXd feature_matrix(const Dataset& data) {
  const std::size_t n_features = data.schema.feature_columns.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(data.rows()),
                    static_cast<Eigen::Index>(n_features));
  for (std::size_t f = 0; f < n_features; ++f) {
    X.col(static_cast<Eigen::Index>(f)) =
        data.values.col(data.column_index(data.schema.feature_columns[f]));
  }
  return X;
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  CsvReader reader(in);
  CsvRecord header;
  if (!reader.next(header)) throw DataError(path + ": empty file");
  const std::size_t n_cols = header.fields.size();

  std::vector<std::vector<double>> rows;
  CsvRecord record;
  while (reader.next(record)) {
    if (record.fields.size() != n_cols) {
      throw DataError(path + ":" + std::to_string(record.line) + ": expected " +
                      std::to_string(n_cols) + " fields, got " +
                      std::to_string(record.fields.size()));
    }
    std::vector<double> row(n_cols, kNaN);
    for (std::size_t i = 0; i < n_cols; ++i) {
      const auto text = trim(record.fields[i]);
      if (text.empty()) continue;
      const auto value = parse_double(text);
      if (!value) {
        throw DataError(path + ":" + std::to_string(record.line) + ": column " +
                        std::to_string(i + 1) + " is not a number");
      }
      row[i] = *value;
    }
    rows.push_back(std::move(row));
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return X;
}

}  // namespace pvedge
