#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pvedge {

enum class Target { active, reactive };

/// Derived feature: interval index within the day (0..95 on a 15-minute
/// grid). Synthesized from the timestamps when the CSV has no such column.
inline constexpr const char* kIntervalIndexColumn = "interval_index";

/// Maps CSV columns to roles. Columns not named here are ignored.
struct Schema {
  std::string timestamp_column = "timestamp";
  std::vector<std::string> feature_columns;
  std::string active_target = "p";
  std::string reactive_target = "q";
  double capacity = 0.0;  ///< inverter rating, used by metrics and clean bounds

  /// The usual smart-meter layout: three-phase voltages and currents,
  /// power factor, previous setting points, and the day-interval index.
  static Schema smart_meter_default(double capacity);

  /// JSON with keys: timestamp, capacity, features, target_active,
  /// target_reactive. Throws ConfigError on problems.
  static Schema load_json(const std::string& path);

  void save_json(const std::string& path) const;

  /// Feature list non-empty, targets distinct and not listed as features,
  /// capacity positive. Throws ConfigError.
  void check() const;

  const std::string& target_column(Target t) const {
    return t == Target::active ? active_target : reactive_target;
  }
};

/// One smart-meter row in engineering units; NaN marks missing values.
struct MeasurementRecord {
  std::int64_t timestamp = 0;
  double va = 0, vb = 0, vc = 0;        ///< phase voltages, V
  double ia = 0, ib = 0, ic = 0;        ///< phase currents, A
  double pf = 0;                        ///< power factor
  double p_set_prev = 0;                ///< previous active setting point, kW
  double q_set_prev = 0;                ///< previous reactive setting point, kVar
  double p = 0;                         ///< active power (target), kW
  double q = 0;                         ///< reactive power (target), kVar
  std::vector<std::pair<std::string, double>> extras;
};

/// Immutable, column-major measurement table. Timestamps are strictly
/// increasing; values holds the schema's feature columns followed by the
/// two target columns, NaN where the cell is missing.
struct Dataset {
  std::vector<std::int64_t> timestamps;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  Schema schema;

  std::size_t rows() const { return timestamps.size(); }
  Eigen::Index column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;

  MeasurementRecord record(std::size_t row) const;
};

/// Parses, validates and timestamp-sorts a smart-meter CSV. Blank cells
/// become missing. Throws DataError on unparseable rows (with line
/// numbers), duplicate timestamps, or missing mandatory columns.
Dataset load_csv(const std::string& path, const Schema& schema);

/// Plausibility bounds per column; cells outside become missing.
struct CleanRules {
  struct Bounds {
    double lo;
    double hi;
  };
  std::map<std::string, Bounds> bounds;

  /// voltage in [0, 1.5 x nominal], |pf| <= 1, |p|, |q| and the previous
  /// setting points within +-capacity.
  static CleanRules defaults(double capacity, double nominal_voltage = 220.0);
};

struct CleanAction {
  std::size_t row = 0;  ///< row index in the input dataset
  std::int64_t timestamp = 0;
  std::string column;   ///< empty when the whole row was dropped
  double value = 0.0;   ///< offending value (cell actions only)
  bool row_dropped = false;
};

struct CleanResult {
  Dataset data;
  std::vector<CleanAction> log;
};

/// Applies the bounds, drops rows with no usable cells left, logs every
/// action. Never fails; idempotent.
CleanResult clean(const Dataset& input, const CleanRules& rules);

/// Linearly interpolates interior missing runs of at most max_gap rows per
/// column. Longer runs and runs touching either end stay missing. Filled
/// values are kept within the flanking observations.
Dataset impute(const Dataset& input, int max_gap = 4);

struct SplitResult {
  Dataset train;
  Dataset test;
};

/// Chronological split: first round(train_fraction * n) rows train, rest
/// test, both non-empty. Throws DataError when n < 2.
SplitResult split(const Dataset& input, double train_fraction = 0.8);

/// Complete-case design matrix for one target: rows missing any feature or
/// the selected target are excluded.
struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::size_t> source_rows;  ///< dataset rows that were kept
};

DesignMatrix extract(const Dataset& data, Target target);

/// Feature columns for every row (missing cells stay NaN) — the predict
/// path, which must emit one output per input row.
Eigen::MatrixXd feature_matrix(const Dataset& data);

/// Plain numeric matrix CSV: header row, then one row of doubles per line,
/// blank cells NaN. Used by predict/bench when no schema is given.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

}  // namespace pvedge
