#include "pvedge/metrics.hpp"

#include <cmath>
#include <fstream>

#include "pvedge/errors.hpp"
#include "pvedge/textio.hpp"

namespace pvedge {

namespace {

void require_same_length(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw DimensionError("metric inputs differ in length: " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

}  // namespace

double r_squared(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  require_same_length(actual, predicted);
  if (actual.size() < 2) {
    throw DimensionError("r_squared needs at least 2 samples");
  }
  const double mean = actual.mean();
  const double ss_tot = (actual.array() - mean).square().sum();
  if (ss_tot == 0.0) {
    throw UndefinedVarianceError("r_squared undefined: actual values are constant");
  }
  const double ss_res = (actual - predicted).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

double capacity_mape(const Eigen::VectorXd& actual,
                     const Eigen::VectorXd& predicted, double capacity) {
  require_same_length(actual, predicted);
  if (actual.size() < 1) throw DimensionError("capacity_mape needs samples");
  if (!(capacity > 0.0)) {
    throw ConfigError("capacity must be positive, got " + format_double(capacity));
  }
  const double mean_sq =
      ((actual - predicted) / capacity).squaredNorm() / static_cast<double>(actual.size());
  return std::sqrt(mean_sq) * 100.0;
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require_same_length(a, b);
  if (a.size() < 1) throw DimensionError("rmse needs samples");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

MetricsReport parity_report(const Eigen::VectorXd& reference,
                            const Eigen::VectorXd& candidate, double capacity) {
  MetricsReport report;
  report.cap_mape_pct = capacity_mape(reference, candidate, capacity);
  report.rmse = rmse(reference, candidate);
  report.max_abs_err = (reference - candidate).cwiseAbs().maxCoeff();
  report.n = reference.size();
  report.capacity = capacity;
  // Constant reference streams are legitimate here; leave r2 unset then.
  try {
    report.r2 = r_squared(reference, candidate);
  } catch (const DataError&) {
  }
  return report;
}

MetricsReport evaluate_predictions(const Eigen::VectorXd& actual,
                                   const Eigen::VectorXd& predicted,
                                   double capacity) {
  return parity_report(actual, predicted, capacity);
}

std::string report_csv_header() {
  return "n,capacity,r2,cap_mape_pct,rmse,max_abs_err";
}

std::string report_csv_line(const MetricsReport& r) {
  std::string out = std::to_string(r.n) + "," + format_double(r.capacity) + ",";
  out += r.r2 ? format_double(*r.r2) : "";
  out += "," + format_double(r.cap_mape_pct);
  out += "," + format_double(r.rmse);
  out += "," + format_double(r.max_abs_err);
  return out;
}

std::string report_text(const MetricsReport& r) {
  std::string out;
  out += "samples:       " + std::to_string(r.n) + "\n";
  out += "capacity:      " + format_double(r.capacity) + "\n";
  out += "r2:            " + (r.r2 ? format_double(*r.r2) : std::string("n/a")) + "\n";
  out += "cap_mape_pct:  " + format_double(r.cap_mape_pct) + "\n";
  out += "rmse:          " + format_double(r.rmse) + "\n";
  out += "max_abs_err:   " + format_double(r.max_abs_err) + "\n";
  return out;
}

Eigen::VectorXd read_prediction_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prediction file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("prediction file is empty (expected a header row): " + path);
  }
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto value = parse_double(text);
    if (!value) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": not a number: '" + std::string(text) + "'");
    }
    values.push_back(*value);
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

void write_prediction_csv(const Eigen::VectorXd& values, const std::string& path,
                          const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open prediction file for writing: " + path);
  out << header << '\n';
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out << format_double(values[i]) << '\n';
  }
  if (!out) throw ConfigError("failed to write prediction file: " + path);
}

}  // namespace pvedge
