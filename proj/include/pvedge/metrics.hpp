#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

namespace pvedge {

/// Evaluation bundle for one prediction stream against a reference.
/// capacity is the inverter rating used to normalize cap_mape_pct; r2 is
/// absent when the reference has zero variance (parity streams may be
/// constant) or fewer than two samples.
struct MetricsReport {
  std::optional<double> r2;
  double cap_mape_pct = 0.0;
  double rmse = 0.0;
  double max_abs_err = 0.0;
  Eigen::Index n = 0;
  double capacity = 0.0;
};

/// 1 - SSE(actual, predicted) / SSE(actual, mean). May be negative.
/// Throws UndefinedVarianceError when actual is constant, DimensionError
/// on length mismatch or n < 2.
double r_squared(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

/// Capacity-normalized root-mean-square error in percent: 0 is a perfect
/// fit, 100 means every error has the magnitude of the full rating.
double capacity_mape(const Eigen::VectorXd& actual,
                     const Eigen::VectorXd& predicted, double capacity);

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Deployment-correctness check between two prediction streams
/// (e.g. reference build vs edge build): cap-MAPE, RMSE, max |diff|.
MetricsReport parity_report(const Eigen::VectorXd& reference,
                            const Eigen::VectorXd& candidate, double capacity);

/// Full forecast-quality report including R^2 on a test split.
MetricsReport evaluate_predictions(const Eigen::VectorXd& actual,
                                   const Eigen::VectorXd& predicted,
                                   double capacity);

std::string report_csv_header();
std::string report_csv_line(const MetricsReport& report);
std::string report_text(const MetricsReport& report);

/// One-column prediction CSV with a header row.
Eigen::VectorXd read_prediction_csv(const std::string& path);
void write_prediction_csv(const Eigen::VectorXd& values, const std::string& path,
                          const std::string& header = "prediction");

}  // namespace pvedge
