#include "pvedge/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "pvedge/errors.hpp"
#include "pvedge/textio.hpp"

namespace pvedge {

namespace {

double percentile_us(std::vector<double>& sorted_us, double q) {
  // Nearest-rank on the sorted sample.
  const std::size_t n = sorted_us.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted_us[rank - 1];
}

}  // namespace

int default_repetitions(Eigen::Index rows, std::size_t min_total) {
  if (rows <= 0) return 1;
  const auto n = static_cast<std::size_t>(rows);
  return static_cast<int>((min_total + n - 1) / n);
}

BenchReport bench_model(const GBTEnsemble& model, const Eigen::MatrixXd& X,
                        int repetitions, int warmup) {
  if (repetitions < 1) throw ConfigError("bench: repetitions must be at least 1");
  if (X.rows() < 1) throw DataError("bench: no input rows");

  using clock = std::chrono::steady_clock;
  BenchReport report;
  report.repetitions = repetitions;
  report.warmup = warmup;

  for (int i = 0; i < warmup; ++i) {
    report.checksum += predict_ensemble(model, X.row(i % X.rows()).transpose());
  }

  std::vector<double> us;
  us.reserve(static_cast<std::size_t>(repetitions) *
             static_cast<std::size_t>(X.rows()));
  for (int rep = 0; rep < repetitions; ++rep) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const auto t0 = clock::now();
      const double y = predict_ensemble(model, X.row(i).transpose());
      const auto t1 = clock::now();
      report.checksum += y;
      us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
  }

  report.samples = us.size();
  double total = 0.0;
  for (const double v : us) total += v;
  report.mean_us = total / static_cast<double>(us.size());
  std::sort(us.begin(), us.end());
  report.p50_us = percentile_us(us, 0.50);
  report.p95_us = percentile_us(us, 0.95);
  return report;
}

std::string bench_text(const BenchReport& r) {
  std::string out;
  out += "bench: pure single-sample model evaluation (feature I/O excluded)\n";
  out += "samples:      " + std::to_string(r.samples) + "\n";
  out += "repetitions:  " + std::to_string(r.repetitions) + "\n";
  out += "warmup:       " + std::to_string(r.warmup) + "\n";
  out += "mean_us:      " + format_double(r.mean_us) + "\n";
  out += "p50_us:       " + format_double(r.p50_us) + "\n";
  out += "p95_us:       " + format_double(r.p95_us) + "\n";
  out += "checksum:     " + format_double(r.checksum) + "\n";
  return out;
}

}  // namespace pvedge
