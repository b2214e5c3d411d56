#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "pvedge/ensemble.hpp"

namespace pvedge {

/// Single-sample inference latency summary. Timings cover pure model
/// evaluation only — no feature I/O, no batching — on a monotonic clock.
struct BenchReport {
  std::size_t samples = 0;  ///< timed predictions
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  int repetitions = 0;  ///< full passes over the input rows
  int warmup = 0;       ///< untimed predictions before measuring
  double checksum = 0.0;  ///< sum of all outputs; keeps the calls alive
};

/// Passes needed to reach at least min_total timed predictions.
int default_repetitions(Eigen::Index rows, std::size_t min_total = 1000);

/// Times predict_ensemble once per row, repetitions passes, single thread.
BenchReport bench_model(const GBTEnsemble& model, const Eigen::MatrixXd& X,
                        int repetitions, int warmup = 100);

std::string bench_text(const BenchReport& report);

}  // namespace pvedge
