#pragma once

#include <cstdint>
#include <string>

namespace pvedge {

/// Synthetic smart-meter month: a PV production profile with correlated
/// electrical measurements on the 15-minute grid, schema-compatible with
/// the real (private) field data. Deterministic for a given seed.
struct SynthConfig {
  int days = 30;
  double capacity_kva = 25.0;
  std::uint64_t seed = 1;
  std::int64_t start_timestamp = 1714521600;  ///< 2024-05-01T00:00:00
  double missing_fraction = 0.0;  ///< cells blanked at random
  double corrupt_fraction = 0.0;  ///< cells replaced by implausible values
  bool extra_columns = false;     ///< add freq and s_set_prev (12 features total)
};

/// Writes the CSV (header + days*96 rows) and returns the row count.
std::size_t write_synthetic_csv(const SynthConfig& config, const std::string& path);

/// Schema matching write_synthetic_csv output: the default smart-meter
/// feature set, extended by the two extra columns when enabled.
std::string write_synthetic_schema(const SynthConfig& config, const std::string& path);

}  // namespace pvedge
