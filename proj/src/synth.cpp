#include "pvedge/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include "pvedge/dataio.hpp"
#include "pvedge/errors.hpp"
#include "pvedge/textio.hpp"

namespace pvedge {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SynthRow {
  std::int64_t ts;
  double va, vb, vc, ia, ib, ic, pf, p_set_prev, q_set_prev, p, q;
  double freq, s_set_prev;
};

std::vector<SynthRow> make_rows(const SynthConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double cap = cfg.capacity_kva;
  std::vector<SynthRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.days) * 96);

  double cloud = 0.8;  // slow-moving attenuation, AR(1)
  double prev_p = 0.0;
  double prev_q = 0.0;
  for (int day = 0; day < cfg.days; ++day) {
    const double day_quality = 0.55 + 0.45 * unit(rng);
    for (int interval = 0; interval < 96; ++interval) {
      SynthRow row{};
      row.ts = cfg.start_timestamp + (static_cast<std::int64_t>(day) * 96 + interval) * 900;

      // Daylight bell between 06:00 and 18:00.
      const double hour = interval / 4.0;
      const double sun = (hour > 6.0 && hour < 18.0)
                             ? std::sin(kPi * (hour - 6.0) / 12.0)
                             : 0.0;
      cloud = 0.9 * cloud + 0.1 * (0.5 + 0.5 * unit(rng));
      const double irradiance = sun * day_quality * cloud;

      row.p = std::max(0.0, cap * 0.82 * irradiance + 0.01 * cap * gauss(rng));
      // Volt-var-ish response: inject vars when producing hard.
      row.q = 0.18 * cap * irradiance * std::sin(2.0 * kPi * hour / 24.0) +
              0.005 * cap * gauss(rng);

      const double volt_rise = 4.0 * row.p / cap;
      row.va = 220.0 + volt_rise + 0.8 * gauss(rng);
      row.vb = 220.0 + volt_rise + 0.8 * gauss(rng);
      row.vc = 220.0 + volt_rise + 0.8 * gauss(rng);

      const double s_kva = std::hypot(row.p, row.q);
      const double amps = s_kva * 1000.0 / (3.0 * 220.0);
      row.ia = std::max(0.0, amps + 0.05 * gauss(rng));
      row.ib = std::max(0.0, amps + 0.05 * gauss(rng));
      row.ic = std::max(0.0, amps + 0.05 * gauss(rng));

      row.pf = s_kva > 1e-9 ? row.p / s_kva : 1.0;
      row.pf = std::min(1.0, std::max(0.0, row.pf + 0.002 * gauss(rng)));

      row.p_set_prev = prev_p;
      row.q_set_prev = prev_q;
      row.freq = 50.0 + 0.02 * gauss(rng);
      row.s_set_prev = std::hypot(prev_p, prev_q);

      prev_p = row.p;
      prev_q = row.q;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace

std::size_t write_synthetic_csv(const SynthConfig& cfg, const std::string& path) {
  const auto rows = make_rows(cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write synthetic data file: " + path);

  out << "timestamp,va,vb,vc,ia,ib,ic,pf,p_set_prev,q_set_prev";
  if (cfg.extra_columns) out << ",freq,s_set_prev";
  out << ",p,q\n";

  for (const auto& row : rows) {
    std::vector<double> cells = {row.va, row.vb, row.vc, row.ia, row.ib, row.ic,
                                 row.pf, row.p_set_prev, row.q_set_prev};
    if (cfg.extra_columns) {
      cells.push_back(row.freq);
      cells.push_back(row.s_set_prev);
    }
    cells.push_back(row.p);
    cells.push_back(row.q);

    out << format_iso8601(row.ts);
    for (double cell : cells) {
      out << ',';
      if (unit(rng) < cfg.missing_fraction) continue;  // blank cell
      if (unit(rng) < cfg.corrupt_fraction) {
        // Implausible spike the cleaner is expected to reject.
        cell = 999.0 + 9000.0 * unit(rng);
      }
      out << format_double(cell);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("failed to write synthetic data file: " + path);
  return rows.size();
}

std::string write_synthetic_schema(const SynthConfig& cfg, const std::string& path) {
  Schema schema = Schema::smart_meter_default(cfg.capacity_kva);
  if (cfg.extra_columns) {
    schema.feature_columns.push_back("freq");
    schema.feature_columns.push_back("s_set_prev");
  }
  schema.save_json(path);
  return path;
}

}  // namespace pvedge
