#include "pvedge/droop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pvedge/csv.hpp"
#include "pvedge/errors.hpp"
#include "pvedge/textio.hpp"

namespace pvedge {

void validate(const DroopParams& p) {
  const auto fail = [](const std::string& why) { throw ConfigError("droop params: " + why); };
  for (const double v : {p.s_rate, p.q_min, p.q_max, p.u_min, p.u_max}) {
    if (!std::isfinite(v)) fail("all parameters must be finite");
  }
  if (!(p.s_rate > 0.0)) fail("s_rate must be positive");
  if (!(p.q_min < p.q_max)) fail("q_min must be below q_max");
  if (!(p.u_min < p.u_max)) fail("u_min must be below u_max (degenerate voltage band)");
  if (std::max(std::abs(p.q_min), std::abs(p.q_max)) > p.s_rate) {
    fail("reactive limits exceed s_rate (|q| <= s_rate required)");
  }
}

double droop_gain(const DroopParams& p) {
  validate(p);
  return (p.q_max - p.q_min) / (p.u_max - p.u_min);
}

Setpoint droop_setpoints(const DroopParams& p, double u_meas) {
  validate(p);
  if (!std::isfinite(u_meas)) {
    throw ConfigError("droop: measured voltage must be finite");
  }
  Setpoint s;
  s.k_q = (p.q_max - p.q_min) / (p.u_max - p.u_min);
  s.q_ref = std::clamp(p.q_min + s.k_q * (p.u_max - u_meas), p.q_min, p.q_max);
  // |q_ref| <= s_rate by the validated capacity bound, so the radicand
  // cannot go negative; the final clamp only swallows rounding dust.
  s.p_ref = std::sqrt(p.s_rate * p.s_rate - s.q_ref * s.q_ref);
  s.p_ref = std::clamp(s.p_ref, 0.0, p.s_rate);
  return s;
}

PowerFlow power_flow_exact(const LineModel& line) {
  if (!(line.z > 0.0)) throw ConfigError("power flow: impedance must be positive");
  const double transfer = line.u_g * line.u / line.z;
  const double radial = transfer * std::cos(line.delta) - line.u_g * line.u_g / line.z;
  const double tangential = transfer * std::sin(line.delta);
  PowerFlow out;
  out.p = radial * std::cos(line.theta) + tangential * std::sin(line.theta);
  out.q = radial * std::sin(line.theta) - tangential * std::cos(line.theta);
  return out;
}

PowerFlow power_flow_approx(const LineModel& line) {
  if (!(line.x > 0.0)) throw ConfigError("power flow: reactance must be positive");
  PowerFlow out;
  out.p = line.u_g * line.u / line.x * line.delta;
  out.q = line.u_g * (line.u - line.u_g) / line.x;
  return out;
}

std::vector<InverterParams> load_droop_params_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open droop parameter file: " + path);
  CsvReader reader(in);

  CsvRecord header;
  if (!reader.next(header)) {
    throw DataError("droop parameter file is empty: " + path);
  }
  const std::vector<std::string> expected = {"id",    "s_rate", "q_min",
                                             "q_max", "u_min",  "u_max"};
  if (header.fields.size() != expected.size()) {
    throw DataError(path + ": expected header id,s_rate,q_min,q_max,u_min,u_max");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (trim(header.fields[i]) != expected[i]) {
      throw DataError(path + ": expected header column '" + expected[i] +
                      "', got '" + header.fields[i] + "'");
    }
  }

  std::vector<InverterParams> out;
  CsvRecord record;
  while (reader.next(record)) {
    if (record.fields.size() != expected.size()) {
      throw DataError(path + ":" + std::to_string(record.line) +
                      ": expected 6 fields, got " +
                      std::to_string(record.fields.size()));
    }
    InverterParams inv;
    inv.id = std::string(trim(record.fields[0]));
    double* slots[5] = {&inv.params.s_rate, &inv.params.q_min, &inv.params.q_max,
                        &inv.params.u_min, &inv.params.u_max};
    for (std::size_t i = 0; i < 5; ++i) {
      const auto value = parse_double(record.fields[i + 1]);
      if (!value) {
        throw DataError(path + ":" + std::to_string(record.line) + ": field '" +
                        expected[i + 1] + "' is not a number");
      }
      *slots[i] = *value;
    }
    try {
      validate(inv.params);
    } catch (const ConfigError& e) {
      throw ConfigError("inverter '" + inv.id + "': " + e.what());
    }
    out.push_back(std::move(inv));
  }
  if (out.empty()) {
    throw DataError("droop parameter file has no inverter rows: " + path);
  }
  return out;
}

}  // namespace pvedge
