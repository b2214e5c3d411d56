#pragma once

#include <string>
#include <vector>

namespace pvedge {

/// V-Q droop parameters for one inverter. Units: kVA, kVar, volts.
/// The capacity bound max(|q_min|, |q_max|) <= s_rate keeps the active
/// setpoint real for every clamped q_ref.
struct DroopParams {
  double s_rate = 0.0;   ///< inverter apparent-power rating, kVA
  double q_min = 0.0;    ///< reactive lower limit, kVar
  double q_max = 0.0;    ///< reactive upper limit, kVar
  double u_min = 198.0;  ///< allowable voltage floor, V (0.9 pu of 220 V)
  double u_max = 242.0;  ///< allowable voltage ceiling, V (1.1 pu of 220 V)
};

/// Throws ConfigError describing the first violated parameter constraint.
void validate(const DroopParams& params);

/// Dispatch command for one inverter: active/reactive setpoints plus the
/// droop gain that produced them.
struct Setpoint {
  double p_ref = 0.0;  ///< kW, on the capacity circle: p^2 + q^2 = s_rate^2
  double q_ref = 0.0;  ///< kVar, clamped into [q_min, q_max]
  double k_q = 0.0;    ///< kVar per volt, > 0
};

/// Single-line inverter-to-grid coupling used by the power-flow oracles.
struct LineModel {
  double u_g = 0.0;    ///< grid-side voltage, V
  double u = 0.0;      ///< inverter-side voltage, V
  double z = 0.0;      ///< impedance magnitude |R + jX|, ohm
  double theta = 0.0;  ///< impedance angle, rad
  double delta = 0.0;  ///< power angle, rad
  double x = 0.0;      ///< reactance used by the weak-resistive approximation, ohm
};

struct PowerFlow {
  double p = 0.0;  ///< W
  double q = 0.0;  ///< var
};

/// Droop gain (q_max - q_min) / (u_max - u_min); strictly positive.
double droop_gain(const DroopParams& params);

/// q_ref = clamp(q_min + k_q * (u_max - u_meas), q_min, q_max),
/// p_ref = sqrt(s_rate^2 - q_ref^2). u_meas may lie outside the band;
/// the clamp handles it. Throws ConfigError on invalid params or
/// non-finite u_meas.
Setpoint droop_setpoints(const DroopParams& params, double u_meas);

/// Full line power flow:
///   P = (U_g U / Z cos d - U_g^2 / Z) cos t + U_g U / Z sin d sin t
///   Q = (U_g U / Z cos d - U_g^2 / Z) sin t - U_g U / Z sin d cos t
PowerFlow power_flow_exact(const LineModel& line);

/// Weak-resistive (Z ~ X) small-angle approximation:
///   P = U_g U d / X,  Q = U_g (U - U_g) / X
PowerFlow power_flow_approx(const LineModel& line);

/// One row of a droop parameter file.
struct InverterParams {
  std::string id;
  DroopParams params;
};

/// CSV with header: id,s_rate,q_min,q_max,u_min,u_max. Parameter
/// invariants are validated per inverter; violations name the id.
std::vector<InverterParams> load_droop_params_csv(const std::string& path);

}  // namespace pvedge
