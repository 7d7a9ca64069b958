#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "spraysim/control.hpp"

namespace spraysim {

struct ValveParams {
  double c_n = 0.6;           // discharge coefficient
  double a_n = 1e-5;          // orifice throat area, m^2
  double p_n = 3e5;           // gauge pressure, Pa
  double rho = 1000.0;        // fluid density, kg/m^3
  double plunger_tau = 0.02;  // first-order response time constant, s

  void validate() const;
};

// Waveform mode drives plunger targets from the instantaneous PWM level;
// averaged mode uses duty/100 directly, which is equivalent in the mean and
// much cheaper over long horizons.
enum class PwmMode { Waveform, Averaged };

const char* to_string(PwmMode mode);               // "waveform" | "averaged"
PwmMode pwm_mode_from_string(std::string_view s);  // throws ConfigError

struct PwmSignal {
  double frequency_hz = 10.0;
  double duty = 0.0;    // percent
  double phase_s = 0.0;
};

struct PlungerState {
  double x_n = 0.0;  // normalized plunger position in [0,1]
  double t = 0.0;    // simulation time, s
};

// ON for the first duty% of each period; a period-boundary instant belongs
// to the new period.
bool pwm_waveform(const PwmSignal& signal, double t);

// Exponential relaxation toward target with time constant plunger_tau,
// clamped to [0,1]. The update is exact for constant targets.
PlungerState plunger_step(const PlungerState& state, double target, double dt,
                          const ValveParams& params);

// Average flow rate through an open proportional valve:
// c_n * a_n * x_n * sqrt(2*p_n/rho), in m^3/s.
double nozzle_flow(const PlungerState& state, const ValveParams& params);

// Flow once the plunger has settled at duty/100.
double steady_flow(double duty, const ValveParams& params);

// One nozzle at one instant; q_total and volume_accum_l are bank-wide.
struct FlowSample {
  double t = 0.0;
  int nozzle = 0;
  double duty = 0.0;
  double x_n = 0.0;
  double q_n = 0.0;        // m^3/s
  double q_total = 0.0;    // m^3/s, sum over nozzles at this instant
  double volume_accum_l = 0.0;
};

// Mutable bank of plungers advanced in lockstep; the total-flow sum is a
// barrier per step and dispensed volume is accumulated trapezoidally.
class ValveBank {
 public:
  ValveBank(int n_nozzles, const ValveParams& params, PwmMode mode,
            double pwm_frequency_hz = 10.0);

  void step(std::span<const double> duties, double dt);

  int size() const { return static_cast<int>(states_.size()); }
  double t() const { return t_; }
  double q_total() const { return q_total_; }
  double volume_l() const { return volume_l_; }
  const std::vector<PlungerState>& states() const { return states_; }
  const std::vector<double>& flows() const { return flows_; }

 private:
  ValveParams params_;
  PwmMode mode_;
  double frequency_hz_;
  std::vector<PlungerState> states_;
  std::vector<double> flows_;
  double t_ = 0.0;
  double q_total_ = 0.0;
  double volume_l_ = 0.0;
};

// Runs a duty schedule (one duty row per step, one column per nozzle)
// through a ValveBank and returns one FlowSample per (step, nozzle).
std::vector<FlowSample> integrate_volume(const std::vector<std::vector<double>>& duty_steps,
                                         double dt, const ValveParams& params,
                                         PwmMode mode, double pwm_frequency_hz = 10.0);
std::vector<FlowSample> integrate_volume(const std::vector<std::vector<NozzleCommand>>& commands,
                                         double dt, const ValveParams& params,
                                         PwmMode mode, double pwm_frequency_hz = 10.0);

// CSV trace: t,nozzle,duty,x_n,q_n,q_total,volume_accum
void write_flow_trace_csv(std::ostream& os, const std::vector<FlowSample>& samples);

}  // namespace spraysim
