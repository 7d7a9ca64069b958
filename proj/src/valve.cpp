#include "spraysim/valve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "spraysim/errors.hpp"

namespace spraysim {

void ValveParams::validate() const {
  if (!(c_n > 0.0 && c_n <= 1.0)) throw ConfigError("c_n must be in (0,1]");
  if (!(a_n > 0.0)) throw ConfigError("a_n must be > 0");
  if (!(p_n > 0.0)) throw ConfigError("p_n must be > 0");
  if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
  if (!(plunger_tau > 0.0)) throw ConfigError("plunger_tau must be > 0");
}

const char* to_string(PwmMode mode) {
  return mode == PwmMode::Waveform ? "waveform" : "averaged";
}

PwmMode pwm_mode_from_string(std::string_view s) {
  if (s == "waveform") return PwmMode::Waveform;
  if (s == "averaged") return PwmMode::Averaged;
  throw ConfigError("unknown pwm_mode '" + std::string(s) +
                    "' (valid: waveform, averaged)");
}

bool pwm_waveform(const PwmSignal& signal, double t) {
  if (!(signal.frequency_hz > 0.0)) throw ConfigError("pwm frequency must be > 0");
  if (!(signal.duty >= 0.0 && signal.duty <= 100.0))
    throw ConfigError("pwm duty must be in [0,100]");
  const double period = 1.0 / signal.frequency_hz;
  double local = std::fmod(t - signal.phase_s, period);
  if (local < 0.0) local += period;
  return local < signal.duty / 100.0 * period;
}

PlungerState plunger_step(const PlungerState& state, double target, double dt,
                          const ValveParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const double goal = std::clamp(target, 0.0, 1.0);
  const double decay = std::exp(-dt / params.plunger_tau);
  PlungerState next;
  next.x_n = std::clamp(goal + (state.x_n - goal) * decay, 0.0, 1.0);
  next.t = state.t + dt;
  return next;
}

double nozzle_flow(const PlungerState& state, const ValveParams& params) {
  return params.c_n * params.a_n * state.x_n * std::sqrt(2.0 * params.p_n / params.rho);
}

double steady_flow(double duty, const ValveParams& params) {
  PlungerState s;
  s.x_n = std::clamp(duty / 100.0, 0.0, 1.0);
  return nozzle_flow(s, params);
}

ValveBank::ValveBank(int n_nozzles, const ValveParams& params, PwmMode mode,
                     double pwm_frequency_hz)
    : params_(params), mode_(mode), frequency_hz_(pwm_frequency_hz) {
  if (n_nozzles < 1) throw ConfigError("valve bank needs at least one nozzle");
  params_.validate();
  states_.resize(static_cast<std::size_t>(n_nozzles));
  flows_.assign(static_cast<std::size_t>(n_nozzles), 0.0);
}

void ValveBank::step(std::span<const double> duties, double dt) {
  if (static_cast<int>(duties.size()) != size())
    throw std::invalid_argument("duty stream misaligned with nozzle count");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");

  const double q_prev = q_total_;
  double q_now = 0.0;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const double duty = duties[i];
    double target = duty / 100.0;
    if (mode_ == PwmMode::Waveform) {
      PwmSignal sig{frequency_hz_, duty, 0.0};
      target = pwm_waveform(sig, t_) ? duty / 100.0 : 0.0;
    }
    states_[i] = plunger_step(states_[i], target, dt, params_);
    flows_[i] = nozzle_flow(states_[i], params_);
    q_now += flows_[i];
  }
  q_total_ = q_now;
  t_ += dt;
  volume_l_ += 0.5 * (q_prev + q_now) * dt * 1000.0;  // m^3 -> L
}

std::vector<FlowSample> integrate_volume(const std::vector<std::vector<double>>& duty_steps,
                                         double dt, const ValveParams& params,
                                         PwmMode mode, double pwm_frequency_hz) {
  if (duty_steps.empty()) return {};
  const int n = static_cast<int>(duty_steps.front().size());
  ValveBank bank(n, params, mode, pwm_frequency_hz);

  std::vector<FlowSample> samples;
  samples.reserve(duty_steps.size() * static_cast<std::size_t>(n));
  for (const auto& duties : duty_steps) {
    bank.step(duties, dt);
    for (int i = 0; i < n; ++i) {
      FlowSample s;
      s.t = bank.t();
      s.nozzle = i;
      s.duty = duties[static_cast<std::size_t>(i)];
      s.x_n = bank.states()[static_cast<std::size_t>(i)].x_n;
      s.q_n = bank.flows()[static_cast<std::size_t>(i)];
      s.q_total = bank.q_total();
      s.volume_accum_l = bank.volume_l();
      samples.push_back(s);
    }
  }
  return samples;
}

std::vector<FlowSample> integrate_volume(const std::vector<std::vector<NozzleCommand>>& commands,
                                         double dt, const ValveParams& params,
                                         PwmMode mode, double pwm_frequency_hz) {
  std::vector<std::vector<double>> duty_steps;
  duty_steps.reserve(commands.size());
  std::size_t n = commands.empty() ? 0 : commands.front().size();
  for (const auto& step : commands) {
    if (step.size() != n)
      throw std::invalid_argument("command stream misaligned across steps");
    std::vector<double> duties;
    duties.reserve(step.size());
    for (const auto& cmd : step) duties.push_back(cmd.duty);
    duty_steps.push_back(std::move(duties));
  }
  return integrate_volume(duty_steps, dt, params, mode, pwm_frequency_hz);
}

void write_flow_trace_csv(std::ostream& os, const std::vector<FlowSample>& samples) {
  os << "t,nozzle,duty,x_n,q_n,q_total,volume_accum\n";
  char buf[192];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.6f,%d,%.4f,%.9f,%.9e,%.9e,%.9f\n", s.t,
                  s.nozzle, s.duty, s.x_n, s.q_n, s.q_total, s.volume_accum_l);
    os << buf;
  }
}

}  // namespace spraysim
