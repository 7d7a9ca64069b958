#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "spraysim/errors.hpp"
#include "spraysim/rng.hpp"
#include "spraysim/valve.hpp"

using namespace spraysim;

TEST_CASE("valve params validation") {
  ValveParams p;
  CHECK_NOTHROW(p.validate());
  p.c_n = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.c_n = 0.6;
  p.plunger_tau = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("pwm waveform timing") {
  SUBCASE("duty 100 is always on, duty 0 always off") {
    for (double t : {0.0, 0.01, 0.1, 0.73, 5.0}) {
      CHECK(pwm_waveform({10.0, 100.0, 0.0}, t));
      CHECK(!pwm_waveform({10.0, 0.0, 0.0}, t));
    }
  }
  SUBCASE("duty 75 at 10 Hz") {
    const PwmSignal sig{10.0, 75.0, 0.0};
    CHECK(!pwm_waveform(sig, 0.08));      // 0.08 >= 0.075 within the period
    CHECK(pwm_waveform(sig, 0.0749));
    CHECK(pwm_waveform(sig, 0.1));        // boundary belongs to the new period
    CHECK(pwm_waveform(sig, -0.05));      // wraps to 0.05 < 0.075
    CHECK(!pwm_waveform(sig, 0.0751));    // just past the on-window
  }
  SUBCASE("phase shifts the window") {
    const PwmSignal sig{10.0, 50.0, 0.025};
    CHECK(pwm_waveform(sig, 0.03));
    CHECK(!pwm_waveform(sig, 0.08));
  }
}

TEST_CASE("plunger first-order response") {
  const ValveParams params;
  SUBCASE("fixed points") {
    CHECK(plunger_step({0.0, 0.0}, 0.0, 0.05, params).x_n == 0.0);
    CHECK(plunger_step({1.0, 0.0}, 1.0, 0.05, params).x_n == 1.0);
  }
  SUBCASE("one time constant reaches 1 - 1/e") {
    const auto next = plunger_step({0.0, 0.0}, 1.0, params.plunger_tau, params);
    CHECK(next.x_n == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(next.t == params.plunger_tau);
  }
  SUBCASE("closed form holds across many steps") {
    PlungerState s;
    const double dt = 1e-3;
    for (int i = 0; i < 37; ++i) s = plunger_step(s, 0.8, dt, params);
    const double expected = 0.8 * (1.0 - std::exp(-37.0 * dt / params.plunger_tau));
    CHECK(s.x_n == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("settles within 1% after five time constants") {
    PlungerState s;
    const double dt = params.plunger_tau / 20.0;
    for (int i = 0; i < 100; ++i) s = plunger_step(s, 1.0, dt, params);
    CHECK(s.x_n > 0.99);
  }
  SUBCASE("targets clamp to [0,1]") {
    CHECK(plunger_step({0.5, 0.0}, 7.0, 1.0, params).x_n <= 1.0);
    CHECK(plunger_step({0.5, 0.0}, -3.0, 1.0, params).x_n >= 0.0);
  }
  SUBCASE("dt must be positive") {
    CHECK_THROWS_AS(plunger_step({0.0, 0.0}, 1.0, 0.0, params), std::invalid_argument);
  }
}

TEST_CASE("nozzle flow follows the orifice law") {
  ValveParams p;  // c_n 0.6, a_n 1e-5, p_n 3e5, rho 1000
  SUBCASE("closed valve") { CHECK(nozzle_flow({0.0, 0.0}, p) == 0.0); }
  SUBCASE("fully open reference value") {
    // 0.6 * 1e-5 * sqrt(2*3e5/1000) = 0.6e-5 * sqrt(600)
    const double expected = 0.6 * 1e-5 * std::sqrt(600.0);
    CHECK(nozzle_flow({1.0, 0.0}, p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(1.4696938456699067e-4).epsilon(1e-12));
  }
  SUBCASE("linear in plunger position") {
    const double base = nozzle_flow({0.3, 0.0}, p);
    CHECK(nozzle_flow({0.6, 0.0}, p) == doctest::Approx(2.0 * base).epsilon(1e-12));
  }
  SUBCASE("linear in orifice area") {
    const double base = nozzle_flow({1.0, 0.0}, p);
    ValveParams doubled = p;
    doubled.a_n *= 2.0;
    CHECK(nozzle_flow({1.0, 0.0}, doubled) == doctest::Approx(2.0 * base).epsilon(1e-12));
  }
  SUBCASE("square root in pressure") {
    const double base = nozzle_flow({1.0, 0.0}, p);
    ValveParams doubled = p;
    doubled.p_n *= 2.0;
    CHECK(nozzle_flow({1.0, 0.0}, doubled) ==
          doctest::Approx(std::sqrt(2.0) * base).epsilon(1e-12));
  }
}

TEST_CASE("volume integration") {
  const ValveParams params;

  SUBCASE("all-zero duties dispense nothing") {
    std::vector<std::vector<double>> steps(100, std::vector<double>(3, 0.0));
    const auto samples = integrate_volume(steps, 0.01, params, PwmMode::Averaged);
    CHECK(samples.back().volume_accum_l == 0.0);
    CHECK(samples.back().q_total == 0.0);
  }

  SUBCASE("steady full duty matches the closed-form integral") {
    // One nozzle at duty 100 for 60 s from rest:
    // V = k * (T - tau*(1 - exp(-T/tau))), k = steady flow, in liters.
    const double dt = 1e-3;
    const int n = 60000;
    std::vector<std::vector<double>> steps(n, std::vector<double>(1, 100.0));
    const auto samples = integrate_volume(steps, dt, params, PwmMode::Averaged);
    const double T = n * dt;
    const double k = steady_flow(100.0, params);
    const double closed_form =
        k * (T - params.plunger_tau * (1.0 - std::exp(-T / params.plunger_tau))) * 1000.0;
    CHECK(samples.back().volume_accum_l ==
          doctest::Approx(closed_form).epsilon(1e-6));
    // Sanity: close to the quoted 60 s steady-flow figure.
    CHECK(samples.back().volume_accum_l == doctest::Approx(8.818).epsilon(1e-2));
  }

  SUBCASE("total flow is the sum of the nozzle flows at every sample") {
    Rng rng(5);
    std::vector<std::vector<double>> steps;
    for (int i = 0; i < 400; ++i) {
      std::vector<double> duties;
      for (int nz = 0; nz < 4; ++nz)
        duties.push_back(rng.uniform01() < 0.3 ? 0.0 : rng.uniform(75.0, 100.0));
      steps.push_back(duties);
    }
    const auto samples = integrate_volume(steps, 0.01, params, PwmMode::Averaged);
    REQUIRE(samples.size() == 400 * 4);
    for (std::size_t s = 0; s < 400; ++s) {
      double sum = 0.0;
      for (int nz = 0; nz < 4; ++nz) sum += samples[s * 4 + nz].q_n;
      const double q_total = samples[s * 4].q_total;
      CHECK(std::abs(q_total - sum) <= 1e-12 * std::max(1.0, std::abs(q_total)));
    }
  }

  SUBCASE("accumulated volume matches an independent trapezoid pass") {
    Rng rng(6);
    std::vector<std::vector<double>> steps;
    for (int i = 0; i < 500; ++i)
      steps.push_back({rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)});
    const double dt = 0.005;
    const auto samples = integrate_volume(steps, dt, params, PwmMode::Averaged);

    double oracle = 0.0;
    double q_prev = 0.0;  // bank starts at rest
    for (std::size_t s = 0; s < 500; ++s) {
      const double q_now = samples[s * 2].q_total;
      oracle += 0.5 * (q_prev + q_now) * dt * 1000.0;
      q_prev = q_now;
    }
    CHECK(samples.back().volume_accum_l == doctest::Approx(oracle).epsilon(1e-9));
    // Volume never decreases.
    double last = 0.0;
    for (const auto& s : samples) {
      CHECK(s.volume_accum_l >= last - 1e-15);
      last = std::max(last, s.volume_accum_l);
    }
  }

  SUBCASE("waveform mode chops the flow below the averaged equivalent") {
    const int n = 4000;  // 4 s at 1 ms
    std::vector<std::vector<double>> steps(n, std::vector<double>(1, 75.0));
    const auto wave = integrate_volume(steps, 1e-3, params, PwmMode::Waveform, 10.0);
    const auto avg = integrate_volume(steps, 1e-3, params, PwmMode::Averaged);
    CHECK(wave.back().volume_accum_l > 0.0);
    CHECK(wave.back().volume_accum_l < avg.back().volume_accum_l);
    // Plunger position stays inside [0, duty/100] up to rounding.
    for (const auto& s : wave) {
      CHECK(s.x_n >= 0.0);
      CHECK(s.x_n <= 0.75 + 1e-12);
    }
  }

  SUBCASE("waveform and averaged agree at duty 100") {
    std::vector<std::vector<double>> steps(1000, std::vector<double>(1, 100.0));
    const auto wave = integrate_volume(steps, 1e-3, params, PwmMode::Waveform, 10.0);
    const auto avg = integrate_volume(steps, 1e-3, params, PwmMode::Averaged);
    CHECK(wave.back().volume_accum_l ==
          doctest::Approx(avg.back().volume_accum_l).epsilon(1e-12));
  }
}

TEST_CASE("valve bank input validation") {
  ValveBank bank(2, ValveParams{}, PwmMode::Averaged);
  std::vector<double> wrong = {100.0};
  CHECK_THROWS_AS(bank.step(wrong, 0.01), std::invalid_argument);
  std::vector<double> ok = {100.0, 0.0};
  CHECK_THROWS_AS(bank.step(ok, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ValveBank(0, ValveParams{}, PwmMode::Averaged), ConfigError);
}

TEST_CASE("flow trace csv shape") {
  std::vector<std::vector<double>> steps(3, std::vector<double>(2, 100.0));
  const auto samples = integrate_volume(steps, 0.01, ValveParams{}, PwmMode::Averaged);
  std::ostringstream os;
  write_flow_trace_csv(os, samples);
  const std::string text = os.str();
  CHECK(text.rfind("t,nozzle,duty,x_n,q_n,q_total,volume_accum\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 2);
}
