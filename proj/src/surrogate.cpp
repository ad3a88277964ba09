#include "ksid/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ksid/rng.hpp"

namespace ksid {

namespace {

constexpr double kRpmToRadPerSec = std::numbers::pi / 30.0;

double vgt_area(const PlantParams& p, double u_vgt) {
  const double v = u_vgt / 100.0;
  return p.vgt_area_a0 + p.vgt_area_a1 * v + p.vgt_area_a2 * v * v;
}

}  // namespace

std::vector<std::string> surrogate_state_names() {
  return {"N_t", "T_tur_out"};
}

std::vector<std::string> surrogate_input_names() {
  return {"u_vgt", "u_egrv",    "T_tur_in",  "P_tur_in", "N_e",
          "m_f",   "T_oil",     "T_coolant", "T_comp_out"};
}

PlantSignals plant_signals(const PlantParams& params, const PlantState& state,
                           std::span<const double> inputs) {
  if (inputs.size() != kSurrogateInputCount) {
    throw ShapeError("surrogate expects 9 input channels");
  }
  if (state.speed_rpm < params.min_speed_rpm) {
    throw SingularityError(
        "turbine speed " + std::to_string(state.speed_rpm) +
            " rpm is below the floor of " +
            std::to_string(params.min_speed_rpm) + " rpm",
        0);
  }

  PlantSignals s{};
  s.omega = state.speed_rpm * kRpmToRadPerSec;
  s.pressure_ratio = std::max(inputs[kTurbineInletPressure] /
                                  params.ambient_pressure,
                              params.pressure_ratio_floor);

  const double t_in = inputs[kTurbineInletTemp];
  s.mass_flow = params.flow_gain * vgt_area(params, inputs[kVgt]) *
                (inputs[kTurbineInletPressure] / params.ambient_pressure) *
                std::sqrt(1.0 - 1.0 / (s.pressure_ratio * s.pressure_ratio)) *
                (1.0 - params.egr_bleed * inputs[kEgrv] / 100.0) *
                std::sqrt(params.flow_ref_temp / t_in);

  const double vgt_dev = inputs[kVgt] / 100.0 - params.eta_vgt_opt;
  const double eta = params.eta_max *
                     (1.0 - params.eta_curvature * vgt_dev * vgt_dev) *
                     (1.0 - std::exp(-params.eta_pr_gain *
                                     (s.pressure_ratio - 1.0)));
  const double enthalpy_factor =
      1.0 - std::pow(s.pressure_ratio, -params.isentropic_exponent);
  s.turbine_power = eta * s.mass_flow * params.cp * t_in * enthalpy_factor;

  s.comp_power = params.comp_load * s.omega * s.omega * s.omega *
                 (1.0 + params.comp_temp_coeff *
                            (inputs[kCompOutletTemp] - params.comp_temp_ref) /
                            params.comp_temp_ref);

  s.friction_torque =
      params.visc_friction * s.omega + params.quad_friction * s.omega * s.omega;

  s.heat_loss = params.heat_loss * (t_in - inputs[kOilTemp]);
  s.temp_target =
      t_in - (s.turbine_power - s.heat_loss) / (s.mass_flow * params.cp);
  return s;
}

std::array<double, 2> plant_derivatives(const PlantParams& params,
                                        const PlantState& state,
                                        std::span<const double> inputs) {
  const PlantSignals s = plant_signals(params, state, inputs);
  // Single division by the inertia so scaling J scales the derivative exactly.
  const double domega_dt =
      ((s.turbine_power - s.comp_power) / s.omega - s.friction_torque) /
      params.inertia;
  const double dspeed_rpm = domega_dt / kRpmToRadPerSec;
  const double dtemp = (s.temp_target - state.outlet_temp) / params.sensor_tau;
  return {dspeed_rpm, dtemp};
}

PlantState find_equilibrium(const PlantParams& params,
                            std::span<const double> inputs) {
  // Torque balance as a function of speed; P_t does not depend on the state,
  // while P_c and friction grow with speed, so the balance is strictly
  // decreasing and bisection is safe.
  auto imbalance = [&](double rpm) {
    const PlantSignals s =
        plant_signals(params, PlantState{rpm, 0.0}, inputs);
    return (s.turbine_power - s.comp_power) / s.omega - s.friction_torque;
  };
  double lo = params.min_speed_rpm;
  double hi = params.max_speed_rpm;
  if (imbalance(lo) < 0.0 || imbalance(hi) > 0.0) {
    throw DataError("no speed equilibrium inside the declared range");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (imbalance(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double speed = 0.5 * (lo + hi);
  const PlantSignals s = plant_signals(params, PlantState{speed, 0.0}, inputs);
  return {speed, s.temp_target};
}

namespace {

std::vector<double> synthesize_signal(const SignalSpec& spec, Rng& rng,
                                      std::size_t n_samples, double dt) {
  std::vector<double> out(n_samples);
  const double mid = 0.5 * (spec.low + spec.high);
  switch (spec.kind) {
    case SignalKind::Constant: {
      std::fill(out.begin(), out.end(), mid);
      break;
    }
    case SignalKind::Steps: {
      double level = rng.uniform(spec.low, spec.high);
      double next_switch = rng.uniform(spec.hold_low_s, spec.hold_high_s);
      for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (t >= next_switch) {
          level = rng.uniform(spec.low, spec.high);
          next_switch = t + rng.uniform(spec.hold_low_s, spec.hold_high_s);
        }
        out[i] = level;
      }
      break;
    }
    case SignalKind::Chirp: {
      const double amp = 0.5 * (spec.high - spec.low);
      const double duration = static_cast<double>(n_samples) * dt;
      const double sweep =
          duration > 0.0 ? (spec.chirp_f1 - spec.chirp_f0) / (2.0 * duration)
                         : 0.0;
      const double phase0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) * dt;
        out[i] = mid + amp * std::sin(phase0 + 2.0 * std::numbers::pi *
                                                     (spec.chirp_f0 + sweep * t) *
                                                     t);
      }
      break;
    }
    case SignalKind::FilteredNoise: {
      const double alpha = dt / (spec.smooth_tau_s + dt);
      double value = mid;
      for (std::size_t i = 0; i < n_samples; ++i) {
        const double white = rng.uniform(spec.low, spec.high);
        value += alpha * (white - value);
        out[i] = value;
      }
      break;
    }
    case SignalKind::Staircase: {
      const std::size_t levels = std::max<std::size_t>(spec.levels, 2);
      std::vector<std::size_t> order(levels);
      for (std::size_t i = 0; i < levels; ++i) order[i] = i;
      // Fisher-Yates with the channel stream.
      for (std::size_t i = levels; i-- > 1;) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i + 1));
        std::swap(order[i], order[std::min(j, i)]);
      }
      for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) * dt;
        const std::size_t rung =
            static_cast<std::size_t>(t / spec.period_s) % levels;
        out[i] = spec.low + (spec.high - spec.low) *
                                static_cast<double>(order[rung]) /
                                static_cast<double>(levels - 1);
      }
      break;
    }
  }
  return out;
}

}  // namespace

Matrix generate_inputs(const PlantParams& params, const ExcitationSpec& spec,
                       std::size_t n_samples, double sample_rate) {
  const double dt = 1.0 / sample_rate;
  Matrix inputs(kSurrogateInputCount, n_samples);
  for (std::size_t ch = 0; ch < kSurrogateInputCount; ++ch) {
    // Independent, seeded stream per channel.
    Rng rng(spec.seed * 0x9E3779B97F4A7C15ull + ch);
    const std::vector<double> signal =
        synthesize_signal(spec.signals[ch], rng, n_samples, dt);
    for (std::size_t i = 0; i < n_samples; ++i) inputs(ch, i) = signal[i];
  }
  // T_tur_in: affine coupling plus the synthesized deviation.
  for (std::size_t i = 0; i < n_samples; ++i) {
    inputs(kTurbineInletTemp, i) =
        params.t_in_base + params.t_in_per_mg * inputs(kFuelMass, i) +
        params.t_in_per_rpm * (inputs(kEngineSpeed, i) - params.engine_speed_ref) +
        params.t_in_coolant_coeff *
            (inputs(kCoolantTemp, i) - params.coolant_ref) +
        inputs(kTurbineInletTemp, i);
  }
  return inputs;
}

ExcitationSpec make_training_excitation(const PlantParams& params,
                                        std::uint64_t seed, unsigned variant) {
  ExcitationSpec spec;
  spec.seed = seed;
  for (std::size_t ch = 0; ch < kSurrogateInputCount; ++ch) {
    auto& sig = spec.signals[ch];
    sig.low = params.input_ranges[ch].low;
    sig.high = params.input_ranges[ch].high;
    sig.kind = SignalKind::Steps;
    // Hold times vary by cycle so training covers fast and slow excitation.
    sig.hold_low_s = 1.0 + 0.5 * static_cast<double>(variant % 3);
    sig.hold_high_s = 3.0 + 2.0 * static_cast<double>(variant % 3);
  }
  // Slow thermal boundary conditions.
  for (std::size_t ch : {kOilTemp, kCoolantTemp, kCompOutletTemp}) {
    spec.signals[ch].kind = SignalKind::FilteredNoise;
    spec.signals[ch].smooth_tau_s = 4.0;
  }
  // One cycle in three sweeps the VGT with a chirp instead of steps.
  if (variant % 3 == 1) {
    spec.signals[kVgt].kind = SignalKind::Chirp;
    spec.signals[kVgt].chirp_f0 = 0.02;
    spec.signals[kVgt].chirp_f1 = 0.3;
  }
  if (variant % 3 == 2) {
    spec.signals[kTurbineInletPressure].kind = SignalKind::FilteredNoise;
    spec.signals[kTurbineInletPressure].smooth_tau_s = 1.5;
  }
  return spec;
}

ExcitationSpec make_transient_excitation(const PlantParams& params,
                                         std::uint64_t seed) {
  ExcitationSpec spec;
  spec.seed = seed;
  for (std::size_t ch = 0; ch < kSurrogateInputCount; ++ch) {
    auto& sig = spec.signals[ch];
    sig.low = params.input_ranges[ch].low;
    sig.high = params.input_ranges[ch].high;
    sig.kind = SignalKind::Steps;
    sig.hold_low_s = 3.0;
    sig.hold_high_s = 6.0;
  }
  // Rapid load steps on the load path only; boundary temperatures wander
  // slowly as they would on an engine.
  for (std::size_t ch :
       {kVgt, kTurbineInletPressure, kEngineSpeed, kFuelMass}) {
    spec.signals[ch].hold_low_s = 1.0;
    spec.signals[ch].hold_high_s = 3.0;
  }
  for (std::size_t ch : {kOilTemp, kCoolantTemp, kCompOutletTemp}) {
    spec.signals[ch].kind = SignalKind::FilteredNoise;
    spec.signals[ch].smooth_tau_s = 5.0;
  }
  return spec;
}

ExcitationSpec make_steady_excitation(const PlantParams& params,
                                      std::uint64_t seed) {
  ExcitationSpec spec;
  spec.seed = seed;
  for (std::size_t ch = 0; ch < kSurrogateInputCount; ++ch) {
    auto& sig = spec.signals[ch];
    sig.low = params.input_ranges[ch].low;
    sig.high = params.input_ranges[ch].high;
    sig.kind = SignalKind::Staircase;
    sig.period_s = 9.0;
    sig.levels = 8;
  }
  // Near-constant boundary conditions while the load ladder runs.
  for (std::size_t ch : {kOilTemp, kCoolantTemp, kCompOutletTemp}) {
    auto& sig = spec.signals[ch];
    const double mid = 0.5 * (sig.low + sig.high);
    const double span = 0.1 * (sig.high - sig.low);
    sig.kind = SignalKind::FilteredNoise;
    sig.low = mid - span;
    sig.high = mid + span;
    sig.smooth_tau_s = 8.0;
  }
  spec.signals[kTurbineInletTemp].kind = SignalKind::Constant;
  return spec;
}

TimeSeriesDataset integrate(const PlantParams& params,
                            const ExcitationSpec& excitation,
                            double duration_s, double sample_rate,
                            const IntegrateOptions& options) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
  const std::size_t n_samples =
      static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  if (n_samples < 2) {
    throw ConfigError("duration x sample_rate must give at least 2 samples");
  }
  if (options.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (!options.noise_sigma.empty() && options.noise_sigma.size() != 2) {
    throw ConfigError("noise_sigma must have one entry per state channel");
  }

  const Matrix inputs =
      generate_inputs(params, excitation, n_samples, sample_rate);

  PlantState state{params.initial_state[0], params.initial_state[1]};
  if (options.start_at_equilibrium) {
    std::vector<double> u0(kSurrogateInputCount);
    for (std::size_t ch = 0; ch < kSurrogateInputCount; ++ch) {
      u0[ch] = inputs(ch, 0);
    }
    state = find_equilibrium(params, u0);
  }

  Rng noise_rng(excitation.seed * 0x9E3779B97F4A7C15ull + 101);
  const bool with_noise = !options.noise_sigma.empty();

  Matrix recorded(2, n_samples);
  const double h = 1.0 / (sample_rate * static_cast<double>(options.substeps));
  std::vector<double> u(kSurrogateInputCount);
  for (std::size_t i = 0; i < n_samples; ++i) {
    recorded(0, i) = state.speed_rpm;
    recorded(1, i) = state.outlet_temp;
    if (with_noise) {
      recorded(0, i) += options.noise_sigma[0] * noise_rng.gaussian();
      recorded(1, i) += options.noise_sigma[1] * noise_rng.gaussian();
    }
    if (i + 1 == n_samples) break;

    for (std::size_t ch = 0; ch < kSurrogateInputCount; ++ch) {
      u[ch] = inputs(ch, i);  // zero-order hold over the sample interval
    }
    try {
      for (std::size_t sub = 0; sub < options.substeps; ++sub) {
        const auto k1 = plant_derivatives(params, state, u);
        const PlantState s2{state.speed_rpm + 0.5 * h * k1[0],
                            state.outlet_temp + 0.5 * h * k1[1]};
        const auto k2 = plant_derivatives(params, s2, u);
        const PlantState s3{state.speed_rpm + 0.5 * h * k2[0],
                            state.outlet_temp + 0.5 * h * k2[1]};
        const auto k3 = plant_derivatives(params, s3, u);
        const PlantState s4{state.speed_rpm + h * k3[0],
                            state.outlet_temp + h * k3[1]};
        const auto k4 = plant_derivatives(params, s4, u);
        state.speed_rpm +=
            h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        state.outlet_temp +=
            h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
      }
    } catch (const SingularityError&) {
      const double t = static_cast<double>(i) / sample_rate;
      throw SingularityError("turbine speed hit the floor at t = " +
                                 std::to_string(t) + " s",
                             i);
    }
    if (!std::isfinite(state.speed_rpm) || !std::isfinite(state.outlet_temp)) {
      const double t = static_cast<double>(i) / sample_rate;
      throw DivergenceError(
          "non-finite plant state at t = " + std::to_string(t) + " s", i);
    }
  }

  TimeSeriesDataset ds;
  ds.sample_rate = sample_rate;
  const std::vector<std::string> state_names = surrogate_state_names();
  const std::vector<std::string> input_names = surrogate_input_names();
  const std::array<std::string, 2> state_units = {"rpm", "K"};
  const std::array<std::string, kSurrogateInputCount> input_units = {
      "%", "%", "K", "kPa", "rpm", "mg", "K", "K", "K"};
  for (std::size_t s = 0; s < 2; ++s) {
    Channel ch;
    ch.name = state_names[s];
    ch.unit = state_units[s];
    ch.role = ChannelRole::State;
    ch.data.assign(recorded.row(s).begin(), recorded.row(s).end());
    ds.channels.push_back(std::move(ch));
  }
  for (std::size_t ci = 0; ci < kSurrogateInputCount; ++ci) {
    Channel ch;
    ch.name = input_names[ci];
    ch.unit = input_units[ci];
    ch.role = ChannelRole::Input;
    ch.data.assign(inputs.row(ci).begin(), inputs.row(ci).end());
    ds.channels.push_back(std::move(ch));
  }
  return ds;
}

DutyCycles make_duty_cycles(const PlantParams& params, std::uint64_t seed,
                            const DutyCycleOptions& options) {
  DutyCycles cycles;
  IntegrateOptions integ;
  integ.substeps = options.substeps;
  integ.noise_sigma = options.noise_sigma;

  for (std::size_t k = 0; k < options.train_cycles; ++k) {
    const ExcitationSpec spec = make_training_excitation(
        params, seed + k, static_cast<unsigned>(k));
    TimeSeriesDataset ds = integrate(params, spec, options.train_duration_s,
                                     options.sample_rate, integ);
    ds.name = "train_" + std::to_string(k);
    cycles.train.push_back(std::move(ds));
  }
  {
    const ExcitationSpec spec = make_transient_excitation(params, seed + 100);
    cycles.transient_test = integrate(params, spec,
                                      options.transient_duration_s,
                                      options.sample_rate, integ);
    cycles.transient_test.name = "test_transient";
  }
  {
    const ExcitationSpec spec = make_steady_excitation(params, seed + 200);
    cycles.steady_test = integrate(params, spec, options.steady_duration_s,
                                   options.sample_rate, integ);
    cycles.steady_test.name = "test_steady";
  }
  return cycles;
}

}  // namespace ksid
