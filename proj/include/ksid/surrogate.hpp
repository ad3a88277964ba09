// Synthetic turbocharger-turbine plant: a 2-state ODE (shaft speed, measured
// outlet temperature) driven by nine input channels, integrated with
// fixed-step RK4 under zero-order-hold inputs. Generates the training and
// test records for the identification pipeline; the maps are smooth analytic
// stand-ins, not calibrated turbomachinery data.
//
// States:  N_t [rpm], T_tur_out [K] (first-order sensor lag on the
//          energy-balance temperature).
// Inputs (fixed order): u_vgt [%], u_egrv [%], T_tur_in [K], P_tur_in [kPa],
//          N_e [rpm], m_f [mg], T_oil [K], T_coolant [K], T_comp_out [K].
// T_tur_in is not free: it follows an affine coupling of m_f, N_e and
// T_coolant plus an excitation deviation, so every input channel is causally
// linked to the outputs.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ksid/dataset.hpp"
#include "ksid/errors.hpp"
#include "ksid/matrix.hpp"

namespace ksid {

inline constexpr std::size_t kSurrogateInputCount = 9;

enum SurrogateInput : std::size_t {
  kVgt = 0,
  kEgrv = 1,
  kTurbineInletTemp = 2,
  kTurbineInletPressure = 3,
  kEngineSpeed = 4,
  kFuelMass = 5,
  kOilTemp = 6,
  kCoolantTemp = 7,
  kCompOutletTemp = 8,
};

std::vector<std::string> surrogate_state_names();
std::vector<std::string> surrogate_input_names();

// Speed dropped below the documented floor where the 1/omega term blows up.
class SingularityError : public DivergenceError {
 public:
  using DivergenceError::DivergenceError;
};

struct PlantParams {
  // Rotor. Angular momentum balance runs in rad/s internally; the state is
  // kept in rpm and converted explicitly.
  double inertia = 2e-4;            // J_t [kg m^2]
  double visc_friction = 2e-5;      // k1 [N m s/rad]
  double quad_friction = 8e-9;      // k2 [N m (s/rad)^2]
  double min_speed_rpm = 1500.0;    // floor guarding the 1/omega singularity
  double max_speed_rpm = 160000.0;

  // Gas path.
  double cp = 1100.0;               // c_p [J/(kg K)]
  double ambient_pressure = 100.0;  // [kPa]
  double pressure_ratio_floor = 1.02;
  double flow_gain = 0.40;          // [kg/s] at unit area and reference point
  double vgt_area_a0 = 0.25;        // area polynomial in u_vgt/100:
  double vgt_area_a1 = 1.10;        //   a0 + a1 v + a2 v^2 (monotone on [0,1])
  double vgt_area_a2 = -0.35;
  double egr_bleed = 0.25;          // flow reduction at full EGR
  double flow_ref_temp = 600.0;     // [K] in the sqrt(T_ref/T) correction

  // Turbine efficiency map: quadratic in the VGT command, saturating in the
  // pressure ratio.
  double eta_max = 0.78;
  double eta_curvature = 0.9;
  double eta_vgt_opt = 0.55;
  double eta_pr_gain = 2.0;
  double isentropic_exponent = 0.259;  // (gamma-1)/gamma, gamma = 1.35

  // Compressor load: P_c = comp_load * omega^3 * (1 + comp_temp_coeff *
  // (T_comp_out - comp_temp_ref) / comp_temp_ref).
  double comp_load = 3.6e-8;
  double comp_temp_coeff = 0.15;
  double comp_temp_ref = 400.0;

  // Housing heat transfer and the temperature-sensor lag.
  double heat_loss = 12.0;          // h_loss [W/K]
  double sensor_tau = 2.0;          // [s]

  // Affine coupling that produces T_tur_in from the other channels.
  double t_in_base = 520.0;         // [K]
  double t_in_per_mg = 1.1;         // [K/mg]
  double t_in_per_rpm = 0.04;       // [K/rpm], around engine_speed_ref
  double t_in_coolant_coeff = -0.3; // [K/K], around coolant_ref
  double engine_speed_ref = 1400.0;
  double coolant_ref = 355.0;

  struct Range {
    double low;
    double high;
  };
  // Nominal operating range per input channel (index = SurrogateInput).
  // Entry kTurbineInletTemp bounds the excitation *deviation* added on top
  // of the affine coupling.
  std::array<Range, kSurrogateInputCount> input_ranges = {{
      {45.0, 75.0},     // u_vgt [%]
      {5.0, 30.0},      // u_egrv [%]
      {-15.0, 15.0},    // T_tur_in deviation [K]
      {170.0, 260.0},   // P_tur_in [kPa]
      {1100.0, 1900.0}, // N_e [rpm]
      {80.0, 180.0},    // m_f [mg]
      {340.0, 380.0},   // T_oil [K]
      {345.0, 365.0},   // T_coolant [K]
      {360.0, 430.0},   // T_comp_out [K]
  }};

  std::array<double, 2> initial_state = {95000.0, 620.0};  // [rpm, K]
};

struct PlantState {
  double speed_rpm;
  double outlet_temp;
};

// Intermediate quantities of one derivative evaluation, exposed for the
// energy-balance checks.
struct PlantSignals {
  double omega;          // [rad/s]
  double pressure_ratio;
  double mass_flow;      // W_t [kg/s]
  double turbine_power;  // P_t = tau * omega [W]
  double comp_power;     // P_c [W]
  double friction_torque;  // M_fric [N m]
  double heat_loss;      // Q_tur,housing [W]
  double temp_target;    // steady-state outlet temperature [K]
};

PlantSignals plant_signals(const PlantParams& params, const PlantState& state,
                           std::span<const double> inputs);

// d/dt [N_t (rpm/s), T_tur_out (K/s)]. Throws SingularityError below the
// speed floor.
std::array<double, 2> plant_derivatives(const PlantParams& params,
                                        const PlantState& state,
                                        std::span<const double> inputs);

// Steady state for fixed inputs: bisection on the torque balance (strictly
// decreasing in speed), then the energy-balance temperature.
PlantState find_equilibrium(const PlantParams& params,
                            std::span<const double> inputs);

enum class SignalKind { Constant, Steps, Chirp, FilteredNoise, Staircase };

struct SignalSpec {
  SignalKind kind = SignalKind::Constant;
  double low = 0.0;
  double high = 1.0;
  double hold_low_s = 1.0;   // Steps: uniform hold-time range
  double hold_high_s = 3.0;
  double period_s = 8.0;     // Staircase: dwell per level
  std::size_t levels = 8;    // Staircase: rungs across [low, high]
  double chirp_f0 = 0.02;    // Chirp: start/end frequency [Hz]
  double chirp_f1 = 0.2;
  double smooth_tau_s = 0.5;  // FilteredNoise: first-order smoothing constant
};

struct ExcitationSpec {
  std::array<SignalSpec, kSurrogateInputCount> signals;
  std::uint64_t seed = 0;
};

// Mixed steps/chirp/noise spanning the full input ranges; `variant` selects
// among a few hold-time/kind mixes so training cycles differ.
ExcitationSpec make_training_excitation(const PlantParams& params,
                                        std::uint64_t seed, unsigned variant);
// Rapid random load steps (1-3 s holds) on the load-path channels.
ExcitationSpec make_transient_excitation(const PlantParams& params,
                                         std::uint64_t seed);
// Slow staircase holds stepping through the load levels.
ExcitationSpec make_steady_excitation(const PlantParams& params,
                                      std::uint64_t seed);

// All nine input channels sampled at the output rate (row index =
// SurrogateInput). Deterministic for a fixed spec.
Matrix generate_inputs(const PlantParams& params, const ExcitationSpec& spec,
                       std::size_t n_samples, double sample_rate);

struct IntegrateOptions {
  std::size_t substeps = 5;  // RK4 steps per output sample interval
  // Additive measurement noise sigma per state channel; empty = none.
  std::vector<double> noise_sigma;
  // Start from the equilibrium of the first input sample instead of
  // params.initial_state.
  bool start_at_equilibrium = true;
};

// Integrates the plant for duration*sample_rate samples. Inputs are held
// constant over each output interval (zero-order hold). Bit-reproducible
// for a fixed excitation seed.
TimeSeriesDataset integrate(const PlantParams& params,
                            const ExcitationSpec& excitation,
                            double duration_s, double sample_rate,
                            const IntegrateOptions& options = {});

struct DutyCycles {
  std::vector<TimeSeriesDataset> train;
  TimeSeriesDataset transient_test;
  TimeSeriesDataset steady_test;
};

struct DutyCycleOptions {
  std::size_t train_cycles = 3;
  double train_duration_s = 80.0;
  double transient_duration_s = 60.0;
  double steady_duration_s = 90.0;
  double sample_rate = 100.0;
  std::size_t substeps = 5;
  std::vector<double> noise_sigma;
};

// Training cycles span the full operating ranges; the two test cycles use
// seeds disjoint from training (transient: rapid steps; steady: staircase).
DutyCycles make_duty_cycles(const PlantParams& params, std::uint64_t seed,
                            const DutyCycleOptions& options = {});

}  // namespace ksid
