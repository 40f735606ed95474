#include "spinclock/clock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spinclock/rng.hpp"

namespace spinclock {

namespace {

constexpr std::uint64_t kCycleStreams = 1;
constexpr std::uint64_t kDriftStream = 2;

}  // namespace

std::string_view to_string(InputState input) {
  return input == InputState::css ? "css" : "squeezed";
}

InputState input_state_from_string(std::string_view name) {
  if (name == "css") return InputState::css;
  if (name == "squeezed") return InputState::squeezed;
  throw std::invalid_argument("unknown input state: " + std::string(name));
}

void validate(const ClockConfig& config) {
  if (!(config.omega0 > 0)) throw std::invalid_argument("clock omega0 must be > 0");
  if (!(config.t_r > 0)) throw std::invalid_argument("clock t_r must be > 0");
  if (!(config.t_cycle >= config.t_r)) throw std::invalid_argument("clock t_r must not exceed t_cycle");
  if (config.n_cycles < 2) throw std::invalid_argument("clock n_cycles must be >= 2");
  if (!(config.contrast > 0 && config.contrast <= 1))
    throw std::invalid_argument("clock contrast must lie in (0, 1]");
  if (!(config.s0 > 0)) throw std::invalid_argument("clock s0 must be > 0");
  validate(config.noise);
}

double duty_factor(const ClockConfig& config) { return config.t_r / config.t_cycle; }

SqueezeSettings clock_squeeze(double zeta_net, double c_in, double excess_area,
                              double contrast_factor) {
  return calibrated_squeeze(zeta_net * c_in, excess_area, contrast_factor);
}

ClockConfig default_clock_config(InputState input) {
  ClockConfig config;
  config.input_state = input;
  config.s0 = 3.5e4 / 2;
  config.noise.var_omega = 0.0;
  config.noise.drift.enabled = true;
  if (input == InputState::squeezed) {
    config.contrast = 0.9;
    config.squeeze = clock_squeeze(1.0 / 2.8, config.contrast, 8.0, 0.9);
  }
  return config;
}

FrequencyRecord run_clock(const ClockConfig& config, std::uint64_t master_seed) {
  validate(config);
  PresetParams params;
  params.s0 = config.s0;
  params.c_in = config.contrast;
  params.squeeze = config.squeeze;
  const auto kind = config.input_state == InputState::css ? PresetKind::css_ramsey
                                                          : PresetKind::phase_squeezed_ramsey;
  const Sequence sequence = preset_sequence(kind, config.t_r, params);
  NoiseModel noise = config.noise;
  if (config.contrast_at_readout) noise.t_coh = std::numeric_limits<double>::infinity();

  FrequencyRecord record;
  record.t_cycle = config.t_cycle;
  record.y.reserve(static_cast<std::size_t>(config.n_cycles));

  auto drift_rng = make_stream(derive_seed(master_seed, kDriftStream), 0);
  const std::uint64_t cycle_seed = derive_seed(master_seed, kCycleStreams);
  std::normal_distribution<double> standard(0.0, 1.0);
  const double drift_sigma = noise.drift.enabled ? noise.drift_sigma_omega() : 0.0;
  const double decay = std::exp(-config.t_cycle / noise.drift.correlation_time_s);
  const double innovation = drift_sigma * std::sqrt(1.0 - decay * decay);
  double drift = drift_sigma * standard(drift_rng);  // stationary start

  const double white_sigma = std::sqrt(noise.var_omega);
  const double scale = config.omega0 * config.t_r;
  for (std::int64_t k = 0; k < config.n_cycles; ++k) {
    if (k > 0) drift = decay * drift + innovation * standard(drift_rng);
    auto rng = make_stream(cycle_seed, static_cast<std::uint64_t>(k));
    std::normal_distribution<double> white(0.0, 1.0);
    const double detuning = white_sigma * white(rng) + drift;
    const SpinState state = execute_shot(sequence, noise, detuning);
    const double sz = measure_sz(state, noise.readout_var, rng);
    double ratio = sz / state.mean_length();
    if (std::abs(ratio) > kPhaseClamp) {
      ++record.fringe_excursions;
      ratio = std::clamp(ratio, -kPhaseClamp, kPhaseClamp);
    }
    record.y.push_back(std::asin(ratio) / scale);
  }
  return record;
}

double SqlReference::operator()(double tau) const { return coefficient / std::sqrt(tau); }

SqlReference sql_reference(const ClockConfig& config) {
  return {std::sqrt(1.0 / (2.0 * config.s0)) * std::sqrt(config.t_cycle) /
          (config.omega0 * config.t_r)};
}

}  // namespace spinclock
