#pragma once

// Open-loop clock operated cycle by cycle: one Ramsey shot per cycle, the
// measured population converted back into a phase and a fractional
// frequency. Frequency noise is a white shot-to-shot part plus a slow drift.

#include <cstdint>
#include <string_view>

#include "spinclock/allan.hpp"
#include "spinclock/noise.hpp"
#include "spinclock/sequence.hpp"

namespace spinclock {

/// Rubidium-87 ground-state hyperfine frequency, rad/s.
inline constexpr double kRb87ClockOmega = kTwoPi * 6.834682611e9;

enum class InputState { css, squeezed };

std::string_view to_string(InputState input);
InputState input_state_from_string(std::string_view name);

struct ClockConfig {
  double omega0{kRb87ClockOmega};
  double t_r{200e-6};
  double t_cycle{9.0};
  std::int64_t n_cycles{20000};
  InputState input_state{InputState::css};
  double contrast{1.0};  // contrast of the prepared CSS
  // When set, contrast (times the shear contrast factor) is the signal
  // contrast at readout: decay during the Ramsey time is already folded in.
  bool contrast_at_readout{true};
  double s0{1.75e4};
  SqueezeSettings squeeze{};
  NoiseModel noise{};
};

void validate(const ClockConfig& config);

double duty_factor(const ClockConfig& config);

/// Net squeezing of the clock input relative to the full-contrast projection
/// limit, zeta_net = zeta / c_in; returns the shear that realizes it.
SqueezeSettings clock_squeeze(double zeta_net, double c_in, double excess_area,
                              double contrast_factor);

/// Paper-like defaults: 2 s0 = 3.5e4, T_R = 200 us, 9 s cycle, no white
/// frequency noise, Ornstein-Uhlenbeck drift of 0.7 Hz / 200 s enabled.
/// The squeezed input has C_in = 0.9, shear contrast 0.9 (C = 0.81) and
/// zeta_net = 1 / 2.8.
ClockConfig default_clock_config(InputState input);

FrequencyRecord run_clock(const ClockConfig& config, std::uint64_t master_seed);

/// Projection-noise limit at full contrast: coefficient / sqrt(tau).
struct SqlReference {
  double coefficient{0.0};  // s^{1/2}
  double operator()(double tau) const;
};

SqlReference sql_reference(const ClockConfig& config);

inline constexpr double kPhaseClamp = 1.0 - 1e-9;

}  // namespace spinclock
