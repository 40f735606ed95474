#pragma once

#include <numbers>

#include "spinclock/spin_core.hpp"

namespace spinclock {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Slow drift of the clock frequency (Ornstein-Uhlenbeck).
struct DriftModel {
  enum class Units { frequency, field };

  bool enabled{false};
  Units units{Units::frequency};
  // Stationary standard deviation: Hz for frequency units, gauss for field units.
  double amplitude{0.7};
  double correlation_time_s{200.0};
};

struct NoiseModel {
  double var_omega{(kTwoPi * 1.3) * (kTwoPi * 1.3)};  // rad^2/s^2
  double t_coh{11e-3};                                 // s
  ContrastDecayShape decay_shape{ContrastDecayShape::exponential};
  double readout_var{0.0};         // spin units^2
  double field_coeff{3.7e3};       // Hz/G
  DriftModel drift{};

  /// Stationary drift deviation in rad/s.
  double drift_sigma_omega() const {
    const double hz =
        drift.units == DriftModel::Units::field ? drift.amplitude * field_coeff : drift.amplitude;
    return kTwoPi * hz;
  }
};

/// Throws std::invalid_argument when a field is out of its domain.
void validate(const NoiseModel& noise);

}  // namespace spinclock
