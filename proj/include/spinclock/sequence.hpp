#pragma once

// Pulse sequences built from spin-core channels, executed either as Monte
// Carlo shots (one frozen detuning per shot) or as a deterministic
// propagation of ensemble moments.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "spinclock/noise.hpp"
#include "spinclock/spin_core.hpp"

namespace spinclock {

namespace step {

/// Optical pumping into a CSS of 2*s0 atoms at the given contrast.
struct Pump {
  double theta{std::numbers::pi};
  double phi{0.0};
  double s0{1.5e4};
  double contrast{0.9};
};
struct Pulse {
  Eigen::Vector3d axis{Eigen::Vector3d::UnitX()};
  double angle{0.0};
};
struct Shear {
  double q{0.0};
  double excess_area{0.0};
  double contrast_factor{1.0};
};
struct Wait {
  double duration{0.0};
};
/// pi pulse about the equatorial axis at the prepared mean-spin azimuth.
struct Echo {};
struct Readout {};

}  // namespace step

using SequenceStep =
    std::variant<step::Pump, step::Pulse, step::Shear, step::Wait, step::Echo, step::Readout>;
using Sequence = std::vector<SequenceStep>;

enum class PresetKind { css_ramsey, phase_squeezed_ramsey, number_squeezed_hold, echo_ramsey };

std::string_view to_string(PresetKind kind);
PresetKind preset_kind_from_string(std::string_view name);

struct SqueezeSettings {
  double q{0.0};
  double excess_area{0.0};
  double contrast_factor{1.0};
};

/// Shear strength giving a minimum squeezing parameter `target_zeta` after
/// the shear, for a given excess area and contrast factor.
SqueezeSettings calibrated_squeeze(double target_zeta, double excess_area,
                                   double contrast_factor);

struct PresetParams {
  double s0{1.5e4};
  double c_in{0.9};
  SqueezeSettings squeeze{calibrated_squeeze(0.4, 8.0, 1.0)};
};

/// Rotation angle about the mean-spin axis that brings the sheared ellipse's
/// narrow axis onto the phase direction (phase_squeezed) or onto z.
double orientation_angle(const PresetParams& params, bool narrow_along_phase);

Sequence preset_sequence(PresetKind kind, double t_r, const PresetParams& params);

/// Throws std::invalid_argument unless the sequence starts with Pump, ends
/// with its only Readout, and has non-negative durations.
void validate_sequence(const Sequence& sequence);

struct ShotResult {
  double sz_sample{0.0};
  double contrast_at_readout{0.0};
  double sampled_detuning{0.0};
  std::int64_t shot_index{0};
};

/// Single shot at a fixed detuning. Returns the state at readout.
SpinState execute_shot(const Sequence& sequence, const NoiseModel& noise, double detuning);

std::vector<ShotResult> run_shots(const Sequence& sequence, const NoiseModel& noise,
                                  std::int64_t n_shots, std::uint64_t master_seed,
                                  int threads = 1);

struct MomentResult {
  SpinState state;                // at readout, detuning-free
  Eigen::Vector2d detuning_lever; // d<mean>/d(omega) in tangent coordinates
  double sz_mean{0.0};
  double sz_var{0.0};             // includes Var(omega) lever and readout noise
};

MomentResult propagate_moments(const Sequence& sequence, const NoiseModel& noise);

struct ZetaEstimate {
  double zeta{0.0};
  double standard_error{0.0};
  double contrast{0.0};
};

struct ZetaOptions {
  bool subtract_readout{true};
  double readout_var{0.0};
};

ZetaEstimate estimate_zeta(std::span<const ShotResult> results, double c_in, double s0,
                           const ZetaOptions& options = {});

/// zeta of the readout quadrature from propagated moments.
double moment_zeta(const MomentResult& moments, double c_in, double s0,
                   const ZetaOptions& options = {});

}  // namespace spinclock
