#pragma once

// Experiment configuration: a JSON document (comments allowed) with unit
// suffixes in every key. Every section is optional; absent keys take the
// defaults below, which reproduce the reference experiment.

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinclock/clock.hpp"
#include "spinclock/noise.hpp"
#include "spinclock/sequence.hpp"

namespace spinclock {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double start_s{0.0};
  double stop_s{1e-3};
  int points{11};

  std::vector<double> values() const;
};

inline constexpr std::array<PresetKind, 4> kAllPresets = {
    PresetKind::css_ramsey, PresetKind::phase_squeezed_ramsey,
    PresetKind::number_squeezed_hold, PresetKind::echo_ramsey};

struct LifetimeSettings {
  std::int64_t n_shots{10000};
  bool subtract_readout{true};
  // Indexed like kAllPresets.
  std::array<GridSpec, 4> grids{GridSpec{0.0, 3e-3, 31}, GridSpec{0.0, 1.5e-3, 31},
                                GridSpec{0.0, 8e-3, 41}, GridSpec{0.0, 4e-3, 21}};

  const GridSpec& grid(PresetKind kind) const { return grids[static_cast<std::size_t>(kind)]; }
};

struct SqueezeTarget {
  double target_zeta{0.4};
  double excess_area{8.0};
  double contrast_factor{1.0};
};

struct ClockSettings {
  double omega0{kRb87ClockOmega};
  double t_r{200e-6};
  double t_cycle{9.0};
  std::int64_t n_cycles{20000};
  double atoms_2s0{3.5e4};
  double var_omega{0.0};
  double t_coh{11e-3};
  double readout_var{0.0};
  double css_contrast{1.0};
  bool contrast_at_readout{true};
  double squeezed_c_in{0.9};
  double squeezed_contrast_factor{0.9};
  double zeta_net{1.0 / 2.8};
  double squeezed_excess_area{8.0};
  DriftModel drift{true, DriftModel::Units::frequency, 0.7, 200.0};
  std::vector<double> taus_s{};  // empty: octave spacing up to a tenth of the record
};

struct OracleSettings {
  std::vector<double> spins{25.0, 50.0, 100.0};
  double q_eff_max{1.0};
  int q_eff_points{10};
  double tolerance_rel{0.05};
  double breakdown_q_eff{3.0};
};

struct ExperimentConfig {
  std::uint64_t master_seed{20101};
  std::string output_dir{"out"};
  double atoms_2s0{3.0e4};
  double c_in{0.9};
  SqueezeTarget squeezing{};
  NoiseModel noise{};
  LifetimeSettings lifetime{};
  ClockSettings clock{};
  OracleSettings oracle{};

  PresetParams preset_params() const;
  ClockConfig clock_config(InputState input) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolved configuration, every field explicit.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace spinclock
