#pragma once

// Experiment drivers behind the command-line subcommands. Each compute_*
// function is pure given the configuration; write_* functions emit CSV with
// a '#' metadata header carrying the tool version and the resolved config.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spinclock/allan.hpp"
#include "spinclock/clock.hpp"
#include "spinclock/config.hpp"
#include "spinclock/sequence.hpp"

namespace spinclock {

std::string_view version();

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitTolerance = 3 };

// lifetime ------------------------------------------------------------------

struct LifetimePoint {
  PresetKind preset{};
  double t_r{0.0};
  double zeta{0.0};
  double zeta_stderr{0.0};
  double contrast{0.0};
  double moment_zeta{0.0};
};

/// Weighted fit zeta(t) = zeta0 + curvature t^2 over the whole grid.
struct LifetimeFit {
  PresetKind preset{};
  double zeta0{0.0};
  double curvature{0.0};                     // 1/s^2
  double var_omega{0.0};                     // curvature / (2 s0 c_in), rad^2/s^2
  double t_equal{0.0};                       // sqrt(zeta0 / curvature)
  std::optional<double> t_cross_one;         // first crossing of zeta = 1 (data)
  std::optional<double> t_cross_double;      // first crossing of zeta = 2 zeta(0) (data)
  std::optional<double> t_cross_one_moment;  // same from propagated moments
};

struct LifetimeResult {
  std::vector<LifetimePoint> points;
  std::vector<LifetimeFit> fits;

  std::vector<LifetimePoint> curve(PresetKind kind) const;
  const LifetimeFit& fit(PresetKind kind) const;
};

LifetimeFit fit_lifetime(PresetKind kind, const std::vector<LifetimePoint>& curve, double s0,
                         double c_in);

/// First upward crossing of `level` by linear interpolation.
std::optional<double> first_crossing(const std::vector<double>& t, const std::vector<double>& y,
                                     double level);

LifetimeResult compute_lifetime(const ExperimentConfig& config, int threads = 1);

// allan ---------------------------------------------------------------------

struct ClockRun {
  InputState input{};
  ClockConfig config;
  FrequencyRecord record;
  AllanCurve curve;
};

struct AllanResult {
  std::vector<ClockRun> runs;  // css, squeezed
  SqlReference sql;
  SqlReference squeezed_reference;
};

std::vector<double> clock_taus(const ExperimentConfig& config, const FrequencyRecord& record);

ClockRun run_clock_curve(const ExperimentConfig& config, InputState input);

AllanResult compute_allan(const ExperimentConfig& config, int threads = 1);

// oracle-check --------------------------------------------------------------

struct OracleRow {
  double spin{0.0};
  double q_eff{0.0};
  double mu{0.0};
  double zeta_oracle{0.0};
  double zeta_gaussian{0.0};
  double rel_discrepancy{0.0};
  bool checked{true};  // false for the breakdown probe
};

struct OracleReport {
  std::vector<OracleRow> rows;
  double max_discrepancy{0.0};    // over checked rows
  double max_zero_mu_error{0.0};  // |zeta_oracle - zeta_gaussian| at mu = 0
  double breakdown_discrepancy{0.0};
  bool passed{false};
};

inline constexpr double kZeroMuTolerance = 1e-9;

OracleReport compute_oracle_check(const ExperimentConfig& config, int threads = 1);

// noise-selftest --------------------------------------------------------------

struct SelftestResult {
  AllanCurve white;
  AllanCurve random_walk;
  double white_slope{0.0};
  double random_walk_slope{0.0};
  bool passed{false};
};

inline constexpr std::int64_t kSelftestSamples = 1 << 17;

SelftestResult compute_noise_selftest(const ExperimentConfig& config);

// output ----------------------------------------------------------------------

void write_lifetime(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const LifetimeResult& result);
void write_allan(const std::filesystem::path& dir, const ExperimentConfig& config,
                 const AllanResult& result);
void write_oracle(const std::filesystem::path& dir, const ExperimentConfig& config,
                  const OracleReport& report);
void write_selftest(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const SelftestResult& result);

void print_summary(std::ostream& out, const LifetimeResult& result);
void print_summary(std::ostream& out, const AllanResult& result);
void print_summary(std::ostream& out, const OracleReport& report, const OracleSettings& settings);
void print_summary(std::ostream& out, const SelftestResult& result);

/// "%.8e"
std::string format_number(double value);

}  // namespace spinclock
