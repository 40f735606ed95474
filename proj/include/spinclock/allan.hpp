#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spinclock {

struct FrequencyRecord {
  std::vector<double> y;  // fractional frequency, one entry per cycle
  double t_cycle{1.0};
  std::int64_t fringe_excursions{0};
};

/// Overlapping Allan deviation with chi-squared confidence bounds (68.3 %,
/// white-FM equivalent degrees of freedom).
struct AllanCurve {
  std::vector<double> taus;
  std::vector<double> sigma;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<double> edf;
};

inline constexpr double kAllanConfidence = 0.6827;

AllanCurve allan_deviation(const FrequencyRecord& record, std::span<const double> taus);

/// Averaging factors 1, 2, 4, ... with 2 m <= max_fraction * record length.
std::vector<double> octave_taus(const FrequencyRecord& record, double max_fraction = 0.5);

/// Equivalent degrees of freedom of the overlapping estimator for white FM.
double overlapping_edf(std::int64_t n_samples, std::int64_t m);

/// Least-squares slope of log(sigma) against log(tau) over [tau_min, tau_max].
double loglog_slope(const AllanCurve& curve, double tau_min, double tau_max);

std::vector<double> synthetic_white_noise(std::int64_t n, double sigma, std::uint64_t seed);
std::vector<double> synthetic_random_walk(std::int64_t n, double step_sigma, std::uint64_t seed);

}  // namespace spinclock
