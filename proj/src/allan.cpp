#include "spinclock/allan.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "spinclock/rng.hpp"

namespace spinclock {

double overlapping_edf(std::int64_t n_samples, std::int64_t m) {
  const auto big_m = static_cast<double>(n_samples);
  const auto dm = static_cast<double>(m);
  const double edf =
      (3.0 * (big_m - 1.0) / (2.0 * dm) - 2.0 * (big_m - 2.0) / big_m) * 4.0 * dm * dm /
      (4.0 * dm * dm + 5.0);
  return std::max(edf, 1.0);
}

AllanCurve allan_deviation(const FrequencyRecord& record, std::span<const double> taus) {
  if (!(record.t_cycle > 0)) throw std::invalid_argument("allan_deviation: t_cycle must be > 0");
  const auto n = static_cast<std::int64_t>(record.y.size());
  std::vector<long double> prefix(record.y.size() + 1, 0.0L);
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(record.y[static_cast<std::size_t>(i)]))
      throw std::invalid_argument("allan_deviation: non-finite record entry");
    prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + record.y[static_cast<std::size_t>(i)];
  }

  AllanCurve curve;
  double previous = 0.0;
  for (const double tau : taus) {
    const double ratio = tau / record.t_cycle;
    const auto m = static_cast<std::int64_t>(std::llround(ratio));
    if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio))
      throw std::invalid_argument("allan_deviation: tau " + std::to_string(tau) +
                                  " is not a positive multiple of t_cycle");
    if (!curve.taus.empty() && !(tau > previous))
      throw std::invalid_argument("allan_deviation: taus must be strictly increasing");
    if (n < 2 * m)
      throw std::invalid_argument("allan_deviation: record too short for tau " +
                                  std::to_string(tau));
    previous = tau;

    long double acc = 0.0L;
    for (std::int64_t j = 0; j + 2 * m <= n; ++j) {
      const auto u = static_cast<std::size_t>(j);
      const auto um = static_cast<std::size_t>(m);
      const long double d = (prefix[u + 2 * um] - prefix[u + um]) - (prefix[u + um] - prefix[u]);
      acc += d * d;
    }
    const double terms = static_cast<double>(n - 2 * m + 1);
    const double var = static_cast<double>(acc) / (2.0 * static_cast<double>(m * m) * terms);
    const double sigma = std::sqrt(var);
    const double edf = overlapping_edf(n, m);
    boost::math::chi_squared_distribution<double> chi2(edf);
    const double alpha = 1.0 - kAllanConfidence;
    curve.taus.push_back(tau);
    curve.sigma.push_back(sigma);
    curve.edf.push_back(edf);
    curve.ci_lo.push_back(sigma * std::sqrt(edf / boost::math::quantile(chi2, 1.0 - alpha / 2)));
    curve.ci_hi.push_back(sigma * std::sqrt(edf / boost::math::quantile(chi2, alpha / 2)));
  }
  return curve;
}

std::vector<double> octave_taus(const FrequencyRecord& record, double max_fraction) {
  std::vector<double> taus;
  const auto n = static_cast<double>(record.y.size());
  for (std::int64_t m = 1; 2.0 * static_cast<double>(m) <= max_fraction * n; m *= 2)
    taus.push_back(static_cast<double>(m) * record.t_cycle);
  return taus;
}

double loglog_slope(const AllanCurve& curve, double tau_min, double tau_max) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < curve.taus.size(); ++i) {
    if (curve.taus[i] < tau_min || curve.taus[i] > tau_max || !(curve.sigma[i] > 0)) continue;
    const double x = std::log(curve.taus[i]);
    const double y = std::log(curve.sigma[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  if (k < 2) throw std::invalid_argument("loglog_slope: fewer than two points in range");
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::vector<double> synthetic_white_noise(std::int64_t n, double sigma, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = normal(rng);
  return y;
}

std::vector<double> synthetic_random_walk(std::int64_t n, double step_sigma, std::uint64_t seed) {
  auto y = synthetic_white_noise(n, step_sigma, seed);
  for (std::size_t i = 1; i < y.size(); ++i) y[i] += y[i - 1];
  return y;
}

}  // namespace spinclock
