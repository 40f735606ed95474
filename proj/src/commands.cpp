#include "spinclock/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "spinclock/dicke.hpp"
#include "spinclock/rng.hpp"

#ifndef SPINCLOCK_VERSION
#define SPINCLOCK_VERSION "0.0.0"
#endif

namespace spinclock {

namespace {

// Sub-stream indices of the master seed.
constexpr std::uint64_t kLifetimeStream = 100;
constexpr std::uint64_t kClockStream = 200;
constexpr std::uint64_t kSelftestStream = 300;

constexpr std::int64_t kSelftestWhiteMaxM = 64;
constexpr std::int64_t kSelftestWalkMinM = 8;
constexpr std::int64_t kSelftestWalkMaxM = 1024;

std::string decisions(const ExperimentConfig& config) {
  std::string s;
  s += "detuning=per_shot_constant";
  s += std::string(" readout_subtraction=") + (config.lifetime.subtract_readout ? "on" : "off");
  s += " allan_estimator=overlapping";
  s += " allan_ci=chi2_white_fm_edf_68.27%";
  s += " drift_model=ornstein_uhlenbeck";
  s += " phase_estimator=asin_clamped";
  s += " echo_axis=reference_azimuth";
  s += " readout_pulse=phase_shifted_90deg";
  return s;
}

std::ofstream open_csv(const std::filesystem::path& dir, const std::string& name,
                       std::string_view command, const ExperimentConfig& config) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << "# spinclock " << version() << '\n';
  out << "# command: " << command << '\n';
  // The output location is left out so that files are identical wherever written.
  auto resolved = to_json(config);
  resolved.erase("output_dir");
  out << "# config: " << resolved.dump() << '\n';
  out << "# decisions: " << decisions(config) << '\n';
  return out;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "nan";
}

}  // namespace

std::string_view version() { return SPINCLOCK_VERSION; }

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8e", value);
  return buf;
}

std::vector<LifetimePoint> LifetimeResult::curve(PresetKind kind) const {
  std::vector<LifetimePoint> out;
  std::copy_if(points.begin(), points.end(), std::back_inserter(out),
               [kind](const LifetimePoint& p) { return p.preset == kind; });
  return out;
}

const LifetimeFit& LifetimeResult::fit(PresetKind kind) const {
  for (const auto& f : fits)
    if (f.preset == kind) return f;
  throw std::out_of_range("no lifetime fit for preset " + std::string(to_string(kind)));
}

std::optional<double> first_crossing(const std::vector<double>& t, const std::vector<double>& y,
                                     double level) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (y[i - 1] < level && y[i] >= level)
      return t[i - 1] + (level - y[i - 1]) * (t[i] - t[i - 1]) / (y[i] - y[i - 1]);
  }
  return std::nullopt;
}

LifetimeFit fit_lifetime(PresetKind kind, const std::vector<LifetimePoint>& curve, double s0,
                         double c_in) {
  if (curve.size() < 2) throw std::invalid_argument("fit_lifetime: need at least two points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : curve) {
    const double w = p.zeta_stderr > 0 ? 1.0 / (p.zeta_stderr * p.zeta_stderr) : 1.0;
    const double x = p.t_r * p.t_r;
    sw += w;
    sx += w * x;
    sy += w * p.zeta;
    sxx += w * x * x;
    sxy += w * x * p.zeta;
  }
  LifetimeFit fit;
  fit.preset = kind;
  const double det = sw * sxx - sx * sx;
  fit.curvature = (sw * sxy - sx * sy) / det;
  fit.zeta0 = (sy - fit.curvature * sx) / sw;
  fit.var_omega = fit.curvature / (2.0 * s0 * c_in);
  fit.t_equal = fit.curvature > 0 && fit.zeta0 > 0 ? std::sqrt(fit.zeta0 / fit.curvature)
                                                   : std::numeric_limits<double>::quiet_NaN();

  std::vector<double> t, z, zm;
  for (const auto& p : curve) {
    t.push_back(p.t_r);
    z.push_back(p.zeta);
    zm.push_back(p.moment_zeta);
  }
  fit.t_cross_one = first_crossing(t, z, 1.0);
  fit.t_cross_double = first_crossing(t, z, 2.0 * z.front());
  fit.t_cross_one_moment = first_crossing(t, zm, 1.0);
  return fit;
}

LifetimeResult compute_lifetime(const ExperimentConfig& config, int threads) {
  const PresetParams params = config.preset_params();
  const NoiseModel& noise = config.noise;
  const ZetaOptions options{config.lifetime.subtract_readout, noise.readout_var};
  LifetimeResult result;
  for (auto kind : kAllPresets) {
    // Same seed across the grid: common random numbers keep curves smooth.
    const std::uint64_t seed =
        derive_seed(config.master_seed, kLifetimeStream + static_cast<std::uint64_t>(kind));
    std::vector<LifetimePoint> curve;
    for (double t : config.lifetime.grid(kind).values()) {
      const Sequence seq = preset_sequence(kind, t, params);
      const auto shots = run_shots(seq, noise, config.lifetime.n_shots, seed, threads);
      const ZetaEstimate est = estimate_zeta(shots, params.c_in, params.s0, options);
      const MomentResult mom = propagate_moments(seq, noise);
      curve.push_back({kind, t, est.zeta, est.standard_error, est.contrast,
                       moment_zeta(mom, params.c_in, params.s0, options)});
    }
    result.fits.push_back(fit_lifetime(kind, curve, params.s0, params.c_in));
    result.points.insert(result.points.end(), curve.begin(), curve.end());
  }
  return result;
}

std::vector<double> clock_taus(const ExperimentConfig& config, const FrequencyRecord& record) {
  if (!config.clock.taus_s.empty()) return config.clock.taus_s;
  return octave_taus(record, 0.2);
}

ClockRun run_clock_curve(const ExperimentConfig& config, InputState input) {
  ClockRun run;
  run.input = input;
  run.config = config.clock_config(input);
  run.record = run_clock(run.config, derive_seed(config.master_seed,
                                                 kClockStream + static_cast<std::uint64_t>(input)));
  const auto taus = clock_taus(config, run.record);
  run.curve = allan_deviation(run.record, taus);
  return run;
}

AllanResult compute_allan(const ExperimentConfig& config, int threads) {
  AllanResult result;
  result.runs.resize(2);
  const InputState inputs[2] = {InputState::css, InputState::squeezed};
  if (threads > 1) {
    std::jthread other([&] { result.runs[1] = run_clock_curve(config, inputs[1]); });
    result.runs[0] = run_clock_curve(config, inputs[0]);
  } else {
    for (int i = 0; i < 2; ++i) result.runs[static_cast<std::size_t>(i)] = run_clock_curve(config, inputs[i]);
  }
  result.sql = sql_reference(result.runs[0].config);
  result.squeezed_reference = {result.sql.coefficient * std::sqrt(config.clock.zeta_net)};
  return result;
}

OracleReport compute_oracle_check(const ExperimentConfig& config, int threads) {
  const auto& o = config.oracle;
  std::vector<OracleRow> rows;
  for (double spin : o.spins) {
    checked_two_spin(spin);
    rows.push_back({spin, 0.0, 0.0, 0.0, 0.0, 0.0, true});
    for (int k = 1; k <= o.q_eff_points; ++k)
      rows.push_back({spin, o.q_eff_max * k / o.q_eff_points, 0.0, 0.0, 0.0, 0.0, true});
    if (o.breakdown_q_eff > 0) rows.push_back({spin, o.breakdown_q_eff, 0.0, 0.0, 0.0, 0.0, false});
  }

  auto evaluate = [](OracleRow& r) {
    constexpr double pi = std::numbers::pi;
    r.mu = r.q_eff / (2.0 * r.spin);
    const auto css = make_css(r.spin, pi / 2, 0.0, 1.0);
    r.zeta_gaussian = min_squeezing_parameter(shear(css, r.q_eff, 0.0), 1.0);
    const DickeState exact = evolve_oat(dicke_css(r.spin, pi / 2, 0.0), r.mu);
    r.zeta_oracle = min_transverse_zeta(moments(exact), r.spin, 1.0);
    r.rel_discrepancy = std::abs(r.zeta_gaussian - r.zeta_oracle) / r.zeta_oracle;
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, rows.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < rows.size(); i += n_threads) evaluate(rows[i]);
      });
  }

  OracleReport report;
  report.rows = std::move(rows);
  for (const auto& r : report.rows) {
    if (!r.checked) {
      report.breakdown_discrepancy = std::max(report.breakdown_discrepancy, r.rel_discrepancy);
    } else if (r.q_eff == 0.0) {
      report.max_zero_mu_error =
          std::max(report.max_zero_mu_error, std::abs(r.zeta_oracle - r.zeta_gaussian));
    } else {
      report.max_discrepancy = std::max(report.max_discrepancy, r.rel_discrepancy);
    }
  }
  report.passed =
      report.max_discrepancy < o.tolerance_rel && report.max_zero_mu_error < kZeroMuTolerance;
  return report;
}

SelftestResult compute_noise_selftest(const ExperimentConfig& config) {
  SelftestResult result;
  const std::uint64_t seed = derive_seed(config.master_seed, kSelftestStream);

  FrequencyRecord white{synthetic_white_noise(kSelftestSamples, 1.0, derive_seed(seed, 0)), 1.0, 0};
  FrequencyRecord walk{synthetic_random_walk(kSelftestSamples, 1.0, derive_seed(seed, 1)), 1.0, 0};
  std::vector<double> white_taus, walk_taus;
  for (std::int64_t m = 1; m <= kSelftestWhiteMaxM; m *= 2) white_taus.push_back(static_cast<double>(m));
  for (std::int64_t m = 1; m <= kSelftestWalkMaxM; m *= 2) walk_taus.push_back(static_cast<double>(m));
  result.white = allan_deviation(white, white_taus);
  result.random_walk = allan_deviation(walk, walk_taus);
  result.white_slope = loglog_slope(result.white, 1.0, static_cast<double>(kSelftestWhiteMaxM));
  result.random_walk_slope = loglog_slope(result.random_walk, static_cast<double>(kSelftestWalkMinM),
                                          static_cast<double>(kSelftestWalkMaxM));
  result.passed = std::abs(result.white_slope + 0.5) <= 0.02 &&
                  std::abs(result.random_walk_slope - 0.5) <= 0.05;
  return result;
}

void write_lifetime(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const LifetimeResult& result) {
  {
    auto out = open_csv(dir, "lifetime.csv", "lifetime", config);
    out << "preset,t_r_s,zeta,zeta_stderr,contrast\n";
    for (const auto& p : result.points)
      out << to_string(p.preset) << ',' << format_number(p.t_r) << ',' << format_number(p.zeta)
          << ',' << format_number(p.zeta_stderr) << ',' << format_number(p.contrast) << '\n';
  }
  auto out = open_csv(dir, "lifetime_fit.csv", "lifetime", config);
  out << "preset,zeta0,curvature_per_s2,var_omega_rad2_per_s2,delta_omega_hz,t_equal_s,"
         "t_cross_one_s,t_cross_double_s,t_cross_one_moment_s\n";
  for (const auto& f : result.fits) {
    const double delta_hz = f.var_omega > 0 ? std::sqrt(f.var_omega) / kTwoPi : 0.0;
    out << to_string(f.preset) << ',' << format_number(f.zeta0) << ','
        << format_number(f.curvature) << ',' << format_number(f.var_omega) << ','
        << format_number(delta_hz) << ',' << format_number(f.t_equal) << ','
        << optional_number(f.t_cross_one) << ',' << optional_number(f.t_cross_double) << ','
        << optional_number(f.t_cross_one_moment) << '\n';
  }
}

void write_allan(const std::filesystem::path& dir, const ExperimentConfig& config,
                 const AllanResult& result) {
  auto out = open_csv(dir, "allan.csv", "allan", config);
  for (const auto& run : result.runs)
    out << "# " << to_string(run.input) << ": duty_factor=" << format_number(duty_factor(run.config))
        << " fringe_excursions=" << run.record.fringe_excursions << '\n';
  out << "# reference rows: sql = projection limit at full contrast, "
         "squeezed_reference = sql * sqrt(zeta_net)\n";
  out << "input_state,tau_s,sigma,ci_lo,ci_hi\n";
  for (const auto& run : result.runs) {
    const auto& c = run.curve;
    for (std::size_t i = 0; i < c.taus.size(); ++i)
      out << to_string(run.input) << ',' << format_number(c.taus[i]) << ','
          << format_number(c.sigma[i]) << ',' << format_number(c.ci_lo[i]) << ','
          << format_number(c.ci_hi[i]) << '\n';
  }
  const auto& taus = result.runs.front().curve.taus;
  for (const auto& [name, ref] : {std::pair{"sql", result.sql},
                                  std::pair{"squeezed_reference", result.squeezed_reference}}) {
    for (double tau : taus) {
      const std::string v = format_number(ref(tau));
      out << name << ',' << format_number(tau) << ',' << v << ',' << v << ',' << v << '\n';
    }
  }
}

void write_oracle(const std::filesystem::path& dir, const ExperimentConfig& config,
                  const OracleReport& report) {
  auto out = open_csv(dir, "oracle.csv", "oracle-check", config);
  out << "spin,q_eff,mu,zeta_oracle,zeta_gaussian,rel_discrepancy,checked\n";
  for (const auto& r : report.rows)
    out << format_number(r.spin) << ',' << format_number(r.q_eff) << ',' << format_number(r.mu)
        << ',' << format_number(r.zeta_oracle) << ',' << format_number(r.zeta_gaussian) << ','
        << format_number(r.rel_discrepancy) << ',' << (r.checked ? 1 : 0) << '\n';
}

void write_selftest(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const SelftestResult& result) {
  auto out = open_csv(dir, "noise_selftest.csv", "noise-selftest", config);
  out << "# white_slope=" << format_number(result.white_slope)
      << " random_walk_slope=" << format_number(result.random_walk_slope) << '\n';
  out << "noise,tau_s,sigma,ci_lo,ci_hi\n";
  for (const auto& [name, c] :
       {std::pair{"white", &result.white}, std::pair{"random_walk", &result.random_walk}}) {
    for (std::size_t i = 0; i < c->taus.size(); ++i)
      out << name << ',' << format_number(c->taus[i]) << ',' << format_number(c->sigma[i]) << ','
          << format_number(c->ci_lo[i]) << ',' << format_number(c->ci_hi[i]) << '\n';
  }
}

void print_summary(std::ostream& out, const LifetimeResult& result) {
  for (const auto& f : result.fits) {
    out << to_string(f.preset) << ": zeta(0)=" << format_number(f.zeta0)
        << " delta_omega_hz=" << format_number(f.var_omega > 0 ? std::sqrt(f.var_omega) / kTwoPi : 0)
        << " t_equal_s=" << format_number(f.t_equal)
        << " t_cross_one_s=" << optional_number(f.t_cross_one) << '\n';
  }
}

void print_summary(std::ostream& out, const AllanResult& result) {
  for (const auto& run : result.runs) {
    const auto& c = run.curve;
    out << to_string(run.input) << ": sigma*sqrt(tau) at tau=" << format_number(c.taus.front())
        << " s: " << format_number(c.sigma.front() * std::sqrt(c.taus.front()))
        << ", fringe excursions " << run.record.fringe_excursions << '\n';
  }
  out << "sql coefficient " << format_number(result.sql.coefficient) << " s^1/2\n";
}

void print_summary(std::ostream& out, const OracleReport& report, const OracleSettings& settings) {
  out << "max relative zeta discrepancy (q_eff <= " << format_number(settings.q_eff_max)
      << "): " << format_number(report.max_discrepancy) << '\n';
  out << "mu = 0 absolute error: " << format_number(report.max_zero_mu_error) << '\n';
  if (settings.breakdown_q_eff > 0)
    out << "warning: Gaussian approximation at q_eff = " << format_number(settings.breakdown_q_eff)
        << " deviates by " << format_number(report.breakdown_discrepancy)
        << " (expected breakdown, not checked)\n";
  out << (report.passed ? "oracle check passed" : "oracle check FAILED") << '\n';
}

void print_summary(std::ostream& out, const SelftestResult& result) {
  out << "white slope " << format_number(result.white_slope) << " (expected -0.5 +/- 0.02)\n";
  out << "random walk slope " << format_number(result.random_walk_slope)
      << " (expected +0.5 +/- 0.05)\n";
  out << (result.passed ? "noise selftest passed" : "noise selftest FAILED") << '\n';
}

}  // namespace spinclock
