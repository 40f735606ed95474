// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "spinclock/commands.hpp"
#include "spinclock/rng.hpp"

using namespace spinclock;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << what << " | " << detail
            << std::endl;
}

std::vector<double> times_cycle(std::initializer_list<int> ms, double t_cycle) {
  std::vector<double> out;
  for (int m : ms) out.push_back(m * t_cycle);
  return out;
}

// First crossing of zeta = level by the propagated moments, by bisection.
double moment_crossing(PresetKind kind, const PresetParams& p, const NoiseModel& noise,
                       double level, double t_max) {
  auto z = [&](double t) {
    return moment_zeta(propagate_moments(preset_sequence(kind, t, p), noise), p.c_in, p.s0);
  };
  double lo = 0.0, hi = t_max;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (z(mid) < level ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const ExperimentConfig base;
  const PresetParams params = base.preset_params();

  // lifetime curves, shared by criteria 1-4
  const auto t0 = Clock::now();
  const LifetimeResult life = compute_lifetime(base, 1);
  const double life_runtime = seconds_since(t0);

  {
    const auto& f = life.fit(PresetKind::css_ramsey);
    const double delta_hz = std::sqrt(f.var_omega) / kTwoPi;
    const double input_hz = std::sqrt(base.noise.var_omega) / kTwoPi;
    const double dev = delta_hz / input_hz - 1;
    const double t_eq_dev = f.t_equal / 700e-6 - 1;
    const bool ok = std::abs(dev) < 0.10 && std::abs(t_eq_dev) < 0.15 && life_runtime < 60;
    report(1, ok, "CSS phase-noise law",
           "fitted delta_omega = 2pi x " + fmt("%.4f", delta_hz) + " Hz (" +
               fmt("%+.1f", 100 * dev) + "% vs input, limit 10%); classical = projection at " +
               fmt("%.0f", f.t_equal * 1e6) + " us (" + fmt("%+.1f", 100 * t_eq_dev) +
               "% vs 700 us, limit 15%); runtime " + fmt("%.1f", life_runtime) +
               " s for all four presets at 1e4 shots/point");
  }

  const auto& phase_fit = life.fit(PresetKind::phase_squeezed_ramsey);
  const auto& number_fit = life.fit(PresetKind::number_squeezed_hold);
  {
    NoiseModel no_decay = base.noise;
    no_decay.t_coh = 1e9;
    const double analytic =
        moment_crossing(PresetKind::phase_squeezed_ramsey, params, no_decay, 1.0, 5e-3);
    const double closed = std::sqrt((1 - 0.4) / (2 * params.s0 * params.c_in * base.noise.var_omega));
    const double mc = phase_fit.t_cross_one.value_or(NAN);
    const bool ok = std::abs(analytic / closed - 1) < 1e-6 && std::abs(analytic / 577e-6 - 1) < 0.01 &&
                    std::abs(mc / 600e-6 - 1) < 0.15;
    report(2, ok, "phase-squeezed lifetime",
           "analytic crossing (no contrast decay) " + fmt("%.1f", analytic * 1e6) +
               " us (577 us expected); Monte Carlo crossing with T_coh = 11 ms " +
               fmt("%.1f", mc * 1e6) + " us (" + fmt("%+.1f", 100 * (mc / 600e-6 - 1)) +
               "% vs 600 us, limit 15%)");
  }
  {
    const double mc = number_fit.t_cross_one.value_or(NAN);
    const double ratio = mc / phase_fit.t_cross_one.value_or(NAN);
    const bool ok = std::abs(mc / 5e-3 - 1) < 0.20 && std::abs(ratio - 8) <= 2;
    report(3, ok, "number-squeezed lifetime",
           "crossing " + fmt("%.2f", mc * 1e3) + " ms (" + fmt("%+.1f", 100 * (mc / 5e-3 - 1)) +
               "% vs 5.0 ms, limit 20%); lifetime ratio number:phase " + fmt("%.2f", ratio) +
               " (8 +/- 2)");
  }
  {
    ExperimentConfig quiet = base;
    quiet.noise.var_omega = 0.0;
    const auto calm = compute_lifetime(quiet, 1).curve(PresetKind::echo_ramsey);
    const auto loud = life.curve(PresetKind::echo_ramsey);
    double zeta_2ms = NAN, zeta_2ms_se = NAN, worst = 0.0;
    for (std::size_t i = 0; i < loud.size(); ++i) {
      if (std::abs(loud[i].t_r - 2e-3) < 1e-12) {
        zeta_2ms = loud[i].zeta;
        zeta_2ms_se = loud[i].zeta_stderr;
      }
      const double se = std::hypot(loud[i].zeta_stderr, calm[i].zeta_stderr);
      worst = std::max(worst, std::abs(loud[i].zeta - calm[i].zeta) / se);
    }
    const bool ok = zeta_2ms < 1.0 && worst < 3.0;
    report(4, ok, "spin-echo protection",
           "zeta(2 ms) = " + fmt("%.3f", zeta_2ms) + " +/- " + fmt("%.3f", zeta_2ms_se) +
               " with delta_omega = 2pi x 1.3 Hz; max |zeta(Var) - zeta(0)| = " +
               fmt("%.2e", worst) + " combined standard errors over the echo curve");
  }

  {
    const auto start = Clock::now();
    ExperimentConfig c = base;
    c.clock.drift.enabled = false;
    c.clock.css_contrast = 1.0;
    c.clock.n_cycles = 20000;
    const ClockConfig cc = c.clock_config(InputState::css);
    const auto rec = run_clock(cc, derive_seed(c.master_seed, 501));
    const auto curve =
        allan_deviation(rec, times_cycle({1, 2, 3, 5, 10, 20, 30, 50, 100}, cc.t_cycle));
    const double target = 1.85e-9;
    double wsum = 0, level = 0;
    bool bands = true;
    std::string points;
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
      const double r = std::sqrt(curve.taus[i]);
      wsum += curve.edf[i];
      level += curve.edf[i] * curve.sigma[i] * r;
      bands = bands && curve.ci_hi[i] * r >= 0.95 * target && curve.ci_lo[i] * r <= 1.05 * target;
      points += fmt(" %.0f:", curve.taus[i]) + fmt("%.3g", curve.sigma[i] * r);
    }
    level /= wsum;
    const double runtime = seconds_since(start);
    const bool ok = std::abs(level / target - 1) < 0.05 && bands && runtime < 60;
    report(5, ok, "Allan SQL line",
           "weighted sigma*sqrt(tau) over 9-900 s = " + fmt("%.4g", level) + " s^1/2 (" +
               fmt("%+.1f", 100 * (level / target - 1)) +
               "% vs 1.85e-9, limit 5%); every 68% CI overlaps the 5% band: " +
               (bands ? "yes" : "no") + "; points" + points + "; runtime " + fmt("%.2f", runtime) +
               " s");
  }

  const AllanResult allan = compute_allan(base, 1);
  {
    const auto& css = allan.runs[0];
    const auto& sq = allan.runs[1];
    const auto small = times_cycle({1, 2}, base.clock.t_cycle);
    const auto a = allan_deviation(css.record, small);
    const auto b = allan_deviation(sq.record, small);
    const double ratio = std::pow(a.sigma[0] / b.sigma[0], 2);
    const double ratio_lo = std::pow(a.ci_lo[0] / b.ci_hi[0], 2);
    const double ratio_hi = std::pow(a.ci_hi[0] / b.ci_lo[0], 2);
    const double ratio18 = std::pow(a.sigma[1] / b.sigma[1], 2);
    const double level = b.sigma[0] * std::sqrt(b.taus[0]);
    const double contrast = sq.config.contrast * sq.config.squeeze.contrast_factor;
    const bool ok = std::abs(ratio - 2.8) <= 0.3 && std::abs(level / 1.1e-9 - 1) < 0.10;
    report(6, ok, "squeezed clock gain",
           "Allan variance ratio CSS:squeezed at 9 s = " + fmt("%.3f", ratio) + " (68% range " +
               fmt("%.2f", ratio_lo) + "-" + fmt("%.2f", ratio_hi) + "), at 18 s = " +
               fmt("%.3f", ratio18) + " (2.8 +/- 0.3); squeezed sigma*sqrt(tau) at 9 s = " +
               fmt("%.4g", level) + " (" + fmt("%+.1f", 100 * (level / 1.1e-9 - 1)) +
               "% vs 1.1e-9, limit 10%); squeezed contrast " + fmt("%.2f", contrast) +
               ", drift on");
  }
  {
    const auto& sq = allan.runs[1];
    const auto taus = times_cycle({12, 16, 24, 32, 50, 64, 100}, base.clock.t_cycle);
    const auto c = allan_deviation(sq.record, taus);
    bool inside = true;
    std::string points;
    for (std::size_t i = 0; i < c.taus.size(); ++i) {
      inside = inside && c.sigma[i] >= 0.5e-10 && c.sigma[i] <= 2e-10;
      points += fmt(" %.0f:", c.taus[i]) + fmt("%.3g", c.sigma[i]);
    }
    const double slope = loglog_slope(c, 100, 900);
    const bool ok = inside && slope > -0.45;
    report(7, ok, "drift floor",
           "squeezed clock, OU drift 0.7 Hz / 200 s, tau 108-900 s within [5e-11, 2e-10]: " +
               std::string(inside ? "yes" : "no") + ";" + points + "; log-log slope " +
               fmt("%.3f", slope) + " (white line -0.5)");
  }

  {
    const auto start = Clock::now();
    const auto r = compute_oracle_check(base, 1);
    const double runtime = seconds_since(start);
    const bool ok = r.passed && r.max_discrepancy < 0.05 && r.max_zero_mu_error < 1e-9 &&
                    runtime < 10;
    report(8, ok, "oracle equivalence",
           "S in {25, 50, 100}, q_eff <= 1: max relative zeta discrepancy " +
               fmt("%.4f", r.max_discrepancy) + " (limit 0.05); mu = 0 error " +
               fmt("%.1e", r.max_zero_mu_error) + " (limit 1e-9); q_eff = 3 breakdown warning " +
               fmt("%.3f", r.breakdown_discrepancy) + "; runtime " + fmt("%.2f", runtime) + " s");
  }
  {
    const auto r = compute_noise_selftest(base);
    report(9, r.passed, "estimator self-test",
           "white slope " + fmt("%.4f", r.white_slope) + " (-0.5 +/- 0.02), random walk slope " +
               fmt("%.4f", r.random_walk_slope) + " (+0.5 +/- 0.05)");
  }
  {
    const auto root = std::filesystem::temp_directory_path() / "spinclock_acceptance";
    std::filesystem::remove_all(root);
    for (int threads : {1, 4, 16}) {
      ExperimentConfig c = base;
      const auto dir = root / std::to_string(threads);
      write_lifetime(dir, c, compute_lifetime(c, threads));
      write_allan(dir, c, compute_allan(c, threads));
      write_oracle(dir, c, compute_oracle_check(c, threads));
      write_selftest(dir, c, compute_noise_selftest(c));
    }
    bool same = true;
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(root / "1")) {
      const auto name = entry.path().filename();
      const auto ref = slurp(entry.path());
      same = same && !ref.empty() && ref == slurp(root / "4" / name) && ref == slurp(root / "16" / name);
      ++files;
    }
    std::filesystem::remove_all(root);
    report(10, same && files == 5, "determinism",
           std::to_string(files) + " output files byte-identical across 1, 4 and 16 threads: " +
               (same ? "yes" : "no"));
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
