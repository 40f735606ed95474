#include "spinclock/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "spinclock/rng.hpp"

namespace spinclock {

namespace {

constexpr double kPi = std::numbers::pi;

// Runs a sequence up to (not including) the readout draw. The detuning
// lever is the linear response of the mean spin to the frozen detuning,
// used only by the moment propagation.
class Executor {
 public:
  Executor(const NoiseModel& noise, double detuning) : noise_(noise), detuning_(detuning) {}

  void run(const Sequence& sequence) {
    for (const auto& s : sequence) std::visit(*this, s);
  }

  void operator()(const step::Pump& p) {
    state_ = make_css(p.s0, p.theta, p.phi, p.contrast);
    state_.detuning_offset = detuning_;
    lever_.setZero();
    reference_phi_.reset();
  }

  void operator()(const step::Pulse& p) { rotate_by(rotation_matrix(p.axis, p.angle)); }

  void operator()(const step::Shear& s) {
    state_ = shear(state_, s.q, s.excess_area, s.contrast_factor);
    lever_ = shear_matrix(s.q) * lever_;
  }

  void operator()(const step::Wait& w) {
    if (!reference_phi_) reference_phi_ = state_.mean_phi;
    const double c_old = state_.contrast;
    state_ = apply_contrast_decay(state_, w.duration, noise_.t_coh, noise_.decay_shape);
    state_ = advance_phase(state_, w.duration);
    const double ratio = c_old > 0 ? state_.contrast / c_old : 0.0;
    lever_ *= ratio;
    lever_(1) += state_.mean_length() * std::sin(state_.mean_theta) * w.duration;
  }

  void operator()(const step::Echo&) {
    const double phi = reference_phi_.value_or(state_.mean_phi);
    const Eigen::Vector3d axis(std::cos(phi), std::sin(phi), 0.0);
    rotate_by(rotation_matrix(axis, kPi));
  }

  void operator()(const step::Readout&) {}

  const SpinState& state() const { return state_; }
  const Eigen::Vector2d& lever() const { return lever_; }

 private:
  void rotate_by(const Eigen::Matrix3d& r) {
    const auto t = transport_frame(state_.mean_theta, state_.mean_phi, r);
    state_.mean_theta = t.theta;
    state_.mean_phi = t.phi;
    state_.cov = t.map * state_.cov * t.map.transpose();
    state_.cov = (state_.cov + state_.cov.transpose()) / 2;
    lever_ = t.map * lever_;
  }

  const NoiseModel& noise_;
  double detuning_;
  SpinState state_{};
  Eigen::Vector2d lever_{Eigen::Vector2d::Zero()};
  std::optional<double> reference_phi_;
};

}  // namespace

void validate(const NoiseModel& noise) {
  if (!(noise.var_omega >= 0)) throw std::invalid_argument("var_omega must be >= 0");
  if (!(noise.t_coh > 0)) throw std::invalid_argument("t_coh must be > 0");
  if (!(noise.readout_var >= 0)) throw std::invalid_argument("readout_var must be >= 0");
  if (!(noise.drift.amplitude >= 0)) throw std::invalid_argument("drift amplitude must be >= 0");
  if (!(noise.drift.correlation_time_s > 0))
    throw std::invalid_argument("drift correlation time must be > 0");
}

std::string_view to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::css_ramsey: return "css_ramsey";
    case PresetKind::phase_squeezed_ramsey: return "phase_squeezed_ramsey";
    case PresetKind::number_squeezed_hold: return "number_squeezed_hold";
    case PresetKind::echo_ramsey: return "echo_ramsey";
  }
  return "unknown";
}

PresetKind preset_kind_from_string(std::string_view name) {
  for (auto kind : {PresetKind::css_ramsey, PresetKind::phase_squeezed_ramsey,
                    PresetKind::number_squeezed_hold, PresetKind::echo_ramsey})
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown preset kind: " + std::string(name));
}

SqueezeSettings calibrated_squeeze(double target_zeta, double excess_area,
                                   double contrast_factor) {
  if (!(target_zeta > 0)) throw std::invalid_argument("target zeta must be positive");
  if (!(excess_area >= 0)) throw std::invalid_argument("excess_area must be >= 0");
  if (!(contrast_factor > 0)) throw std::invalid_argument("contrast factor must be positive");
  // Normalized covariance [[1, q], [q, 1 + q^2 + e]] has determinant 1 + e,
  // so its small eigenvalue x obeys x + (1 + e)/x = 2 + q^2 + e.
  const double x = target_zeta * contrast_factor * contrast_factor;
  const double q2 = x + (1.0 + excess_area) / x - 2.0 - excess_area;
  if (q2 < 0)
    throw std::invalid_argument("target zeta not reachable with this excess area and contrast");
  return {std::sqrt(q2), excess_area, contrast_factor};
}

double orientation_angle(const PresetParams& params, bool narrow_along_phase) {
  const auto css = make_css(params.s0, kPi / 2, 0.0, params.c_in);
  const auto sheared = shear(css, params.squeeze.q, params.squeeze.excess_area,
                             params.squeeze.contrast_factor);
  const Eigen::Vector2d narrow = narrow_axis(sheared.cov);
  // A rotation by alpha about the mean spin moves a tangent direction at
  // angle gamma (from the z axis towards phi) to gamma - alpha.
  const double gamma = std::atan2(narrow(1), narrow(0));
  const double target = narrow_along_phase ? kPi / 2 : 0.0;
  return std::remainder(gamma - target, kPi);
}

Sequence preset_sequence(PresetKind kind, double t_r, const PresetParams& params) {
  if (!(t_r >= 0)) throw std::invalid_argument("preset_sequence: t_r must be >= 0");
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d minus_y = -Eigen::Vector3d::UnitY();

  Sequence seq;
  seq.push_back(step::Pump{kPi, 0.0, params.s0, params.c_in});
  seq.push_back(step::Pulse{minus_y, kPi / 2});  // spin-down -> +x
  const bool squeezed = kind != PresetKind::css_ramsey;
  if (squeezed) {
    seq.push_back(step::Shear{params.squeeze.q, params.squeeze.excess_area,
                              params.squeeze.contrast_factor});
    const bool along_phase = kind != PresetKind::number_squeezed_hold;
    seq.push_back(step::Pulse{x, orientation_angle(params, along_phase)});
  }
  if (kind == PresetKind::echo_ramsey) {
    seq.push_back(step::Wait{t_r / 2});
    seq.push_back(step::Echo{});
    seq.push_back(step::Wait{t_r / 2});
  } else {
    seq.push_back(step::Wait{t_r});
  }
  // The readout pulse is phase-shifted by 90 degrees from the first pulse so
  // that the accrued phase maps onto S_z.
  if (kind != PresetKind::number_squeezed_hold) seq.push_back(step::Pulse{x, kPi / 2});
  seq.push_back(step::Readout{});
  return seq;
}

void validate_sequence(const Sequence& sequence) {
  if (sequence.empty() || !std::holds_alternative<step::Pump>(sequence.front()))
    throw std::invalid_argument("sequence must start with a Pump step");
  const auto readouts = std::count_if(sequence.begin(), sequence.end(), [](const auto& s) {
    return std::holds_alternative<step::Readout>(s);
  });
  if (readouts != 1 || !std::holds_alternative<step::Readout>(sequence.back()))
    throw std::invalid_argument("sequence must contain exactly one terminal Readout");
  for (const auto& s : sequence)
    if (const auto* w = std::get_if<step::Wait>(&s); w && !(w->duration >= 0))
      throw std::invalid_argument("sequence contains a negative Wait duration");
}

SpinState execute_shot(const Sequence& sequence, const NoiseModel& noise, double detuning) {
  validate_sequence(sequence);
  Executor exec(noise, detuning);
  exec.run(sequence);
  return exec.state();
}

std::vector<ShotResult> run_shots(const Sequence& sequence, const NoiseModel& noise,
                                  std::int64_t n_shots, std::uint64_t master_seed,
                                  int threads) {
  if (n_shots < 1) throw std::invalid_argument("run_shots: n_shots must be >= 1");
  validate_sequence(sequence);
  validate(noise);
  std::vector<ShotResult> results(static_cast<std::size_t>(n_shots));
  const double sigma = std::sqrt(noise.var_omega);

  auto work = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      auto rng = make_stream(master_seed, static_cast<std::uint64_t>(i));
      std::normal_distribution<double> standard(0.0, 1.0);
      // Always drawn, so the readout draw does not depend on var_omega.
      const double detuning = sigma * standard(rng);
      Executor exec(noise, detuning);
      exec.run(sequence);
      const auto& state = exec.state();
      results[static_cast<std::size_t>(i)] = {measure_sz(state, noise.readout_var, rng),
                                              state.contrast, detuning, i};
    }
  };

  const std::int64_t n_threads =
      std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(1, n_shots));
  if (n_threads == 1) {
    work(0, n_shots);
    return results;
  }
  {
    std::vector<std::jthread> pool;
    const std::int64_t chunk = (n_shots + n_threads - 1) / n_threads;
    for (std::int64_t t = 0; t < n_threads; ++t) {
      const std::int64_t begin = t * chunk;
      const std::int64_t end = std::min(n_shots, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  return results;
}

MomentResult propagate_moments(const Sequence& sequence, const NoiseModel& noise) {
  validate_sequence(sequence);
  validate(noise);
  Executor exec(noise, 0.0);
  exec.run(sequence);
  MomentResult out;
  out.state = exec.state();
  out.detuning_lever = exec.lever();
  const Eigen::Matrix2d total =
      out.state.cov + noise.var_omega * out.detuning_lever * out.detuning_lever.transpose();
  const double s = std::sin(out.state.mean_theta);
  out.sz_mean = out.state.mean_length() * std::cos(out.state.mean_theta);
  out.sz_var = s * s * total(0, 0) + noise.readout_var;
  return out;
}

ZetaEstimate estimate_zeta(std::span<const ShotResult> results, double c_in, double s0,
                           const ZetaOptions& options) {
  const auto n = static_cast<double>(results.size());
  if (results.size() < 2) throw std::invalid_argument("estimate_zeta: need at least 2 shots");
  double mean = 0.0;
  double contrast = 0.0;
  for (const auto& r : results) {
    mean += r.sz_sample;
    contrast += r.contrast_at_readout;
  }
  mean /= n;
  contrast /= n;
  if (!(contrast > 0)) throw DegenerateStateError("estimate_zeta: zero contrast");
  double ss = 0.0;
  for (const auto& r : results) ss += (r.sz_sample - mean) * (r.sz_sample - mean);
  const double sample_var = ss / (n - 1.0);
  const double var = options.subtract_readout ? sample_var - options.readout_var : sample_var;
  const double norm = 2.0 * c_in / (s0 * contrast * contrast);
  // Var(s^2) = 2 sigma^4 / (n - 1) for Gaussian samples.
  return {norm * var, norm * sample_var * std::sqrt(2.0 / (n - 1.0)), contrast};
}

double moment_zeta(const MomentResult& moments, double c_in, double s0,
                   const ZetaOptions& options) {
  if (!(moments.state.contrast > 0)) throw DegenerateStateError("moment_zeta: zero contrast");
  const double var =
      options.subtract_readout ? moments.sz_var - options.readout_var : moments.sz_var;
  const double c = moments.state.contrast;
  return 2.0 * var * c_in / (s0 * c * c);
}

}  // namespace spinclock
