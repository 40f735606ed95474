#pragma once

// Gaussian collective-spin state of a large two-level ensemble.
//
// The state is described by its mean direction (polar angle from +z,
// azimuth), its contrast C (so that |<S>| = C s0), and the 2x2 covariance
// of the transverse fluctuations expressed in the local tangent frame at
// the mean direction. The tangent frame is ordered (dS_z', dS_phi'):
//   e1 = -e_theta  (towards decreasing polar angle, i.e. +z at the equator)
//   e2 =  e_phi    (towards increasing azimuth)
//
// All channels are pure functions returning a new state.

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace spinclock {

class DegenerateStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class ContrastDecayShape { exponential, gaussian };

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar = double>
struct CollectiveSpinState {
  Scalar s0{1};
  Scalar mean_theta{0};
  Scalar mean_phi{0};
  Scalar contrast{1};
  Matrix2<Scalar> cov{Matrix2<Scalar>::Zero()};
  // Per-shot frozen classical detuning (rad/s); zero for moment calculations.
  Scalar detuning_offset{0};

  Scalar mean_length() const { return contrast * s0; }

  Vector3<Scalar> mean_direction() const {
    using std::cos;
    using std::sin;
    return {sin(mean_theta) * cos(mean_phi), sin(mean_theta) * sin(mean_phi),
            cos(mean_theta)};
  }
};

using SpinState = CollectiveSpinState<double>;

/// Columns are the tangent-frame axes (e1, e2) at direction (theta, phi).
/// Well defined at the poles because phi is carried explicitly.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 2> tangent_frame(Scalar theta, Scalar phi) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, 3, 2> frame;
  frame.col(0) << -cos(theta) * cos(phi), -cos(theta) * sin(phi), sin(theta);
  frame.col(1) << -sin(phi), cos(phi), Scalar(0);
  return frame;
}

/// Mean direction and tangent map after applying a 3x3 rotation.
template <typename Scalar>
struct FrameTransport {
  Scalar theta;
  Scalar phi;
  Matrix2<Scalar> map;  // new tangent coords = map * old tangent coords
};

template <typename Scalar>
FrameTransport<Scalar> transport_frame(Scalar theta, Scalar phi,
                                       const Matrix3<Scalar>& rotation) {
  using std::atan2;
  using std::hypot;
  using std::remainder;
  const Vector3<Scalar> n{std::sin(theta) * std::cos(phi),
                          std::sin(theta) * std::sin(phi), std::cos(theta)};
  const Vector3<Scalar> m = rotation * n;
  const Scalar rho = hypot(m.x(), m.y());
  FrameTransport<Scalar> out;
  out.theta = atan2(rho, m.z());
  if (rho < Scalar(1e-12)) {
    // At a pole the azimuth is a free label; keep the old one.
    out.phi = phi;
  } else {
    const Scalar raw = atan2(m.y(), m.x());
    out.phi = phi + remainder(raw - phi, 2 * std::numbers::pi_v<Scalar>);
  }
  const auto old_frame = tangent_frame(theta, phi);
  const auto new_frame = tangent_frame(out.theta, out.phi);
  out.map = new_frame.transpose() * rotation * old_frame;
  return out;
}

template <typename Scalar>
CollectiveSpinState<Scalar> make_css(Scalar s0, Scalar theta, Scalar phi,
                                     Scalar contrast) {
  if (!(s0 > 0)) throw std::invalid_argument("make_css: s0 must be positive");
  if (!(contrast >= 0 && contrast <= 1))
    throw std::invalid_argument("make_css: contrast must lie in [0, 1]");
  CollectiveSpinState<Scalar> state;
  state.s0 = s0;
  state.mean_theta = theta;
  state.mean_phi = phi;
  state.contrast = contrast;
  const Scalar v = contrast * s0 / 2;
  state.cov = Matrix2<Scalar>::Identity() * v;
  return state;
}

template <typename Scalar>
Matrix3<Scalar> rotation_matrix(const Vector3<Scalar>& axis, Scalar angle) {
  using std::abs;
  const Scalar norm = axis.norm();
  if (!(norm > 0)) throw std::invalid_argument("rotation axis has zero length");
  if (abs(norm - 1) > Scalar(1e-9))
    throw std::invalid_argument("rotation axis must be normalized");
  return Eigen::AngleAxis<Scalar>(angle, axis / norm).toRotationMatrix();
}

/// Right-handed rotation of the whole state about `axis`.
template <typename Scalar>
CollectiveSpinState<Scalar> rotate(const CollectiveSpinState<Scalar>& state,
                                   const Vector3<Scalar>& axis, Scalar angle) {
  const auto transport =
      transport_frame(state.mean_theta, state.mean_phi, rotation_matrix(axis, angle));
  auto out = state;
  out.mean_theta = transport.theta;
  out.mean_phi = transport.phi;
  out.cov = transport.map * state.cov * transport.map.transpose();
  out.cov = (out.cov + out.cov.transpose()) / 2;
  return out;
}

template <typename Scalar>
Matrix2<Scalar> shear_matrix(Scalar q) {
  Matrix2<Scalar> m;
  m << 1, 0, q, 1;
  return m;
}

/// S_z-dependent phase shear: dS_phi' = dS_phi + q dS_z, plus an excess
/// phase-quadrature variance excess_area * v0 (v0 = C s0 / 2 before shear).
/// Requires an equatorial mean spin.
template <typename Scalar>
CollectiveSpinState<Scalar> shear(const CollectiveSpinState<Scalar>& state, Scalar q,
                                  Scalar excess_area, Scalar contrast_factor = 1) {
  using std::abs;
  if (abs(state.mean_theta - std::numbers::pi_v<Scalar> / 2) > Scalar(1e-6))
    throw std::invalid_argument("shear: mean spin is not in the equatorial plane");
  if (!(excess_area >= 0))
    throw std::invalid_argument("shear: excess_area must be non-negative");
  if (!(contrast_factor >= 0) || state.contrast * contrast_factor > 1)
    throw std::invalid_argument("shear: contrast factor out of range");
  const Scalar v0 = state.contrast * state.s0 / 2;
  const Matrix2<Scalar> m = shear_matrix(q);
  auto out = state;
  out.cov = m * state.cov * m.transpose();
  out.cov(1, 1) += excess_area * v0;
  out.contrast = state.contrast * contrast_factor;
  return out;
}

/// zeta = 2 Var(S_perp) c_in / (s0 C^2) along a tangent-frame direction.
template <typename Scalar>
Scalar squeezing_parameter(const CollectiveSpinState<Scalar>& state, Scalar c_in,
                           const Vector2<Scalar>& direction) {
  using std::abs;
  if (abs(direction.norm() - 1) > Scalar(1e-9))
    throw std::invalid_argument("squeezing_parameter: direction must be normalized");
  if (!(state.contrast > 0))
    throw DegenerateStateError("squeezing_parameter: zero contrast");
  const Scalar var = direction.dot(state.cov * direction);
  return 2 * var * c_in / (state.s0 * state.contrast * state.contrast);
}

/// Unit tangent direction of the narrowest covariance axis.
template <typename Scalar>
Vector2<Scalar> narrow_axis(const Matrix2<Scalar>& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix2<Scalar>> solver(cov);
  return solver.eigenvectors().col(0);
}

template <typename Scalar>
Scalar min_squeezing_parameter(const CollectiveSpinState<Scalar>& state, Scalar c_in) {
  return squeezing_parameter(state, c_in, narrow_axis(state.cov));
}

/// Ensemble-moment phase diffusion: cov_phiphi += (C s0)^2 Var(omega) t^2.
template <typename Scalar>
CollectiveSpinState<Scalar> apply_phase_diffusion(const CollectiveSpinState<Scalar>& state,
                                                  Scalar var_omega, Scalar t) {
  if (!(t >= 0)) throw std::invalid_argument("apply_phase_diffusion: negative time");
  if (!(var_omega >= 0))
    throw std::invalid_argument("apply_phase_diffusion: negative variance");
  auto out = state;
  const Scalar length = state.mean_length();
  out.cov(1, 1) += length * length * var_omega * t * t;
  return out;
}

/// Monte Carlo counterpart of apply_phase_diffusion: free precession at the
/// per-shot detuning. A rotation about z carries the tangent frame onto
/// itself, so only the azimuth moves.
template <typename Scalar>
CollectiveSpinState<Scalar> advance_phase(const CollectiveSpinState<Scalar>& state,
                                          Scalar t) {
  if (!(t >= 0)) throw std::invalid_argument("advance_phase: negative time");
  auto out = state;
  out.mean_phi += state.detuning_offset * t;
  return out;
}

template <typename Scalar>
Scalar contrast_decay_factor(Scalar t, Scalar t_coh,
                             ContrastDecayShape shape = ContrastDecayShape::exponential) {
  using std::exp;
  if (!(t >= 0)) throw std::invalid_argument("contrast decay: negative time");
  if (!(t_coh > 0)) throw std::invalid_argument("contrast decay: t_coh must be positive");
  const Scalar x = t / t_coh;
  return shape == ContrastDecayShape::exponential ? exp(-x) : exp(-x * x);
}

/// Single-atom dephasing: contrast shrinks, transverse covariance is kept.
template <typename Scalar>
CollectiveSpinState<Scalar> apply_contrast_decay(
    const CollectiveSpinState<Scalar>& state, Scalar t, Scalar t_coh,
    ContrastDecayShape shape = ContrastDecayShape::exponential) {
  auto out = state;
  out.contrast = state.contrast * contrast_decay_factor(t, t_coh, shape);
  return out;
}

/// Mean and variance of an S_z readout (no readout noise added).
template <typename Scalar>
std::pair<Scalar, Scalar> sz_moments(const CollectiveSpinState<Scalar>& state) {
  using std::cos;
  using std::sin;
  const Scalar mean = state.mean_length() * cos(state.mean_theta);
  // z component of the tangent axes is (sin theta, 0).
  const Scalar s = sin(state.mean_theta);
  return {mean, s * s * state.cov(0, 0)};
}

template <typename Scalar, typename Rng>
Scalar measure_sz(const CollectiveSpinState<Scalar>& state, Scalar readout_var, Rng& rng) {
  using std::sqrt;
  if (!(readout_var >= 0)) throw std::invalid_argument("measure_sz: negative readout variance");
  const auto [mean, var] = sz_moments(state);
  const Scalar total = var + readout_var;
  if (total <= 0) return mean;
  std::normal_distribution<Scalar> normal(mean, sqrt(total));
  return normal(rng);
}

/// True when cov is symmetric and positive semi-definite (relative tolerance).
template <typename Scalar>
bool is_valid(const CollectiveSpinState<Scalar>& state, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  if (!(state.s0 > 0) || state.contrast < 0 || state.contrast > 1) return false;
  const Scalar scale = std::max(state.cov.cwiseAbs().maxCoeff(), Scalar(1));
  if (abs(state.cov(0, 1) - state.cov(1, 0)) > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Matrix2<Scalar>> solver(state.cov);
  return solver.eigenvalues()(0) >= -tol * scale;
}

}  // namespace spinclock
