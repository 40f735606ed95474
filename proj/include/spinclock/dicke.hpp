#pragma once

// Exact symmetric-manifold (Dicke) states of 2S two-level atoms. Used as a
// brute-force reference for the Gaussian model at small atom number.
//
// Amplitudes are indexed k = m + S, k = 0..2S. Polar angles passed to
// dicke_css are measured from the -z pole (the optically pumped state), so
// the Gaussian-model polar angle is pi - theta.

#include <complex>

#include <Eigen/Dense>

namespace spinclock {

/// Largest supported 2S (S = 2000).
inline constexpr int kMaxTwoSpin = 4000;

struct DickeState {
  int two_s{1};
  Eigen::VectorXcd amps;

  double spin() const { return two_s / 2.0; }
  Eigen::Index dim() const { return amps.size(); }
};

/// Validates a half-integer spin and returns 2S.
int checked_two_spin(double spin);

/// amps_m = sqrt(C(2S, S+m)) cos^{S-m}(theta/2) sin^{S+m}(theta/2) e^{-i(S+m)phi}
DickeState dicke_css(double spin, double theta, double phi);

/// One-axis twisting exp(-i mu S_z^2).
DickeState evolve_oat(const DickeState& state, double mu);

/// exp(-i angle axis.S), exact for integer and half-integer S.
DickeState rotate_dicke(const DickeState& state, const Eigen::Vector3d& axis, double angle);

/// Column m of d^S(beta) = <S m'| exp(-i beta S_y) |S m>, as a vector over m'.
Eigen::VectorXd wigner_small_d_column(int two_s, int column, double beta);

/// Full Wigner small-d matrix. O(n^2) memory; meant for moderate S.
Eigen::MatrixXd wigner_small_d(int two_s, double beta);

struct SpinOperators {
  Eigen::MatrixXcd sx, sy, sz;
};

/// Dense spin-S matrices in the |S m> basis (m ascending).
SpinOperators spin_operators(int two_s);

struct SpinMoments {
  Eigen::Vector3d mean;
  Eigen::Matrix3d second;  // symmetrized <S_i S_j>

  Eigen::Matrix3d covariance() const { return second - mean * mean.transpose(); }
};

SpinMoments moments(const DickeState& state);

/// Covariance of the moments projected on the tangent frame at (theta, phi),
/// polar angle measured from +z as in the Gaussian model.
Eigen::Matrix2d tangent_covariance(const SpinMoments& m, double theta, double phi);

/// Minimum over transverse directions of 2 Var(S_perp) c_in / (s0 C^2),
/// with C = |<S>| / s0.
double min_transverse_zeta(const SpinMoments& m, double s0, double c_in);

}  // namespace spinclock
