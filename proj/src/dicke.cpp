#include "spinclock/dicke.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spinclock/spin_core.hpp"

namespace spinclock {

namespace {

constexpr double kRescaleAbove = 1e150;

// <k+1| S_+ |k> with k = m + S.
double raising_coefficient(int two_s, int k) {
  return std::sqrt(static_cast<double>(two_s - k) * static_cast<double>(k + 1));
}

double m_of(int two_s, int k) { return k - two_s / 2.0; }

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// |x|^p with sign, treating 0^0 as 1.
std::pair<double, double> signed_log_pow(double x, int p) {
  if (p == 0) return {0.0, 1.0};
  if (x == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
  const double sign = (x < 0 && (p % 2 == 1)) ? -1.0 : 1.0;
  return {p * std::log(std::abs(x)), sign};
}

void check_state(const DickeState& state) {
  if (state.two_s < 1 || state.two_s > kMaxTwoSpin)
    throw std::invalid_argument("Dicke state spin out of supported range");
  if (state.amps.size() != state.two_s + 1)
    throw std::invalid_argument("Dicke amplitude vector has wrong length");
}

}  // namespace

int checked_two_spin(double spin) {
  const double twice = 2.0 * spin;
  const double rounded = std::round(twice);
  if (!(spin >= 0.5) || std::abs(twice - rounded) > 1e-12)
    throw std::invalid_argument("spin must be a positive half-integer, got " +
                                std::to_string(spin));
  if (rounded > kMaxTwoSpin)
    throw std::invalid_argument("spin exceeds the supported maximum S = 2000");
  return static_cast<int>(rounded);
}

DickeState dicke_css(double spin, double theta, double phi) {
  DickeState out;
  out.two_s = checked_two_spin(spin);
  const int n = out.two_s + 1;
  out.amps.resize(n);
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  for (int k = 0; k < n; ++k) {
    const auto [log_c, sign_c] = signed_log_pow(c, out.two_s - k);
    const auto [log_s, sign_s] = signed_log_pow(s, k);
    const double magnitude =
        sign_c * sign_s == 0.0
            ? 0.0
            : sign_c * sign_s * std::exp(0.5 * log_binomial(out.two_s, k) + log_c + log_s);
    out.amps(k) = std::polar(1.0, -k * phi) * magnitude;
  }
  return out;
}

DickeState evolve_oat(const DickeState& state, double mu) {
  check_state(state);
  DickeState out = state;
  for (Eigen::Index k = 0; k < out.dim(); ++k) {
    const double m = m_of(state.two_s, static_cast<int>(k));
    out.amps(k) *= std::polar(1.0, -mu * m * m);
  }
  return out;
}

// The column is the eigenvector of A = cos(b) S_z + sin(b) S_x with
// eigenvalue m (A is exp(-i b S_y) S_z exp(i b S_y)). A is real symmetric
// tridiagonal, so the eigenvector obeys a three-term recursion. Recursing
// from both ends towards the classically allowed centre is stable; the two
// halves are matched over a three-point overlap.
Eigen::VectorXd wigner_small_d_column(int two_s, int column, double beta) {
  if (two_s < 1 || two_s > kMaxTwoSpin)
    throw std::invalid_argument("wigner_small_d_column: spin out of range");
  if (column < 0 || column > two_s)
    throw std::invalid_argument("wigner_small_d_column: column out of range");
  const int n = two_s + 1;
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);

  if (std::abs(sb) < 1e-14) {
    // beta = 2 pi k: d_{m,m} = cos^{2S}(beta/2); beta = pi + 2 pi k:
    // d_{-m,m} = (-1)^{S-m} sin^{2S}(beta/2).
    if (cb > 0) {
      v(column) = signed_log_pow(std::cos(beta / 2), two_s).second;
    } else {
      const int s_minus_m = two_s - column;
      v(two_s - column) = ((s_minus_m % 2 == 0) ? 1.0 : -1.0) *
                          signed_log_pow(std::sin(beta / 2), two_s).second;
    }
    return v;
  }

  if (n == 2) {
    const double c = std::cos(beta / 2);
    const double s = std::sin(beta / 2);
    if (column == 0) v << c, -s;
    else v << s, c;
    return v;
  }

  const double lambda = m_of(two_s, column);
  auto diag = [&](int k) { return cb * m_of(two_s, k); };
  auto off = [&](int k) { return 0.5 * sb * raising_coefficient(two_s, k); };

  int centre = static_cast<int>(std::lround(lambda * cb + two_s / 2.0));
  centre = std::clamp(centre, 1, n - 2);

  Eigen::VectorXd fwd = Eigen::VectorXd::Zero(n);
  fwd(0) = 1.0;
  fwd(1) = (lambda - diag(0)) * fwd(0) / off(0);
  for (int k = 1; k < centre + 1; ++k) {
    fwd(k + 1) = ((lambda - diag(k)) * fwd(k) - off(k - 1) * fwd(k - 1)) / off(k);
    if (std::abs(fwd(k + 1)) > kRescaleAbove) fwd.head(k + 2) /= kRescaleAbove;
  }

  Eigen::VectorXd bwd = Eigen::VectorXd::Zero(n);
  bwd(n - 1) = 1.0;
  bwd(n - 2) = (lambda - diag(n - 1)) * bwd(n - 1) / off(n - 2);
  for (int k = n - 2; k > centre - 1; --k) {
    bwd(k - 1) = ((lambda - diag(k)) * bwd(k) - off(k) * bwd(k + 1)) / off(k - 1);
    if (std::abs(bwd(k - 1)) > kRescaleAbove) bwd.tail(n - k + 1) /= kRescaleAbove;
  }

  double num = 0.0;
  double den = 0.0;
  for (int k = centre - 1; k <= centre + 1; ++k) {
    num += fwd(k) * bwd(k);
    den += bwd(k) * bwd(k);
  }
  const double scale = num / den;
  v.head(centre + 1) = fwd.head(centre + 1);
  v.tail(n - centre - 1) = scale * bwd.tail(n - centre - 1);
  // fwd(0) = 1 carries the sign of the edge entry
  // d_{-S,m}(beta) = sqrt(C(2S, S+m)) cos^{S-m}(beta/2) sin^{S+m}(beta/2).
  const double edge_sign = signed_log_pow(std::cos(beta / 2), two_s - column).second *
                           signed_log_pow(std::sin(beta / 2), column).second;
  return v * (edge_sign / v.norm());
}

Eigen::MatrixXd wigner_small_d(int two_s, double beta) {
  const int n = two_s + 1;
  Eigen::MatrixXd d(n, n);
  for (int k = 0; k < n; ++k) d.col(k) = wigner_small_d_column(two_s, k, beta);
  return d;
}

DickeState rotate_dicke(const DickeState& state, const Eigen::Vector3d& axis, double angle) {
  check_state(state);
  const double norm = axis.norm();
  if (!(norm > 0)) throw std::invalid_argument("rotate_dicke: zero-length axis");
  if (std::abs(norm - 1) > 1e-9)
    throw std::invalid_argument("rotate_dicke: axis must be normalized");
  const Eigen::Vector3d nhat = axis / norm;

  // SU(2) element U = cos(a/2) - i sin(a/2) n.sigma = [[a, b], [-b*, a*]],
  // factored as Rz(psi) Ry(beta) Rz(chi) with half-angles kept exactly.
  const double ch = std::cos(angle / 2);
  const double sh = std::sin(angle / 2);
  const std::complex<double> a(ch, -sh * nhat.z());
  const std::complex<double> b(-sh * nhat.y(), -sh * nhat.x());
  const double beta = 2.0 * std::atan2(std::abs(b), std::abs(a));
  const double arg_a = std::abs(a) > 0 ? std::arg(a) : 0.0;
  const double arg_mb = std::abs(b) > 0 ? std::arg(-b) : 0.0;
  const double psi = -arg_a - arg_mb;
  const double chi = -arg_a + arg_mb;

  const int n = static_cast<int>(state.dim());
  Eigen::VectorXcd w(n);
  for (int k = 0; k < n; ++k)
    w(k) = std::polar(1.0, -chi * m_of(state.two_s, k)) * state.amps(k);

  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < n; ++k) {
    if (w(k) == std::complex<double>(0.0)) continue;
    u += wigner_small_d_column(state.two_s, k, beta).cast<std::complex<double>>() * w(k);
  }

  DickeState out;
  out.two_s = state.two_s;
  out.amps.resize(n);
  for (int k = 0; k < n; ++k)
    out.amps(k) = std::polar(1.0, -psi * m_of(state.two_s, k)) * u(k);
  return out;
}

SpinOperators spin_operators(int two_s) {
  const int n = two_s + 1;
  Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    sz(k, k) = m_of(two_s, k);
    if (k + 1 < n) sp(k + 1, k) = raising_coefficient(two_s, k);
  }
  const Eigen::MatrixXcd sm = sp.adjoint();
  const std::complex<double> i(0.0, 1.0);
  return {(sp + sm) / 2.0, (sp - sm) / (2.0 * i), sz};
}

SpinMoments moments(const DickeState& state) {
  check_state(state);
  const int n = static_cast<int>(state.dim());
  const auto& a = state.amps;
  Eigen::VectorXcd raised = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd lowered = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd sz_a(n);
  for (int k = 0; k < n; ++k) {
    sz_a(k) = m_of(state.two_s, k) * a(k);
    if (k + 1 < n) {
      const double c = raising_coefficient(state.two_s, k);
      raised(k + 1) = c * a(k);
      lowered(k) = c * a(k + 1);
    }
  }
  const std::complex<double> i(0.0, 1.0);
  const Eigen::VectorXcd ops[3] = {(raised + lowered) / 2.0, (raised - lowered) / (2.0 * i),
                                   sz_a};
  SpinMoments out;
  for (int r = 0; r < 3; ++r) {
    out.mean(r) = a.dot(ops[r]).real();
    for (int c = 0; c < 3; ++c) out.second(r, c) = ops[r].dot(ops[c]).real();
  }
  out.second = (out.second + out.second.transpose()) / 2.0;
  return out;
}

Eigen::Matrix2d tangent_covariance(const SpinMoments& m, double theta, double phi) {
  const auto frame = tangent_frame(theta, phi);
  return frame.transpose() * m.covariance() * frame;
}

double min_transverse_zeta(const SpinMoments& m, double s0, double c_in) {
  const double length = m.mean.norm();
  if (!(length > 0)) throw DegenerateStateError("min_transverse_zeta: zero mean spin");
  const double theta = std::atan2(std::hypot(m.mean.x(), m.mean.y()), m.mean.z());
  const double phi = std::atan2(m.mean.y(), m.mean.x());
  const Eigen::Matrix2d cov = tangent_covariance(m, theta, phi);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
  const double contrast = length / s0;
  return 2.0 * solver.eigenvalues()(0) * c_in / (s0 * contrast * contrast);
}

}  // namespace spinclock
