#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dcgle/params.hpp"

namespace dcgle {

using cplx = std::complex<double>;

namespace detail {

/// Real roots of a x^2 + b x + c = 0, ascending. Degrades to the linear case when a == 0.
/// Uses the cancellation-free form so the small root stays accurate when |a| is tiny.
inline std::vector<double> real_quadratic_roots(double a, double b, double c) {
  if (a == 0.0) {
    if (b == 0.0) return {};
    return {-c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  const double t = -0.5 * (b + std::copysign(sq, b));
  double r1 = t / a;
  double r2 = (t != 0.0) ? c / t : 0.0;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

/// Picks the root for a branch tag from ascending roots; single roots are tagged Plus.
inline std::optional<double> pick_root(const std::vector<double>& roots, AmplitudeBranch b) {
  if (roots.empty()) return std::nullopt;
  if (roots.size() == 1) {
    if (b == AmplitudeBranch::Minus) return std::nullopt;
    return roots.front();
  }
  return b == AmplitudeBranch::Plus ? roots[1] : roots[0];
}

/// a0^2 solving mu s^2 + epsilon s + c = 0 on the given branch, or nullopt when not real and
/// nonnegative. `c` collects delta - beta q^2 plus any feedback contribution.
inline std::optional<double> amplitude_squared(const ModelParams& p, double c, AmplitudeBranch b) {
  auto s = pick_root(real_quadratic_roots(p.mu, p.epsilon, c), b);
  if (!s || !(*s >= 0.0) || !std::isfinite(*s)) return std::nullopt;
  return s;
}

}  // namespace detail

/// Complex residual of the plane-wave condition; zero iff `pw` solves the model.
inline cplx residual_pw(const ModelParams& p, const PlaneWave& pw) {
  using namespace std::complex_literals;
  const double s = pw.a0 * pw.a0;
  const double q2 = pw.q * pw.q;
  return 1i * pw.omega + cplx(p.beta, 0.5) * q2 - p.delta - cplx(p.epsilon, 1.0) * s -
         cplx(p.mu, p.nu) * (s * s) - p.eta * std::polar(1.0, p.phi - pw.omega * p.tau);
}

struct AmplitudeRoot {
  double a0;
  AmplitudeBranch branch;
};

/// Delay-free plane-wave amplitudes at wavenumber q, largest first. Feedback is ignored.
/// The cubic model takes the analytic path a0^2 = (beta q^2 - delta) / epsilon.
inline std::vector<AmplitudeRoot> nodelay_amplitude(const ModelParams& p, double q) {
  const double c = p.delta - p.beta * q * q;
  std::vector<AmplitudeRoot> out;
  if (p.cubic() || p.mu == 0.0) {
    const double s = -c / p.epsilon;
    if (s >= 0.0) out.push_back({std::sqrt(s), AmplitudeBranch::Plus});
    return out;
  }
  const auto roots = detail::real_quadratic_roots(p.mu, p.epsilon, c);
  for (auto b : {AmplitudeBranch::Plus, AmplitudeBranch::Minus}) {
    auto s = detail::pick_root(roots, b);
    if (s && *s >= 0.0) out.push_back({std::sqrt(*s), b});
  }
  return out;
}

/// Frequency of a delay-free plane wave with squared amplitude s at wavenumber q.
inline double nodelay_frequency(const ModelParams& p, double q, double a0) {
  const double s = a0 * a0;
  return -0.5 * q * q + s + p.nu * s * s;
}

/// Implicit equation of the solution tube in (delta, omega, a0); zero exactly on the tube.
inline double tube_residual(const ModelParams& p, const PlaneWave& pw) {
  const double s = pw.a0 * pw.a0;
  const double q2 = pw.q * pw.q;
  const double re = -p.beta * q2 + p.delta + p.epsilon * s + p.mu * s * s;
  const double im = pw.omega + 0.5 * q2 - s - p.nu * s * s;
  return re * re + im * im - p.eta * p.eta;
}

/// Plane wave at tube angle theta, i.e. with omega tau - phi = theta - pi. The result does
/// not depend on tau; omega is not required to close the finite-delay phase condition.
inline PlaneWave planewave_from_theta(const ModelParams& p, double q, double theta,
                                      AmplitudeBranch branch) {
  const double c = p.delta - p.beta * q * q - p.eta * std::cos(theta);
  const auto s = detail::amplitude_squared(p, c, branch);
  if (!s) throw NoRealAmplitude("no real amplitude on the tube at this (delta, theta)");
  const double omega = -0.5 * q * q + *s + p.nu * (*s) * (*s) + p.eta * std::sin(theta);
  return {q, omega, std::sqrt(*s), wrap_angle(theta)};
}

/// Delay phase factor eta e^{i(phi - omega tau)} seen by perturbations of the wave.
inline cplx feedback_phase(const ModelParams& p, const PlaneWave& pw) {
  return p.eta * std::polar(1.0, p.phi - pw.omega * p.tau);
}

}  // namespace dcgle
