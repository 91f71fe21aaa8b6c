#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include "dcgle/error.hpp"

namespace dcgle {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Coefficients of the delayed cubic-quintic Ginzburg-Landau equation
///
///   A_t = (beta + i/2) A_xx + delta A + (epsilon + i)|A|^2 A
///         + (mu + i nu)|A|^4 A + eta e^{i phi} A(x, t - tau).
///
/// The cubic model is the special case mu = nu = 0.
struct ModelParams {
  double beta = 0.5;
  double delta = 0.0;
  double epsilon = 1.0;
  double mu = -1.0;
  double nu = -0.1;
  double eta = 0.0;
  double phi = 0.0;
  double tau = 0.0;

  bool cubic() const noexcept { return mu == 0.0 && nu == 0.0; }

  /// Throws RangeError naming the first field that violates its invariant.
  void validate() const {
    if (!(beta > 0.0)) throw RangeError("beta", "must be > 0");
    if (!(tau >= 0.0)) throw RangeError("tau", "must be >= 0");
    if (!(eta >= 0.0)) throw RangeError("eta", "must be >= 0 (fold the sign into phi)");
    if (!std::isfinite(delta)) throw RangeError("delta", "must be finite");
    if (!std::isfinite(epsilon)) throw RangeError("epsilon", "must be finite");
    if (!std::isfinite(mu)) throw RangeError("mu", "must be finite");
    if (!std::isfinite(nu)) throw RangeError("nu", "must be finite");
    if (!std::isfinite(phi)) throw RangeError("phi", "must be finite");
    if (mu == 0.0 && epsilon == 0.0) throw RangeError("epsilon", "must be nonzero when mu = 0");
  }

  /// beta = 0.5, epsilon = 1, mu = -1, nu = -0.1 (subcritical case).
  static ModelParams quintic(double delta = 0.0, double eta = 0.0, double tau = 0.0,
                             double phi = 0.0) {
    return {0.5, delta, 1.0, -1.0, -0.1, eta, phi, tau};
  }

  /// beta = 0.5, epsilon = -1, mu = nu = 0 (supercritical case).
  static ModelParams cubic_model(double delta = 0.0, double eta = 0.0, double tau = 0.0,
                                 double phi = 0.0) {
    return {0.5, delta, -1.0, 0.0, 0.0, eta, phi, tau};
  }

  bool operator==(const ModelParams&) const = default;
};

/// Selects a root of a quadratic in the squared amplitude. Plus is always the larger root.
enum class AmplitudeBranch { Plus, Minus };

constexpr std::string_view to_string(AmplitudeBranch b) noexcept {
  return b == AmplitudeBranch::Plus ? "+" : "-";
}

constexpr int sign_of(AmplitudeBranch b) noexcept { return b == AmplitudeBranch::Plus ? 1 : -1; }

/// A = a0 exp(i(q x + omega t)).
struct PlaneWave {
  double q = 0.0;
  double omega = 0.0;
  double a0 = 0.0;
  std::optional<double> theta;  ///< tube angle, (omega tau - phi + pi) mod 2 pi
};

/// Maps any angle onto [0, 2 pi).
inline double wrap_angle(double a) noexcept {
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

/// Distance between two angles measured along the circle, in [0, pi].
inline double angle_distance(double a, double b) noexcept {
  const double d = wrap_angle(a - b);
  return d > std::numbers::pi ? two_pi - d : d;
}

inline double tube_angle(const ModelParams& p, double omega) noexcept {
  return wrap_angle(omega * p.tau - p.phi + std::numbers::pi);
}

}  // namespace dcgle
