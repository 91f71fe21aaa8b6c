#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "dcgle/model.hpp"
#include "dcgle/roots.hpp"

namespace dcgle {

/// A point on an Andronov-Hopf curve of the zero state: lambda = i omega_c is a root of the
/// characteristic equation at feedback rate `eta` and gain `delta`.
struct HopfPoint {
  double omega_c;
  double eta;
  double delta;
  double q;
};

struct HopfCurve {
  std::vector<HopfPoint> points;
  std::size_t skipped = 0;  ///< grid frequencies sitting on a curve asymptote
};

/// Hopf curves in the (delta, eta) plane, parametrized by the critical frequency. The eta and
/// delta stored in `p` are ignored.
inline HopfCurve hopf_curve(const ModelParams& p, double q, const std::vector<double>& omega_grid) {
  HopfCurve out;
  out.points.reserve(omega_grid.size());
  const double q2 = q * q;
  for (double w : omega_grid) {
    const double arg = p.phi - w * p.tau;
    const double s = std::sin(arg);
    if (std::abs(s) < 1e-12) {
      ++out.skipped;
      continue;
    }
    const double num = 0.5 * q2 + w;
    out.points.push_back({w, num / s, p.beta * q2 - std::cos(arg) * num / s, q});
  }
  return out;
}

/// Characteristic function of the zero state, lambda - delta - eta e^{i phi} e^{-lambda tau}
/// + (beta + i/2) q^2.
inline cplx trivial_char_fn(const ModelParams& p, double q, cplx lambda) {
  return lambda - p.delta - p.eta * std::polar(1.0, p.phi) * std::exp(-lambda * p.tau) +
         cplx(p.beta, 0.5) * (q * q);
}

/// Rescaled growth rate of the pseudo-continuous spectrum of the zero state, gamma(xi, q).
inline double trivial_gamma(const ModelParams& p, double q, double xi) {
  if (p.eta == 0.0)
    throw DegenerateSpectrum("eta = 0: the zero state has only the delay-free dispersion");
  const double re = p.delta - p.beta * q * q;
  const double im = xi + 0.5 * q * q;
  return -0.5 * std::log((re * re + im * im) / (p.eta * p.eta));
}

/// Delay-free dispersion of the zero state, lambda(q) = delta - (beta + i/2) q^2.
inline cplx trivial_nodelay_lambda(const ModelParams& p, double q) {
  return p.delta - cplx(p.beta, 0.5) * (q * q);
}

enum class StabilityKind { Stable = 0, WeakUnstable = 1, StrongUnstable = 2 };

inline const char* to_string(StabilityKind k) {
  switch (k) {
    case StabilityKind::Stable: return "stable";
    case StabilityKind::WeakUnstable: return "weak";
    case StabilityKind::StrongUnstable: return "strong";
  }
  return "?";
}

struct TrivialClass {
  StabilityKind kind;
  bool two_regions;
  double xi_c;  ///< delay-mode frequency maximizing gamma
  double q_c;   ///< nonnegative member of the symmetric maximizing pair
};

/// Large-delay classification of A = 0. Strong: delta > 0. Weak: -|eta| < delta <= 0.
/// Stable otherwise; the boundary delta = -|eta| counts as stable.
inline TrivialClass classify_trivial(const ModelParams& p) {
  const double d = p.delta;
  const double e = std::abs(p.eta);
  TrivialClass c{};
  if (d > 0.0) {
    c.kind = StabilityKind::StrongUnstable;
  } else if (d > -e) {
    c.kind = StabilityKind::WeakUnstable;
  } else {
    c.kind = StabilityKind::Stable;
  }
  c.two_regions = c.kind != StabilityKind::Stable && d > e;
  if (d <= 0.0) {
    c.xi_c = 0.0;
    c.q_c = 0.0;
  } else {
    // gamma is maximal where (delta - beta q^2)^2 + (xi + q^2/2)^2 vanishes.
    c.q_c = std::sqrt(d / p.beta);
    c.xi_c = -0.5 * d / p.beta;
  }
  return c;
}

/// Largest gamma over a (xi, q) grid, with its location.
struct GammaPeak {
  double gamma;
  double xi;
  double q;
};

inline GammaPeak trivial_gamma_sup(const ModelParams& p, const std::vector<double>& xi_grid,
                                   const std::vector<double>& q_grid) {
  GammaPeak best{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (double q : q_grid)
    for (double xi : xi_grid) {
      const double g = trivial_gamma(p, q, xi);
      if (g > best.gamma) best = {g, xi, q};
    }
  return best;
}

/// Roots of the zero-state characteristic equation found by Newton from a seed rectangle
/// covering one delay strip; returns the root with the largest real part.
inline std::optional<cplx> trivial_rightmost_root(const ModelParams& p, double q,
                                                  int re_seeds = 40, int im_seeds = 40) {
  if (p.tau <= 0.0 || p.eta == 0.0) return trivial_nodelay_lambda(p, q);
  const double strip = two_pi / p.tau;
  const cplx rot = p.eta * std::polar(1.0, p.phi);
  auto fd = [&](cplx z) {
    const cplx e = rot * std::exp(-z * p.tau);
    return std::pair{z - p.delta - e + cplx(p.beta, 0.5) * (q * q), 1.0 + p.tau * e};
  };
  std::optional<cplx> best;
  const double re_lo = -40.0 / p.tau;
  const double re_hi = 5.0;
  for (int i = 0; i < re_seeds; ++i) {
    const double re = re_lo + (re_hi - re_lo) * i / (re_seeds - 1);
    for (int j = 0; j < im_seeds; ++j) {
      // Roots repeat with period ~strip in Im; centre the strip on the delay-free frequency.
      const double im = -0.5 * q * q - 0.5 * strip + strip * j / im_seeds;
      auto r = roots::newton(fd, cplx(re, im));
      if (r && (!best || r->real() > best->real())) best = r;
    }
  }
  return best;
}

}  // namespace dcgle
