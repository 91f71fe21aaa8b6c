#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace dcgle::roots {

/// Bisection on [lo, hi] for a continuous f with f(lo) f(hi) <= 0. Stops when the bracket is
/// narrower than `xtol`.
template <class F>
double bisect(F&& f, double lo, double hi, double flo, double xtol = 1e-13, int max_iter = 200) {
  for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// One secant-free Newton step with a centered numeric derivative; only accepted if it does
/// not increase |f|.
template <class F>
double newton_polish(F&& f, double x, double h = 1e-7) {
  const double fx = f(x);
  const double d = (f(x + h) - f(x - h)) / (2.0 * h);
  if (d == 0.0 || !std::isfinite(d)) return x;
  const double xn = x - fx / d;
  const double fn = f(xn);
  return (std::isfinite(fn) && std::abs(fn) <= std::abs(fx)) ? xn : x;
}

struct NewtonOptions {
  int max_iter = 60;
  double tol = 1e-13;
  double re_floor = -50.0;  ///< abandon iterates that run off to the far left
  double re_ceiling = 50.0;
};

/// Complex Newton iteration z <- z - f(z)/f'(z). `fd` returns the pair (f, f').
template <class FD>
std::optional<std::complex<double>> newton(FD&& fd, std::complex<double> z,
                                           const NewtonOptions& opt = {}) {
  for (int it = 0; it < opt.max_iter; ++it) {
    const auto [f, d] = fd(z);
    if (!std::isfinite(f.real()) || !std::isfinite(f.imag()) || std::abs(d) == 0.0)
      return std::nullopt;
    const auto step = f / d;
    z -= step;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
    if (z.real() < opt.re_floor || z.real() > opt.re_ceiling) return std::nullopt;
    if (std::abs(step) <= opt.tol * std::max(1.0, std::abs(z))) {
      const auto [f2, d2] = fd(z);
      (void)d2;
      // Accept only genuine zeros, not stalls on a flat region.
      if (std::abs(f2) <= 1e-8 * std::max(1.0, std::abs(d2) * std::max(1.0, std::abs(z))))
        return z;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

/// Number of zeros of an analytic f inside the rectangle [re_lo, re_hi] x [im_lo, im_hi],
/// counted by the argument principle. The boundary is sampled adaptively so consecutive
/// phase increments stay below pi/4. Returns nullopt if f vanishes on the boundary or the
/// refinement budget runs out.
template <class F>
std::optional<int> winding_count(F&& f, double re_lo, double re_hi, double im_lo, double im_hi,
                                 int base_samples = 400, int max_depth = 30) {
  using C = std::complex<double>;
  const C corners[4] = {{re_lo, im_lo}, {re_hi, im_lo}, {re_hi, im_hi}, {re_lo, im_hi}};
  double total = 0.0;
  int budget = 2'000'000;

  std::function<bool(C, C, C, C, int)> segment = [&](C a, C b, C fa, C fb, int depth) -> bool {
    if (--budget < 0) return false;
    const double da = std::arg(fb / fa);
    if (std::abs(da) < std::numbers::pi / 4.0) {
      total += da;
      return true;
    }
    if (depth >= max_depth) return false;
    const C m = 0.5 * (a + b);
    const C fm = f(m);
    if (std::abs(fm) == 0.0 || !std::isfinite(std::abs(fm))) return false;
    return segment(a, m, fa, fm, depth + 1) && segment(m, b, fm, fb, depth + 1);
  };

  for (int side = 0; side < 4; ++side) {
    const C a = corners[side];
    const C b = corners[(side + 1) % 4];
    C prev = a;
    C fprev = f(a);
    if (std::abs(fprev) == 0.0) return std::nullopt;
    for (int i = 1; i <= base_samples; ++i) {
      const C z = a + (b - a) * (static_cast<double>(i) / base_samples);
      const C fz = f(z);
      if (std::abs(fz) == 0.0 || !std::isfinite(std::abs(fz))) return std::nullopt;
      if (!segment(prev, z, fprev, fz, 0)) return std::nullopt;
      prev = z;
      fprev = fz;
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace dcgle::roots
