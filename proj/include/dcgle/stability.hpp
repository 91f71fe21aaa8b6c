#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "dcgle/model.hpp"
#include "dcgle/parallel.hpp"
#include "dcgle/roots.hpp"
#include "dcgle/trivial_state.hpp"

namespace dcgle {

/// Fourier symbol of the second derivative, -d_xx e^{i kappa x} = S(kappa) e^{i kappa x}.
struct ContinuumSymbol {
  double operator()(double kappa) const noexcept { return kappa * kappa; }
};

/// Symbol of the three-point central difference on spacing h.
struct LatticeSymbol {
  double h;
  double operator()(double kappa) const noexcept {
    return 2.0 / (h * h) * (1.0 - std::cos(kappa * h));
  }
};

namespace detail {

/// Both roots of z^2 + b z + c = 0.
inline std::array<cplx, 2> monic_quadratic_roots(cplx b, cplx c) {
  const cplx sq = std::sqrt(b * b - 4.0 * c);
  // Pick the sign that avoids cancellation.
  const cplx t = -0.5 * (b + ((std::real(std::conj(b) * sq) >= 0.0) ? sq : -sq));
  if (t == cplx(0.0)) return {cplx(0.0), cplx(0.0)};
  return {t, c / t};
}

inline std::array<cplx, 2> quadratic_roots(cplx a, cplx b, cplx c) {
  return monic_quadratic_roots(b / a, c / a);
}

}  // namespace detail

/// Linearization of the model about a plane wave for sideband perturbations
/// a+ e^{ikx + lambda t} + conj(a-) e^{-ikx + conj(lambda) t}. The 2x2 matrix is
///
///   [ lambda + d+ - E (e^{-lambda tau} - 1)        -P                              ]
///   [ -conj(P)                                     lambda + d- - conj(E)(e^{-lambda tau} - 1) ]
///
/// with d+ = (beta + i/2)(S(q+k) - S(q)) - P, d- = (beta - i/2)(S(q-k) - S(q)) - conj(P),
/// P = (epsilon + i) a0^2 + 2 (mu + i nu) a0^4 and E = eta e^{i(phi - omega tau)}.
template <class Symbol = ContinuumSymbol>
class CharacteristicSystem {
 public:
  CharacteristicSystem(const ModelParams& p, const PlaneWave& pw, double k, Symbol symbol = {})
      : CharacteristicSystem(p, pw, k, feedback_phase(p, pw), symbol) {}

  /// Large-delay form: the delay phase is fixed by the tube angle, E = -eta e^{-i theta}.
  static CharacteristicSystem at_tube_angle(const ModelParams& p, double q, double theta,
                                            AmplitudeBranch branch, double k, Symbol symbol = {}) {
    const PlaneWave pw = planewave_from_theta(p, q, theta, branch);
    return CharacteristicSystem(p, pw, k, -p.eta * std::polar(1.0, -theta), symbol);
  }

  const PlaneWave& wave() const noexcept { return wave_; }
  const ModelParams& params() const noexcept { return params_; }
  double k() const noexcept { return k_; }
  cplx coupling() const noexcept { return coupling_; }
  cplx delay_plus() const noexcept { return delay_; }
  cplx delay_minus() const noexcept { return std::conj(delay_); }
  cplx d_plus() const noexcept { return d_plus_; }
  cplx d_minus() const noexcept { return d_minus_; }

  std::array<cplx, 4> matrix(cplx lambda) const {
    const cplx y = std::exp(-lambda * params_.tau) - 1.0;
    return {lambda + d_plus_ - delay_ * y, -coupling_, -std::conj(coupling_),
            lambda + d_minus_ - std::conj(delay_) * y};
  }

  cplx det(cplx lambda) const {
    const auto m = matrix(lambda);
    return m[0] * m[3] - m[1] * m[2];
  }

  /// det and d det / d lambda.
  std::pair<cplx, cplx> det_with_derivative(cplx lambda) const {
    const cplx ex = std::exp(-lambda * params_.tau);
    const cplx m0 = lambda + d_plus_ - delay_ * (ex - 1.0);
    const cplx m3 = lambda + d_minus_ - std::conj(delay_) * (ex - 1.0);
    const cplx dm0 = 1.0 + delay_ * params_.tau * ex;
    const cplx dm3 = 1.0 + std::conj(delay_) * params_.tau * ex;
    return {m0 * m3 - std::norm(coupling_), dm0 * m3 + m0 * dm3};
  }

  /// Roots with the feedback removed altogether (eta = 0).
  std::array<cplx, 2> nodelay_roots() const {
    return detail::monic_quadratic_roots(d_plus_ + d_minus_,
                                         d_plus_ * d_minus_ - std::norm(coupling_));
  }

  /// Roots with e^{-lambda tau} dropped (strong spectrum).
  std::array<cplx, 2> strong_roots() const {
    const cplx a = d_plus_ + delay_;
    const cplx b = d_minus_ + std::conj(delay_);
    return detail::monic_quadratic_roots(a + b, a * b - std::norm(coupling_));
  }

  /// Roots Y of the quadratic obtained with lambda = i xi and e^{-lambda tau} -> Y.
  std::array<cplx, 2> weak_roots(double xi) const {
    const cplx ixi(0.0, xi);
    const cplx a1 = ixi + d_plus_ + delay_;
    const cplx a2 = ixi + d_minus_ + std::conj(delay_);
    const cplx e = delay_;
    return detail::quadratic_roots(std::norm(e), -(a1 * std::conj(e) + a2 * e),
                                   a1 * a2 - std::norm(coupling_));
  }

 private:
  CharacteristicSystem(const ModelParams& p, const PlaneWave& pw, double k, cplx delay,
                       Symbol symbol)
      : params_(p), wave_(pw), k_(k), delay_(delay) {
    const double s = pw.a0 * pw.a0;
    coupling_ = cplx(p.epsilon, 1.0) * s + 2.0 * cplx(p.mu, p.nu) * (s * s);
    const double sq = symbol(pw.q);
    d_plus_ = cplx(p.beta, 0.5) * (symbol(pw.q + k) - sq) - coupling_;
    d_minus_ = cplx(p.beta, -0.5) * (symbol(pw.q - k) - sq) - std::conj(coupling_);
  }

  ModelParams params_;
  PlaneWave wave_;
  double k_;
  cplx delay_;
  cplx coupling_;
  cplx d_plus_;
  cplx d_minus_;
};

/// Determinant of the linearization about `pw` at perturbation wavenumber k.
inline cplx char_fn(const ModelParams& p, const PlaneWave& pw, double k, cplx lambda) {
  return CharacteristicSystem<>(p, pw, k).det(lambda);
}

// ---------------------------------------------------------------------------------------------
// Delay-free stability.

/// Growth rates of sideband perturbations of a delay-free plane wave, written out as the
/// explicit quadratic lambda^2 + b lambda + c = 0.
inline std::array<cplx, 2> nodelay_growth(const ModelParams& p, const PlaneWave& pw, double k) {
  using namespace std::complex_literals;
  const double a2 = pw.a0 * pw.a0;
  const double a4 = a2 * a2;
  const double q = pw.q;
  const double k2 = k * k;
  const cplx b = 2.0 * (1i * k * q + p.beta * k2 - p.epsilon * a2 - 2.0 * p.mu * a4);
  const cplx c = -2.0 * ((p.nu + 2.0 * p.mu * p.beta) * k2 +
                         2.0 * (p.mu - 2.0 * p.nu * p.beta) * 1i * k * q) * a4 -
                 ((1.0 + 2.0 * p.epsilon * p.beta) * k2 +
                  2.0 * (p.epsilon - 2.0 * p.beta) * 1i * k * q) * a2 +
                 (4.0 * p.beta * p.beta + 1.0) * (0.25 * k2 * k2 - k2 * q * q);
  auto r = detail::monic_quadratic_roots(b, c);
  if (r[0].real() < r[1].real()) std::swap(r[0], r[1]);
  return r;
}

/// Long-wave expansion lambda(k) = i drift k + curvature k^2 + O(k^3) of the phase branch.
struct LongWave {
  double c1;  ///< epsilon a0^2 + 2 mu a0^4
  double c2;  ///< 16 beta^2 q^2 + 4 a0^2 + 8 nu a0^4
  double c3;  ///< 64 beta^3 q^3 - 4 beta q c2
  double drift;
  double curvature;
  /// -c3^2 / (128 c1^3) - c2^2 / c1 - beta. Kept for comparison only: it does not match the
  /// second derivative of the exact growth rate.
  double closed_form_curvature;
  bool at_threshold;
};

inline LongWave nodelay_longwave(const ModelParams& p, const PlaneWave& pw,
                                 double threshold_tol = 1e-8) {
  using namespace std::complex_literals;
  const double a2 = pw.a0 * pw.a0;
  const double a4 = a2 * a2;
  const double q = pw.q;
  LongWave lw{};
  lw.c1 = p.epsilon * a2 + 2.0 * p.mu * a4;
  if (std::abs(lw.c1) <= 1e-14 * (std::abs(p.epsilon * a2) + std::abs(2.0 * p.mu * a4)))
    throw DegenerateBranch("long-wave expansion undefined: c1 = 0");
  lw.c2 = 16.0 * p.beta * p.beta * q * q + 4.0 * a2 + 8.0 * p.nu * a4;
  lw.c3 = 64.0 * p.beta * p.beta * p.beta * q * q * q - 4.0 * p.beta * q * lw.c2;

  // Perturbation expansion of the root through lambda(0) = 0 of the delay-free quadratic.
  const cplx lin = -2.0 * 1i * q *
                   ((p.epsilon - 2.0 * p.beta) * a2 + 2.0 * (p.mu - 2.0 * p.nu * p.beta) * a4);
  const double quad = -(1.0 + 2.0 * p.epsilon * p.beta) * a2 -
                      2.0 * (p.nu + 2.0 * p.mu * p.beta) * a4 -
                      (4.0 * p.beta * p.beta + 1.0) * q * q;
  const cplx l1 = lin / (2.0 * lw.c1);
  const cplx l2 = (l1 * l1 + 2.0 * 1i * q * l1 + quad) / (2.0 * lw.c1);
  lw.drift = l1.imag();
  lw.curvature = l2.real();
  lw.closed_form_curvature = -lw.c3 * lw.c3 / (128.0 * lw.c1 * lw.c1 * lw.c1) -
                             lw.c2 * lw.c2 / lw.c1 - p.beta;
  lw.at_threshold = std::abs(lw.curvature) <= threshold_tol;
  return lw;
}

/// Gain at which the q = 0 wave changes long-wave stability: the curvature vanishes at
/// a0^2 = -(1 + 2 beta epsilon) / (2 (nu + 2 beta mu)).
inline std::optional<double> q0_modulational_threshold(const ModelParams& p) {
  const double den = 2.0 * (p.nu + 2.0 * p.beta * p.mu);
  if (den == 0.0) return std::nullopt;
  const double s = -(1.0 + 2.0 * p.beta * p.epsilon) / den;
  if (s < 0.0) return std::nullopt;
  return -p.epsilon * s - p.mu * s * s;
}

/// Closed-form q = 0 threshold expression
/// [4 beta eps (beta eps + 2 beta mu + nu + 1) + 2 (2 beta mu + nu + 1)] / [4 (2 beta mu + nu)^2].
/// It disagrees with q0_modulational_threshold and is kept only for comparison.
inline double q0_threshold_closed_form(const ModelParams& p) {
  const double b = p.beta, e = p.epsilon, m = p.mu, n = p.nu;
  const double g = 2.0 * b * m + n;
  return (4.0 * b * e * (b * e + 2.0 * b * m + n + 1.0) + 2.0 * (2.0 * b * m + n + 1.0)) /
         (4.0 * g * g);
}

// ---------------------------------------------------------------------------------------------
// Finite delay: roots of the characteristic quasipolynomial.

struct RootSearchOptions {
  double re_min = -5.0;
  double re_max = 3.0;
  double xi_max = 4.0;       ///< half-width of the frequency band seeded from the weak spectrum
  int rect_re = 9;           ///< rectangular seed grid, real direction
  int rect_per_strip = 4;    ///< rectangular seed grid, points per delay strip
  int strips = 3;
  double goldstone_radius = 1e-8;
  double dedup_tol = 1e-8;
  bool certify = false;      ///< run the argument-principle count on each k
  double certify_margin = 0.02;
};

struct KRoots {
  double k;
  std::vector<cplx> roots;   ///< distinct roots, Goldstone root excluded
  std::size_t seeds = 0;
  std::size_t duplicate_hits = 0;
  std::optional<int> winding;       ///< argument-principle count in the certification box
  std::optional<int> found_in_box;
};

namespace detail {

template <class Symbol>
KRoots characteristic_roots(const CharacteristicSystem<Symbol>& sys,
                            const RootSearchOptions& opt) {
  const ModelParams& p = sys.params();
  const double tau = p.tau;
  KRoots out;
  out.k = sys.k();
  std::vector<cplx> seeds;
  for (auto r : sys.nodelay_roots()) seeds.push_back(r);
  for (auto r : sys.strong_roots()) seeds.push_back(r);

  const double strip = two_pi / tau;
  if (p.eta > 0.0) {
    // One seed per weak-spectrum root per half strip: lambda = (-log Y + 2 pi i m) / tau.
    const double dxi = 0.5 * strip;
    for (double xi = -opt.xi_max; xi <= opt.xi_max + 1e-12; xi += dxi) {
      for (auto y : sys.weak_roots(xi)) {
        if (!(std::abs(y) > 0.0) || !std::isfinite(std::abs(y))) continue;
        const double re = -std::log(std::abs(y)) / tau;
        if (re < opt.re_min || re > opt.re_max) continue;
        const double m = std::round((xi * tau + std::arg(y)) / two_pi);
        seeds.emplace_back(re, (two_pi * m - std::arg(y)) / tau);
      }
    }
  }
  for (int i = 0; i < opt.rect_re; ++i) {
    const double re = opt.re_min + (opt.re_max - opt.re_min) * i / std::max(1, opt.rect_re - 1);
    const int n_im = opt.strips * opt.rect_per_strip;
    for (int j = 0; j < n_im; ++j) {
      const double im = -0.5 * opt.strips * strip + strip * (j + 0.5) / opt.rect_per_strip;
      seeds.emplace_back(re, im);
    }
  }

  auto fd = [&](cplx z) { return sys.det_with_derivative(z); };
  roots::NewtonOptions nopt;
  nopt.re_floor = std::min(-20.0, 4.0 * opt.re_min);
  nopt.re_ceiling = std::max(20.0, 4.0 * opt.re_max);
  const bool at_origin = std::abs(sys.k()) < 1e-12;
  for (const cplx& s : seeds) {
    ++out.seeds;
    auto r = roots::newton(fd, s, nopt);
    if (!r) continue;
    if (at_origin && std::abs(*r) < opt.goldstone_radius) continue;
    bool dup = false;
    for (const cplx& e : out.roots)
      if (std::abs(e - *r) < opt.dedup_tol * std::max(1.0, std::abs(e))) {
        dup = true;
        break;
      }
    if (dup) {
      ++out.duplicate_hits;
      continue;
    }
    out.roots.push_back(*r);
  }
  return out;
}

template <class Symbol>
void certify_roots(const CharacteristicSystem<Symbol>& sys, const RootSearchOptions& opt,
                   KRoots& kr) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& r : kr.roots) top = std::max(top, r.real());
  const double lo = std::min(0.0, top) - opt.certify_margin;
  const double hi = opt.re_max;
  const double ilo = -opt.xi_max;
  const double ihi = opt.xi_max;
  auto f = [&](cplx z) { return sys.det(z); };
  kr.winding = roots::winding_count(f, lo, hi, ilo, ihi);
  int inside = 0;
  for (const auto& r : kr.roots)
    if (r.real() > lo && r.real() < hi && r.imag() > ilo && r.imag() < ihi) ++inside;
  // The Goldstone root at k = 0 is excluded from the list but still winds.
  if (std::abs(sys.k()) < 1e-12 && lo < 0.0 && hi > 0.0) ++inside;
  kr.found_in_box = inside;
}

}  // namespace detail

/// All roots the multi-seed Newton search finds at wavenumber k.
inline KRoots characteristic_roots(const ModelParams& p, const PlaneWave& pw, double k,
                                   const RootSearchOptions& opt = {}) {
  CharacteristicSystem<> sys(p, pw, k);
  auto kr = detail::characteristic_roots(sys, opt);
  if (opt.certify) detail::certify_roots(sys, opt, kr);
  return kr;
}

struct RightmostRoot {
  double max_re = -std::numeric_limits<double>::infinity();
  double argmax_k = 0.0;
  cplx root{};
  bool seeding_warning = false;
  std::size_t certification_failures = 0;  ///< k values where the winding count disagreed
  bool stable() const noexcept { return max_re < 0.0; }
};

/// Rightmost characteristic root over a wavenumber grid, Goldstone root excluded.
inline RightmostRoot rightmost_root(const ModelParams& p, const PlaneWave& pw,
                                    const std::vector<double>& k_grid,
                                    const RootSearchOptions& opt = {}) {
  if (!(p.tau > 0.0)) throw RangeError("tau", "rightmost_root needs a finite positive delay");
  RightmostRoot out;
  std::size_t seeds = 0, dups = 0;
  for (double k : k_grid) {
    auto kr = characteristic_roots(p, pw, k, opt);
    seeds += kr.seeds;
    dups += kr.duplicate_hits;
    if (kr.winding && kr.found_in_box && *kr.winding != *kr.found_in_box)
      ++out.certification_failures;
    if (opt.certify && !kr.winding) ++out.certification_failures;
    for (const auto& r : kr.roots)
      if (r.real() > out.max_re) {
        out.max_re = r.real();
        out.argmax_k = k;
        out.root = r;
      }
  }
  out.seeding_warning = seeds > 0 && static_cast<double>(dups) > 0.9 * static_cast<double>(seeds);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Large delay: strong and weak spectra on the tube.

inline std::array<cplx, 2> strong_spectrum(const ModelParams& p, double q, double theta, double k,
                                           AmplitudeBranch branch = AmplitudeBranch::Plus) {
  auto r = CharacteristicSystem<>::at_tube_angle(p, q, theta, branch, k).strong_roots();
  if (r[0].real() < r[1].real()) std::swap(r[0], r[1]);
  return r;
}

/// gamma_1 >= gamma_2 with gamma_j = -log|Y_j|.
inline std::array<double, 2> weak_gamma(const ModelParams& p, double q, double theta, double k,
                                        double xi, AmplitudeBranch branch = AmplitudeBranch::Plus) {
  if (p.eta == 0.0) throw DegenerateSpectrum("eta = 0: no pseudo-continuous spectrum");
  const auto y = CharacteristicSystem<>::at_tube_angle(p, q, theta, branch, k).weak_roots(xi);
  std::array<double, 2> g{-std::log(std::abs(y[0])), -std::log(std::abs(y[1]))};
  if (g[0] < g[1]) std::swap(g[0], g[1]);
  return g;
}

struct Witness {
  double k = 0.0;
  double xi = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

struct StabilityClass {
  StabilityKind kind = StabilityKind::Stable;
  Witness witness;          ///< maximizer that decided the class
  Witness strong;           ///< max Re lambda of the strong spectrum
  Witness weak;             ///< sup gamma, Goldstone neighbourhood excluded
  double goldstone_curvature = 0.0;  ///< largest Hessian eigenvalue of the phase-mode surface
};

struct LargeDelayOptions {
  std::vector<double> k_grid = linspace(-3.0, 3.0, 601);
  std::vector<double> xi_grid = linspace(-std::numbers::pi, std::numbers::pi, 629);
  double tol_strong = 1e-8;
  double tol_weak = 1e-8;
  double k_excl = 1e-3;
  double xi_excl = 1e-3;
};

namespace detail {

/// gamma on the root that continues the Goldstone mode (Y = 1 at k = xi = 0).
inline double goldstone_gamma(const ModelParams& p, double q, double theta,
                              AmplitudeBranch branch, double k, double xi) {
  const auto y = CharacteristicSystem<>::at_tube_angle(p, q, theta, branch, k).weak_roots(xi);
  const cplx& near = std::abs(y[0] - 1.0) < std::abs(y[1] - 1.0) ? y[0] : y[1];
  return -std::log(std::abs(near));
}

}  // namespace detail

/// Strong spectrum maximum over the k grid.
inline Witness strong_sup(const ModelParams& p, double q, double theta, AmplitudeBranch branch,
                          const std::vector<double>& k_grid) {
  Witness w;
  for (double k : k_grid) {
    const auto r = strong_spectrum(p, q, theta, k, branch);
    if (r[0].real() > w.value) w = {k, r[0].imag(), r[0].real()};
  }
  return w;
}

/// Weak spectrum supremum over the (k, xi) grid with the Goldstone box removed, plus a ring
/// of probes just outside the box so a positive cap at the origin is not lost.
inline Witness weak_sup(const ModelParams& p, double q, double theta, AmplitudeBranch branch,
                        const LargeDelayOptions& opt, double* curvature = nullptr) {
  if (p.eta == 0.0) throw DegenerateSpectrum("eta = 0: no pseudo-continuous spectrum");
  Witness w;
  for (double k : opt.k_grid) {
    const auto tube = CharacteristicSystem<>::at_tube_angle(p, q, theta, branch, k);
    const bool k_in_box = std::abs(k) < opt.k_excl;
    for (double xi : opt.xi_grid) {
      if (k_in_box && std::abs(xi) < opt.xi_excl) continue;
      const auto y = tube.weak_roots(xi);
      const double g = -std::log(std::min(std::abs(y[0]), std::abs(y[1])));
      if (g > w.value) w = {k, xi, g};
    }
  }
  // Parabolic probe of the phase-mode surface around the origin.
  const double hk = 2.0 * opt.k_excl;
  const double hx = 2.0 * opt.xi_excl;
  auto gg = [&](double k, double xi) { return detail::goldstone_gamma(p, q, theta, branch, k, xi); };
  const double g0 = gg(0.0, 0.0);
  const double gkp = gg(hk, 0.0), gkm = gg(-hk, 0.0), gxp = gg(0.0, hx), gxm = gg(0.0, -hx);
  const double gpp = gg(hk, hx), gmm = gg(-hk, -hx), gpm = gg(hk, -hx), gmp = gg(-hk, hx);
  const double hkk = (gkp - 2.0 * g0 + gkm) / (hk * hk);
  const double hxx = (gxp - 2.0 * g0 + gxm) / (hx * hx);
  const double hkx = (gpp - gpm - gmp + gmm) / (4.0 * hk * hx);
  const double tr = 0.5 * (hkk + hxx);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (hkk - hxx) * (hkk - hxx) + hkx * hkx));
  if (curvature) *curvature = tr + disc;
  const std::array<std::array<double, 3>, 8> ring{{{hk, 0.0, gkp},
                                                   {-hk, 0.0, gkm},
                                                   {0.0, hx, gxp},
                                                   {0.0, -hx, gxm},
                                                   {hk, hx, gpp},
                                                   {-hk, -hx, gmm},
                                                   {hk, -hx, gpm},
                                                   {-hk, hx, gmp}}};
  for (const auto& r : ring)
    if (r[2] > w.value) w = {r[0], r[1], r[2]};
  return w;
}

/// Large-delay class of the wave at tube angle theta: strong if the strong spectrum has
/// Re lambda > tol_strong, weak if sup gamma > tol_weak, stable otherwise.
inline StabilityClass classify_pw_large_delay(const ModelParams& p, double q, double theta,
                                              AmplitudeBranch branch = AmplitudeBranch::Plus,
                                              const LargeDelayOptions& opt = {}) {
  (void)planewave_from_theta(p, q, theta, branch);  // throws off the tube
  StabilityClass c;
  c.strong = strong_sup(p, q, theta, branch, opt.k_grid);
  c.weak = weak_sup(p, q, theta, branch, opt, &c.goldstone_curvature);
  if (c.strong.value > opt.tol_strong) {
    c.kind = StabilityKind::StrongUnstable;
    c.witness = c.strong;
  } else if (c.weak.value > opt.tol_weak) {
    c.kind = StabilityKind::WeakUnstable;
    c.witness = c.weak;
  } else {
    c.kind = StabilityKind::Stable;
    c.witness = c.weak.value > c.strong.value ? c.weak : c.strong;
  }
  return c;
}

/// 0 = stable, 1 = weak, 2 = strong, 3 = no solution.
enum class MapClass { Stable = 0, Weak = 1, Strong = 2, NoSolution = 3 };

inline MapClass to_map_class(StabilityKind k) { return static_cast<MapClass>(static_cast<int>(k)); }

struct MapNode {
  double delta = 0.0;
  double theta = 0.0;
  std::optional<PlaneWave> wave;
  MapClass cls = MapClass::NoSolution;
  StabilityClass detail;
};

/// Classifies every (delta, theta) node. Off-tube nodes are NoSolution.
inline std::vector<MapNode> stability_map(const ModelParams& p, double q,
                                          const std::vector<double>& delta_grid,
                                          const std::vector<double>& theta_grid,
                                          AmplitudeBranch branch = AmplitudeBranch::Plus,
                                          const LargeDelayOptions& opt = {}, unsigned threads = 1) {
  std::vector<MapNode> nodes(delta_grid.size() * theta_grid.size());
  parallel_for(nodes.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / theta_grid.size();
    const std::size_t j = idx % theta_grid.size();
    MapNode& n = nodes[idx];
    n.delta = delta_grid[i];
    n.theta = theta_grid[j];
    ModelParams pp = p;
    pp.delta = n.delta;
    try {
      n.wave = planewave_from_theta(pp, q, n.theta, branch);
    } catch (const NoRealAmplitude&) {
      n.cls = MapClass::NoSolution;
      return;
    }
    n.detail = classify_pw_large_delay(pp, q, n.theta, branch, opt);
    n.cls = to_map_class(n.detail.kind);
  });
  return nodes;
}

/// Which side of the tube a node lies on in the (delta, a0) projection: 0 for theta < pi.
inline int tube_half(double theta) { return wrap_angle(theta) < std::numbers::pi ? 0 : 1; }

}  // namespace dcgle
