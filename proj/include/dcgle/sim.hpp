#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dcgle/model.hpp"

namespace dcgle {

using Field = std::vector<cplx>;

/// Uniform periodic grid x_j = j h, h = length / n_points.
struct Grid {
  std::size_t n_points = 500;
  double length = 32.0 * std::numbers::pi;

  Grid() = default;
  Grid(std::size_t n, double l) : n_points(n), length(l) {
    if (n < 16) throw RangeError("n_points", "must be >= 16");
    if (!(l > 0.0)) throw RangeError("length", "must be > 0");
  }

  double spacing() const noexcept { return length / static_cast<double>(n_points); }
  double x(std::size_t j) const noexcept { return static_cast<double>(j) * spacing(); }
  double wavenumber_step() const noexcept { return two_pi / length; }

  /// Signed mode index of wavenumber q, or nullopt if q is not a multiple of 2 pi / L.
  std::optional<long> mode_of(double q, double tol = 1e-9) const {
    const double m = q / wavenumber_step();
    const double r = std::round(m);
    if (std::abs(m - r) > tol * std::max(1.0, std::abs(m))) return std::nullopt;
    return static_cast<long>(r);
  }

  /// Wavenumber of FFT bin b, folded into (-N/2, N/2].
  double bin_wavenumber(std::size_t b) const noexcept {
    const long n = static_cast<long>(n_points);
    long m = static_cast<long>(b);
    if (m > n / 2) m -= n;
    return static_cast<double>(m) * wavenumber_step();
  }
};

/// Wavenumber whose continuum Laplacian symbol equals the three-point stencil symbol of q.
/// Plane waves of the discretized system are exact with q replaced by this value.
inline double effective_wavenumber(const Grid& g, double q) {
  const double h = g.spacing();
  return std::sqrt(2.0 / (h * h) * (1.0 - std::cos(q * h)));
}

struct FieldState {
  double t = 0.0;
  Field values;
};

struct Perturbation {
  enum class Kind { None, Modal, Noise };
  Kind kind = Kind::None;
  double k = 0.0;
  double amplitude = 0.0;
  std::uint64_t seed = 0;

  static Perturbation none() { return {}; }
  static Perturbation modal(double k, double amplitude) { return {Kind::Modal, k, amplitude, 0}; }
  static Perturbation noise(double amplitude, std::uint64_t seed) {
    return {Kind::Noise, 0.0, amplitude, seed};
  }
};

/// History on t <= 0: (a0 + p(x)) e^{i(q x + omega t)}.
class InitialHistory {
 public:
  InitialHistory(const Grid& g, const PlaneWave& pw, const Perturbation& pert)
      : grid_(g), wave_(pw), pert_(pert), profile_(g.n_points, cplx(pw.a0)) {
    if (!g.mode_of(pw.q)) throw InadmissibleWavenumber("plane-wave wavenumber is not a grid mode");
    if (pert.amplitude < 0.0) throw RangeError("perturbation", "amplitude must be >= 0");
    switch (pert.kind) {
      case Perturbation::Kind::None:
        break;
      case Perturbation::Kind::Modal:
        if (!g.mode_of(pert.k))
          throw InadmissibleWavenumber("perturbation wavenumber is not a grid mode");
        for (std::size_t j = 0; j < g.n_points; ++j)
          profile_[j] += pert.amplitude * std::cos(pert.k * g.x(j));
        break;
      case Perturbation::Kind::Noise: {
        std::mt19937_64 rng(pert.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& v : profile_) {
          const double re = u(rng);
          const double im = u(rng);
          v += pert.amplitude * cplx(re, im);
        }
        break;
      }
    }
  }

  Field operator()(double t) const {
    Field out(grid_.n_points);
    eval(t, out);
    return out;
  }

  void eval(double t, Field& out) const {
    out.resize(grid_.n_points);
    for (std::size_t j = 0; j < grid_.n_points; ++j)
      out[j] = profile_[j] * std::polar(1.0, wave_.q * grid_.x(j) + wave_.omega * t);
  }

  const Grid& grid() const noexcept { return grid_; }
  const PlaneWave& wave() const noexcept { return wave_; }
  const Perturbation& perturbation() const noexcept { return pert_; }

 private:
  Grid grid_;
  PlaneWave wave_;
  Perturbation pert_;
  Field profile_;
};

inline InitialHistory make_initial_history(const Grid& g, const PlaneWave& pw,
                                           const Perturbation& pert = {}) {
  return InitialHistory(g, pw, pert);
}

/// Method-of-lines right-hand side with the three-point Laplacian on the periodic grid.
inline void rhs(const Field& a, const Field& delayed, const ModelParams& p, const Grid& g,
                Field& out) {
  const std::size_t n = a.size();
  out.resize(n);
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const cplx diff(p.beta, 0.5);
  const cplx cub(p.epsilon, 1.0);
  const cplx quint(p.mu, p.nu);
  const cplx fb = p.eta * std::polar(1.0, p.phi);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx& l = a[j == 0 ? n - 1 : j - 1];
    const cplx& r = a[j + 1 == n ? 0 : j + 1];
    const double m = std::norm(a[j]);
    out[j] = diff * ((l - 2.0 * a[j] + r) * inv_h2) + (p.delta + cub * m + quint * (m * m)) * a[j];
    if (p.eta != 0.0) out[j] += fb * delayed[j];
  }
}

inline Field rhs(const FieldState& s, const FieldState& delayed, const ModelParams& p,
                 const Grid& g) {
  Field out;
  rhs(s.values, delayed.values, p, g, out);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Spectral helpers.

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Unnormalized forward DFT, sum_j a_j e^{-2 pi i j b / N}.
inline Field forward_dft(const Field& a) {
  const int n = static_cast<int>(a.size());
  Field in(a), out(a.size());
  auto* pin = reinterpret_cast<fftw_complex*>(in.data());
  auto* pout = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, pin, pout, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

struct SpectralPeak {
  std::size_t bin = 0;
  double q = 0.0;
  cplx coefficient{};     ///< mean of a_j e^{-i q x_j}
  double power_fraction = 0.0;
};

inline SpectralPeak spectral_peak(const Field& a, const Grid& g) {
  const Field f = forward_dft(a);
  SpectralPeak pk;
  double total = 0.0, best = -1.0;
  for (std::size_t b = 0; b < f.size(); ++b) {
    const double pw = std::norm(f[b]);
    total += pw;
    if (pw > best) {
      best = pw;
      pk.bin = b;
    }
  }
  pk.q = g.bin_wavenumber(pk.bin);
  pk.coefficient = f[pk.bin] / static_cast<double>(f.size());
  pk.power_fraction = total > 0.0 ? best / total : 0.0;
  return pk;
}

/// Root-mean-square of everything outside Fourier mode q.
inline double offmode_rms(const Field& a, const Grid& g, double q) {
  const Field f = forward_dft(a);
  const auto m = g.mode_of(q);
  const long n = static_cast<long>(f.size());
  const std::size_t keep = m ? static_cast<std::size_t>(((*m % n) + n) % n) : f.size();
  double s = 0.0;
  for (std::size_t b = 0; b < f.size(); ++b)
    if (b != keep) s += std::norm(f[b]);
  return std::sqrt(s) / static_cast<double>(f.size());
}

inline double mean_modulus(const Field& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::abs(v);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

inline double max_modulus(const Field& a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Local minima of |A| lying below threshold * mean |A|.
inline std::size_t count_defects(const Field& a, double threshold = 0.2) {
  const std::size_t n = a.size();
  const double cut = threshold * mean_modulus(a);
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double m = std::abs(a[j]);
    const double l = std::abs(a[j == 0 ? n - 1 : j - 1]);
    const double r = std::abs(a[j + 1 == n ? 0 : j + 1]);
    if (m < cut && m <= l && m < r) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------------------------
// Dense history of accepted steps.

/// Accepted steps (t, y, y') with cubic Hermite interpolation between them. Times before
/// the first stored step are served by the initial history.
class HistoryBuffer {
 public:
  struct Node {
    double t;
    Field y;
    Field f;
  };

  explicit HistoryBuffer(InitialHistory init) : init_(std::move(init)) {}

  void push(double t, const Field& y, const Field& f) { nodes_.push_back({t, y, f}); }

  /// Drops nodes that can no longer be queried (older than t_min), keeping one bracket node.
  void prune(double t_min) {
    while (nodes_.size() > 2 && nodes_[1].t <= t_min) nodes_.pop_front();
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  void eval(double t, Field& out) const {
    if (nodes_.empty() || t <= nodes_.front().t) {
      if (!nodes_.empty() && t == nodes_.front().t) {
        out = nodes_.front().y;
        return;
      }
      init_.eval(t, out);
      return;
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                               [](double v, const Node& n) { return v < n.t; });
    if (it == nodes_.end()) {
      out = nodes_.back().y;
      return;
    }
    const Node& b = *it;
    const Node& a = *(it - 1);
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    out.resize(a.y.size());
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = h00 * a.y[j] + (h10 * h) * a.f[j] + h01 * b.y[j] + (h11 * h) * b.f[j];
  }

 private:
  InitialHistory init_;
  std::deque<Node> nodes_;
};

// ---------------------------------------------------------------------------------------------
// Time integration.

struct ObservableRow {
  double t;
  double mean_amp;
  double max_amp;
  double dominant_q;
  double omega_est;  ///< phase drift rate of the dominant mode since the previous row
  std::size_t defect_count;
};

struct IntegratorOptions {
  double rtol = 1e-6;
  double atol = 1e-9;
  double h_init = 1e-3;
  double h_max = 0.0;          ///< 0: no cap beyond tau / 2
  double fixed_step = 0.0;     ///< > 0 disables error control
  double snapshot_every = 0.0; ///< 0: only the final state
  double observe_every = 0.0;  ///< 0: every accepted step
  double defect_threshold = 0.2;
  std::size_t max_steps = 50'000'000;
};

struct IntegrationResult {
  std::vector<FieldState> snapshots;
  std::vector<ObservableRow> observables;
  FieldState final_state;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double min_step = std::numeric_limits<double>::infinity();
};

/// Raised when the field stops being finite; carries the last accepted state.
class NonFiniteFieldAt : public NonFiniteField {
 public:
  NonFiniteFieldAt(FieldState last)
      : NonFiniteField("non-finite field after t = " + std::to_string(last.t)),
        last_(std::move(last)) {}
  const FieldState& last_good() const noexcept { return last_; }

 private:
  FieldState last_;
};

namespace detail {

// Cash-Karp embedded 5(4) pair.
struct CashKarp {
  static constexpr double c[6] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0};
  static constexpr double a[6][5] = {
      {0, 0, 0, 0, 0},
      {1.0 / 5.0, 0, 0, 0, 0},
      {3.0 / 40.0, 9.0 / 40.0, 0, 0, 0},
      {3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0, 0},
      {-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0},
      {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0}};
  static constexpr double b5[6] = {37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0,
                                   512.0 / 1771.0};
  static constexpr double b4[6] = {2825.0 / 27648.0, 0.0, 18575.0 / 48384.0,
                                   13525.0 / 55296.0, 277.0 / 14336.0, 1.0 / 4.0};
};

inline bool all_finite(const Field& a) {
  for (const auto& v : a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace detail

/// Integrates the discretized model from t = 0 to t_end. The delayed field comes from the
/// initial history for t - tau <= 0 and from Hermite interpolation of accepted steps after.
inline IntegrationResult integrate(const ModelParams& p, const Grid& g, const InitialHistory& init,
                                   double t_end, const IntegratorOptions& opt = {}) {
  using CK = detail::CashKarp;
  if (!(t_end > 0.0)) throw RangeError("t_end", "must be > 0");
  if (!(opt.rtol > 0.0)) throw RangeError("rtol", "must be > 0");
  if (!(opt.atol > 0.0)) throw RangeError("atol", "must be > 0");
  const std::size_t n = g.n_points;
  const bool delayed = p.eta != 0.0 && p.tau > 0.0;

  HistoryBuffer hist(init);
  double h_cap = std::numeric_limits<double>::infinity();
  if (delayed) h_cap = 0.5 * p.tau;
  if (opt.h_max > 0.0) h_cap = std::min(h_cap, opt.h_max);

  IntegrationResult res;
  Field y = init(0.0);
  Field dl(n), f0(n), tmp(n), y5(n), err(n);
  std::array<Field, 6> k;
  for (auto& v : k) v.resize(n);

  auto eval_rhs = [&](double t, const Field& state, Field& out) {
    ++res.rhs_evaluations;
    if (delayed) {
      hist.eval(t - p.tau, dl);
      rhs(state, dl, p, g, out);
    } else {
      // tau = 0 feeds back the current field; eta = 0 ignores the second argument.
      rhs(state, state, p, g, out);
    }
  };

  double t = 0.0;
  eval_rhs(t, y, f0);
  if (delayed) hist.push(t, y, f0);

  double last_obs_t = 0.0;
  double last_phase = 0.0;
  double next_snapshot = 0.0;
  double next_observe = 0.0;
  auto observe = [&](bool force) {
    if (!force && opt.observe_every > 0.0 && t + 1e-12 < next_observe) return;
    const SpectralPeak pk = spectral_peak(y, g);
    const double phase = std::arg(pk.coefficient);
    double w = std::numeric_limits<double>::quiet_NaN();
    if (!res.observables.empty() && t > last_obs_t &&
        res.observables.back().dominant_q == pk.q) {
      double d = phase - last_phase;
      d -= two_pi * std::round(d / two_pi);
      w = d / (t - last_obs_t);
    }
    res.observables.push_back({t, mean_modulus(y), max_modulus(y), pk.q, w,
                               count_defects(y, opt.defect_threshold)});
    last_obs_t = t;
    last_phase = phase;
    if (opt.observe_every > 0.0)
      while (next_observe <= t + 1e-12) next_observe += opt.observe_every;
  };
  auto snapshot = [&](bool force) {
    if (opt.snapshot_every > 0.0 && t + 1e-12 >= next_snapshot) {
      res.snapshots.push_back({t, y});
      while (next_snapshot <= t + 1e-12) next_snapshot += opt.snapshot_every;
    } else if (force && (res.snapshots.empty() || res.snapshots.back().t != t)) {
      res.snapshots.push_back({t, y});
    }
  };
  observe(true);
  snapshot(false);

  const bool fixed = opt.fixed_step > 0.0;
  double h = fixed ? opt.fixed_step : std::min(opt.h_init, h_cap);
  const double h_floor = 1e-12 * t_end;
  std::size_t steps = 0;

  while (t < t_end) {
    if (++steps > opt.max_steps) throw StepSizeUnderflow("step budget exhausted");
    bool last = false;
    double hs = std::min(h, h_cap);
    if (t + hs >= t_end) {
      hs = t_end - t;
      last = true;
    }
    k[0] = f0;
    for (int s = 1; s < 6; ++s) {
      for (std::size_t j = 0; j < n; ++j) {
        cplx acc = 0.0;
        for (int r = 0; r < s; ++r) acc += CK::a[s][r] * k[r][j];
        tmp[j] = y[j] + hs * acc;
      }
      eval_rhs(t + CK::c[s] * hs, tmp, k[s]);
    }
    double enorm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cplx s5 = 0.0, s4 = 0.0;
      for (int s = 0; s < 6; ++s) {
        s5 += CK::b5[s] * k[s][j];
        s4 += CK::b4[s] * k[s][j];
      }
      y5[j] = y[j] + hs * s5;
      const double e = hs * std::abs(s5 - s4);
      enorm = std::max(enorm, e / (opt.atol + opt.rtol * std::max(std::abs(y[j]), std::abs(y5[j]))));
    }
    if (!std::isfinite(enorm) && !fixed) enorm = 1e10;

    if (!fixed && enorm > 1.0) {
      ++res.rejected;
      h = hs * std::max(0.2, 0.9 * std::pow(enorm, -0.25));
      if (h < h_floor) throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t));
      continue;
    }
    if (!detail::all_finite(y5)) throw NonFiniteFieldAt(FieldState{t, y});

    t = last ? t_end : t + hs;
    y.swap(y5);
    eval_rhs(t, y, f0);
    ++res.accepted;
    res.min_step = std::min(res.min_step, hs);
    if (delayed) {
      hist.push(t, y, f0);
      hist.prune(t - p.tau - h_cap);
    }
    if (!fixed) {
      const double fac = enorm > 0.0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
      h = hs * std::clamp(fac, 0.2, 5.0);
      if (last) h = std::max(h, hs);
    }
    observe(last);
    snapshot(last);
  }
  res.final_state = {t, y};
  return res;
}

// ---------------------------------------------------------------------------------------------
// Plane-wave recognition.

struct PlaneWaveEstimate {
  double q = 0.0;
  double omega = 0.0;
  double a0 = 0.0;
  bool is_planewave = false;
  double modulus_variation = 0.0;  ///< (max - min) / mean of |A| on the final snapshot
  double peak_power = 0.0;         ///< power fraction in the dominant mode
};

/// Fits a plane wave to a window of snapshots. The frequency is the least-squares slope of
/// the unwrapped phase of the dominant Fourier mode.
inline PlaneWaveEstimate estimate_planewave(const std::vector<FieldState>& window, const Grid& g) {
  if (window.empty()) throw RangeError("window", "needs at least one snapshot");
  const FieldState& last = window.back();
  const SpectralPeak pk = spectral_peak(last.values, g);
  PlaneWaveEstimate e;
  e.q = pk.q;
  e.a0 = mean_modulus(last.values);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& v : last.values) {
    lo = std::min(lo, std::abs(v));
    hi = std::max(hi, std::abs(v));
  }
  e.modulus_variation = e.a0 > 0.0 ? (hi - lo) / e.a0 : 0.0;
  e.peak_power = pk.power_fraction;

  if (window.size() >= 2) {
    std::vector<double> ts, ph;
    double prev = 0.0, offset = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
      double mean_re = 0.0, mean_im = 0.0;
      for (std::size_t j = 0; j < g.n_points; ++j) {
        const cplx v = window[i].values[j] * std::polar(1.0, -pk.q * g.x(j));
        mean_re += v.real();
        mean_im += v.imag();
      }
      const double a = std::atan2(mean_im, mean_re);
      if (i > 0) {
        double d = a - prev;
        d -= two_pi * std::round(d / two_pi);
        offset += d;
      } else {
        offset = a;
      }
      prev = a;
      ts.push_back(window[i].t);
      ph.push_back(offset);
    }
    const double m = static_cast<double>(ts.size());
    double st = 0.0, sp = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      st += ts[i];
      sp += ph[i];
    }
    st /= m;
    sp /= m;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      num += (ts[i] - st) * (ph[i] - sp);
      den += (ts[i] - st) * (ts[i] - st);
    }
    e.omega = den > 0.0 ? num / den : 0.0;
  }
  e.is_planewave = e.modulus_variation < 0.01 && e.peak_power > 0.99;
  return e;
}

}  // namespace dcgle
