#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "dcgle/model.hpp"
#include "dcgle/roots.hpp"

namespace dcgle {

/// f(omega) whose zeros are the plane-wave frequencies on one amplitude branch, or nullopt
/// where the branch has no real nonnegative amplitude.
inline std::optional<double> try_frequency_residual(const ModelParams& p, double q, double omega,
                                                    AmplitudeBranch branch) {
  const double arg = omega * p.tau - p.phi;
  const double c = p.delta - p.beta * q * q + p.eta * std::cos(arg);
  const auto s = detail::amplitude_squared(p, c, branch);
  if (!s) return std::nullopt;
  return omega + 0.5 * q * q - *s - p.nu * (*s) * (*s) + p.eta * std::sin(arg);
}

inline double pw_frequency_residual(const ModelParams& p, double q, double omega,
                                    AmplitudeBranch branch) {
  auto f = try_frequency_residual(p, q, omega, branch);
  if (!f) throw NoRealAmplitude("frequency residual: no real amplitude at this omega");
  return *f;
}

/// Squared amplitude carried by a frequency on a branch (the real-part relation).
inline std::optional<double> amplitude_squared_at(const ModelParams& p, double q, double omega,
                                                  AmplitudeBranch branch) {
  const double c = p.delta - p.beta * q * q + p.eta * std::cos(omega * p.tau - p.phi);
  return detail::amplitude_squared(p, c, branch);
}

struct FrequencyInterval {
  double lo;
  double hi;
};

/// Search window built from the delay-free envelopes (phi = 0 and phi = pi at tau = 0),
/// padded by eta + 1 on both sides. Falls back to sampling the tube when no envelope wave
/// exists.
inline FrequencyInterval default_frequency_range(const ModelParams& p, double q) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double sign : {1.0, -1.0}) {
    ModelParams env = p;
    env.delta = p.delta + sign * p.eta;
    for (const auto& r : nodelay_amplitude(env, q)) {
      const double w = nodelay_frequency(env, q, r.a0);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
  }
  if (!(lo <= hi)) {
    for (int i = 0; i < 720; ++i) {
      const double th = two_pi * i / 720.0;
      for (auto b : {AmplitudeBranch::Plus, AmplitudeBranch::Minus}) {
        try {
          const auto w = planewave_from_theta(p, q, th, b).omega;
          lo = std::min(lo, w);
          hi = std::max(hi, w);
        } catch (const NoRealAmplitude&) {
        }
      }
    }
  }
  if (!(lo <= hi)) {
    lo = -0.5 * q * q;
    hi = lo;
  }
  return {lo - p.eta - 1.0, hi + p.eta + 1.0};
}

/// Scan spacing that samples every oscillation of the delay phase at least 20 times.
inline double default_scan_spacing(const ModelParams& p) {
  if (p.tau <= 0.0) return 1e-3;
  return std::min(two_pi / (20.0 * p.tau * std::max(1.0, p.eta)), 1e-3);
}

struct FoundWave {
  PlaneWave wave;
  AmplitudeBranch branch;
};

struct PlaneWaveSearch {
  std::vector<FoundWave> waves;     ///< sorted by omega
  std::size_t resolution_warnings = 0;  ///< adjacent bracketing intervals (possible missed pair)
  double spacing = 0.0;
};

struct SearchOptions {
  double spacing = 0.0;  ///< 0 selects default_scan_spacing
  double dedup_tol = 1e-8;
};

namespace detail {

/// Scans one branch and appends the refined roots.
inline void scan_branch(const ModelParams& p, double q, FrequencyInterval range,
                        AmplitudeBranch branch, double h, PlaneWaveSearch& out) {
  auto f = [&](double w) { return try_frequency_residual(p, q, w, branch); };
  auto valid_edge = [&](double good, double bad) {
    // Shrink toward the last point where the branch still exists.
    for (int i = 0; i < 200 && std::abs(bad - good) > 1e-15 * std::max(1.0, std::abs(good)); ++i) {
      const double mid = 0.5 * (good + bad);
      (f(mid) ? good : bad) = mid;
    }
    return good;
  };

  // Nodes: the uniform grid plus refined edges of the branch's domain.
  std::vector<std::pair<double, double>> nodes;  // (omega, f)
  const auto n = static_cast<std::size_t>(std::ceil((range.hi - range.lo) / h));
  std::optional<double> prev_f;
  double prev_w = range.lo;
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = std::min(range.lo + static_cast<double>(i) * h, range.hi);
    const auto fw = f(w);
    if (i > 0 && prev_f.has_value() != fw.has_value()) {
      const double edge = prev_f ? valid_edge(prev_w, w) : valid_edge(w, prev_w);
      const auto fe = f(edge);
      constexpr double gap = std::numeric_limits<double>::quiet_NaN();
      if (prev_f) {
        if (fe) nodes.emplace_back(edge, *fe);
        nodes.emplace_back(gap, 0.0);
      } else {
        nodes.emplace_back(gap, 0.0);
        if (fe) nodes.emplace_back(edge, *fe);
      }
    }
    if (fw) nodes.emplace_back(w, *fw);
    prev_f = fw;
    prev_w = w;
  }

  auto fval = [&](double w) {
    auto v = f(w);
    return v ? *v : std::numeric_limits<double>::quiet_NaN();
  };
  bool last_bracketed = false;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto [w0, f0] = nodes[i - 1];
    const auto [w1, f1] = nodes[i];
    if (std::isnan(w0) || std::isnan(w1) || w1 <= w0) {
      last_bracketed = false;
      continue;
    }
    double root;
    if (f0 == 0.0) {
      root = w0;
    } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
      root = roots::bisect(fval, w0, w1, f0, 1e-13);
      const double polished = roots::newton_polish(fval, root, 1e-8);
      if (polished >= w0 && polished <= w1) root = polished;
    } else {
      last_bracketed = false;
      continue;
    }
    if (last_bracketed) ++out.resolution_warnings;
    last_bracketed = true;
    const auto s = amplitude_squared_at(p, q, root, branch);
    if (!s) continue;
    out.waves.push_back({{q, root, std::sqrt(*s), tube_angle(p, root)}, branch});
  }
}

}  // namespace detail

/// All plane waves with wavenumber q whose frequency lies in `range` (both amplitude
/// branches), sorted by frequency.
inline PlaneWaveSearch find_planewaves(const ModelParams& p, double q,
                                       std::optional<FrequencyInterval> range = std::nullopt,
                                       const SearchOptions& opt = {}) {
  const FrequencyInterval r = range.value_or(default_frequency_range(p, q));
  PlaneWaveSearch out;
  out.spacing = opt.spacing > 0.0 ? opt.spacing : default_scan_spacing(p);
  const bool linear = p.mu == 0.0;
  detail::scan_branch(p, q, r, AmplitudeBranch::Plus, out.spacing, out);
  if (!linear) detail::scan_branch(p, q, r, AmplitudeBranch::Minus, out.spacing, out);

  std::sort(out.waves.begin(), out.waves.end(),
            [](const FoundWave& a, const FoundWave& b) { return a.wave.omega < b.wave.omega; });
  std::vector<FoundWave> merged;
  for (const auto& w : out.waves) {
    if (!merged.empty() && std::abs(w.wave.omega - merged.back().wave.omega) < opt.dedup_tol)
      continue;
    merged.push_back(w);
  }
  out.waves = std::move(merged);
  return out;
}

/// Counts local extrema of f on a branch over the grid (oscillations of the frequency
/// residual).
inline std::size_t count_residual_extrema(const ModelParams& p, double q, FrequencyInterval r,
                                          AmplitudeBranch branch, double h) {
  std::size_t count = 0;
  std::optional<double> f0, f1;
  for (double w = r.lo; w <= r.hi; w += h) {
    const auto f2 = try_frequency_residual(p, q, w, branch);
    if (f0 && f1 && f2 && (*f1 - *f0) * (*f2 - *f1) < 0.0) ++count;
    f0 = f1;
    f1 = f2;
  }
  return count;
}

// ---------------------------------------------------------------------------------------------
// Branches parametrized by frequency.

struct BranchPoint {
  double omega;
  double a0;
  double delta;
  double theta;
};

struct BranchSegment {
  std::vector<BranchPoint> points;
};

/// Delay-free reference curve delta(a0) at tau = 0 with the given feedback phase.
struct EnvelopeCurve {
  double phi_ref;
  std::vector<std::pair<double, double>> a0_delta;
};

struct Branch {
  double q = 0.0;
  AmplitudeBranch tag = AmplitudeBranch::Plus;
  std::vector<BranchSegment> segments;
  std::vector<double> swaps;  ///< frequencies where the two amplitude roots merge
  std::size_t gap_points = 0;
  EnvelopeCurve envelope_in_phase;      ///< tau = 0, phi = 0
  EnvelopeCurve envelope_out_of_phase;  ///< tau = 0, phi = pi
};

/// Gain on the delay-free reference curve through amplitude a0, for feedback phase phi_ref.
inline double envelope_delta(const ModelParams& p, double q, double a0, double phi_ref) {
  const double s = a0 * a0;
  return p.beta * q * q - p.epsilon * s - p.mu * s * s - p.eta * std::cos(phi_ref);
}

/// The amplitude root that connects continuously to the nu -> 0 branch a0^2 = omega + q^2/2
/// + ...: Minus for nu < 0, Plus otherwise.
inline AmplitudeBranch physical_branch_tag(const ModelParams& p) {
  return p.nu < 0.0 ? AmplitudeBranch::Minus : AmplitudeBranch::Plus;
}

namespace detail {

inline std::optional<BranchPoint> branch_point(const ModelParams& p, double q, double omega,
                                               AmplitudeBranch tag, double* disc_out = nullptr) {
  const double arg = omega * p.tau - p.phi;
  const double rhs = p.eta * std::sin(arg) + omega + 0.5 * q * q;
  // nu s^2 + s - rhs = 0
  if (disc_out) *disc_out = 1.0 + 4.0 * p.nu * rhs;
  auto s = pick_root(real_quadratic_roots(p.nu, 1.0, -rhs), tag);
  if (!s || !(*s >= 0.0) || !std::isfinite(*s)) return std::nullopt;
  const double delta =
      p.beta * q * q - p.epsilon * (*s) - p.mu * (*s) * (*s) - p.eta * std::cos(arg);
  return BranchPoint{omega, std::sqrt(*s), delta, tube_angle(p, omega)};
}

}  // namespace detail

struct BranchOptions {
  double max_delta_step = 0.01;  ///< refine until consecutive gains differ by less
  int max_refine_depth = 12;
  std::size_t envelope_samples = 200;
};

/// Traces the branch (a0(omega), delta(omega)) over an increasing frequency grid.
inline Branch branch_trace(const ModelParams& p, double q, const std::vector<double>& omega_grid,
                           AmplitudeBranch tag, const BranchOptions& opt = {}) {
  Branch b;
  b.q = q;
  b.tag = tag;
  BranchSegment current;
  double prev_disc = 0.0;
  std::optional<BranchPoint> prev;

  auto flush = [&] {
    if (!current.points.empty()) b.segments.push_back(std::move(current));
    current = {};
  };

  // Appends points between prev and next until the gain step is small enough.
  std::function<void(const BranchPoint&, const BranchPoint&, int)> refine =
      [&](const BranchPoint& a, const BranchPoint& c, int depth) {
        if (depth >= opt.max_refine_depth || std::abs(c.delta - a.delta) <= opt.max_delta_step) {
          current.points.push_back(c);
          return;
        }
        const double wm = 0.5 * (a.omega + c.omega);
        auto m = detail::branch_point(p, q, wm, tag);
        if (!m) {
          current.points.push_back(c);
          return;
        }
        refine(a, *m, depth + 1);
        refine(*m, c, depth + 1);
      };

  for (double w : omega_grid) {
    double disc = 0.0;
    auto pt = detail::branch_point(p, q, w, tag, &disc);
    if (!pt) {
      ++b.gap_points;
      if (prev && prev_disc > 0.0 && disc < 0.0) b.swaps.push_back(w);
      flush();
      prev.reset();
      prev_disc = disc;
      continue;
    }
    if (prev) {
      refine(*prev, *pt, 0);
    } else {
      current.points.push_back(*pt);
    }
    prev = pt;
    prev_disc = disc;
  }
  flush();

  double amin = std::numeric_limits<double>::infinity();
  double amax = 0.0;
  for (const auto& seg : b.segments)
    for (const auto& pt : seg.points) {
      amin = std::min(amin, pt.a0);
      amax = std::max(amax, pt.a0);
    }
  if (amin <= amax) {
    b.envelope_in_phase.phi_ref = 0.0;
    b.envelope_out_of_phase.phi_ref = std::numbers::pi;
    for (std::size_t i = 0; i < opt.envelope_samples; ++i) {
      const double a = amin + (amax - amin) * static_cast<double>(i) /
                                  static_cast<double>(std::max<std::size_t>(1, opt.envelope_samples - 1));
      b.envelope_in_phase.a0_delta.emplace_back(a, envelope_delta(p, q, a, 0.0));
      b.envelope_out_of_phase.a0_delta.emplace_back(a, envelope_delta(p, q, a, std::numbers::pi));
    }
  }
  return b;
}

/// Local extrema of delta along the branch (folds) whose gain lies in [lo, hi].
inline std::size_t count_folds(const Branch& b, double lo, double hi) {
  std::size_t n = 0;
  for (const auto& seg : b.segments) {
    const auto& pts = seg.points;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const double d0 = pts[i].delta - pts[i - 1].delta;
      const double d1 = pts[i + 1].delta - pts[i].delta;
      if (d0 * d1 < 0.0 && pts[i].delta >= lo && pts[i].delta <= hi) ++n;
    }
  }
  return n;
}

/// Converts a branch point back to a plane wave.
inline PlaneWave to_planewave(double q, const BranchPoint& bp) {
  return {q, bp.omega, bp.a0, bp.theta};
}

}  // namespace dcgle
