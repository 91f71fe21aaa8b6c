#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dcgle/existence.hpp"
#include "dcgle/parallel.hpp"

using namespace dcgle;
constexpr double pi = std::numbers::pi;

namespace {

// f(omega) on one amplitude root, written out from the two real plane-wave relations.
std::optional<double> oracle_f(const ModelParams& p, double q, double w, int root) {
  const double arg = w * p.tau - p.phi;
  const double c = p.delta - p.beta * q * q + p.eta * std::cos(arg);
  const double disc = p.epsilon * p.epsilon - 4.0 * p.mu * c;
  if (disc < 0.0) return std::nullopt;
  const double r1 = (-p.epsilon + std::sqrt(disc)) / (2.0 * p.mu);
  const double r2 = (-p.epsilon - std::sqrt(disc)) / (2.0 * p.mu);
  const double s = root > 0 ? std::max(r1, r2) : std::min(r1, r2);
  if (s < 0.0) return std::nullopt;
  return w + 0.5 * q * q - s - p.nu * s * s + p.eta * std::sin(arg);
}

std::size_t oracle_count(const ModelParams& p, double q, FrequencyInterval r, double h) {
  std::size_t n = 0;
  for (int root : {1, -1}) {
    std::optional<double> prev;
    for (double w = r.lo; w <= r.hi; w += h) {
      const auto f = oracle_f(p, q, w, root);
      if (f && prev && ((*f < 0.0) != (*prev < 0.0))) ++n;
      prev = f;
    }
  }
  return n;
}

}  // namespace

TEST(FrequencyResidual, DelayFreeZeroIsTheNodelayFrequency) {
  const auto p = ModelParams::quintic(0.1);
  const auto r = nodelay_amplitude(p, 0.0);
  ASSERT_FALSE(r.empty());
  EXPECT_NEAR(r[0].a0, 1.04, 0.01);
  const double w = nodelay_frequency(p, 0.0, r[0].a0);
  EXPECT_NEAR(w, r[0].a0 * r[0].a0 + p.nu * std::pow(r[0].a0, 4), 1e-15);
  EXPECT_NEAR(pw_frequency_residual(p, 0.0, w, AmplitudeBranch::Plus), 0.0, 1e-14);
}

TEST(FrequencyResidual, ThrowsOffTheBranch) {
  const auto p = ModelParams::quintic(-1.0, 0.2, 5.0);
  EXPECT_THROW(pw_frequency_residual(p, 0.0, 0.3, AmplitudeBranch::Plus), NoRealAmplitude);
}

TEST(FrequencyResidual, MatchesOracle) {
  const auto p = ModelParams::quintic(0.4, 0.5, 7.0, 0.3);
  for (double w : linspace(-1.0, 2.0, 301))
    for (auto b : {AmplitudeBranch::Plus, AmplitudeBranch::Minus}) {
      const auto f = try_frequency_residual(p, 0.4, w, b);
      const auto o = oracle_f(p, 0.4, w, sign_of(b));
      ASSERT_EQ(f.has_value(), o.has_value());
      if (f) {
        EXPECT_NEAR(*f, *o, 1e-13);
      }
    }
}

TEST(FrequencyResidual, OscillationsGrowWithDelay) {
  const FrequencyInterval r{-1.0, 2.0};
  const double h = 1e-4;
  const auto n5 = count_residual_extrema(ModelParams::quintic(0.4, 0.5, 5.0), 0.0, r,
                                         AmplitudeBranch::Plus, h);
  const auto n50 = count_residual_extrema(ModelParams::quintic(0.4, 0.5, 50.0), 0.0, r,
                                          AmplitudeBranch::Plus, h);
  ASSERT_GT(n5, 0u);
  const double ratio = static_cast<double>(n50) / static_cast<double>(n5);
  EXPECT_NEAR(ratio, 10.0, 2.0);
}

TEST(FindPlaneWaves, ReportedLowGainPair) {
  const auto p = ModelParams::quintic(0.023, 0.2, 20.0);
  const auto res = find_planewaves(p, 0.0);
  auto near = [&](double w, double a) {
    for (const auto& x : res.waves)
      if (std::abs(x.wave.omega - w) < 0.01 && std::abs(x.wave.a0 - a) < 0.01) return true;
    return false;
  };
  EXPECT_TRUE(near(1.12, 1.086));
  EXPECT_TRUE(near(0.998, 1.166));
}

TEST(FindPlaneWaves, EveryRootSolvesTheModel) {
  for (double tau : {0.0, 2.0, 20.0, 80.0})
    for (double q : {0.0, 1.0}) {
      const auto p = ModelParams::quintic(0.4, 0.5, tau, 0.7);
      const auto res = find_planewaves(p, q);
      EXPECT_FALSE(res.waves.empty());
      for (const auto& w : res.waves) {
        EXPECT_LT(std::abs(residual_pw(p, w.wave)), 1e-9);
        EXPECT_LT(std::abs(tube_residual(p, w.wave)), 1e-9 * std::max(1.0, p.eta * p.eta));
        EXPECT_LT(std::abs(pw_frequency_residual(p, q, w.wave.omega, w.branch)), 1e-11);
        ASSERT_TRUE(w.wave.theta.has_value());
        EXPECT_LT(angle_distance(*w.wave.theta, w.wave.omega * tau - p.phi + pi), 1e-12);
      }
    }
}

TEST(FindPlaneWaves, SortedAndDistinct) {
  const auto res = find_planewaves(ModelParams::quintic(0.4, 0.5, 50.0), 0.0);
  for (std::size_t i = 1; i < res.waves.size(); ++i)
    EXPECT_GE(res.waves[i].wave.omega - res.waves[i - 1].wave.omega, 1e-8);
}

TEST(FindPlaneWaves, CountGrowsLinearlyWithDelay) {
  const FrequencyInterval r{-1.0, 2.0};
  std::vector<double> per_tau;
  for (double tau : {25.0, 50.0, 100.0}) {
    const auto p = ModelParams::quintic(0.4, 0.5, tau);
    const auto res = find_planewaves(p, 0.0, r);
    const auto dense = oracle_count(p, 0.0, r, res.spacing / 10.0);
    EXPECT_EQ(res.waves.size(), dense) << "tau=" << tau;
    per_tau.push_back(static_cast<double>(res.waves.size()) / tau);
  }
  const auto [lo, hi] = std::minmax_element(per_tau.begin(), per_tau.end());
  EXPECT_LE(*hi / *lo, 1.2);
}

TEST(FindPlaneWaves, NoMissedSignChangeOnSmallDelays) {
  for (double tau : {0.5, 2.0, 5.0}) {
    const auto p = ModelParams::quintic(0.4, 0.5, tau, 0.2);
    const auto r = default_frequency_range(p, 0.0);
    const auto res = find_planewaves(p, 0.0, r);
    const double h = (r.hi - r.lo) / 1e6;
    EXPECT_EQ(res.waves.size(), oracle_count(p, 0.0, r, h)) << "tau=" << tau;
  }
}

TEST(FindPlaneWaves, CubicModelUsesOneBranch) {
  const auto p = ModelParams::cubic_model(0.5, 0.2, 10.0);
  const auto res = find_planewaves(p, 0.0);
  ASSERT_FALSE(res.waves.empty());
  for (const auto& w : res.waves) {
    EXPECT_EQ(w.branch, AmplitudeBranch::Plus);
    EXPECT_LT(std::abs(residual_pw(p, w.wave)), 1e-9);
  }
}

TEST(FindPlaneWaves, FeedbackPhaseShiftsByWholeTurnsOnly) {
  // Only phi -> phi + 2 pi m leaves the root set unchanged; shifting phi by c and omega by
  // c / tau changes the i omega term.
  const auto a = find_planewaves(ModelParams::quintic(0.4, 0.5, 10.0, 0.3), 0.0);
  const auto b = find_planewaves(ModelParams::quintic(0.4, 0.5, 10.0, 0.3 + two_pi), 0.0);
  ASSERT_EQ(a.waves.size(), b.waves.size());
  for (std::size_t i = 0; i < a.waves.size(); ++i)
    EXPECT_NEAR(a.waves[i].wave.omega, b.waves[i].wave.omega, 1e-9);
  const auto p = ModelParams::quintic(0.4, 0.5, 10.0, 0.3 + 0.5);
  PlaneWave moved = a.waves.front().wave;
  moved.omega += 0.5 / 10.0;
  EXPECT_GT(std::abs(residual_pw(p, moved)), 1e-3);
}

TEST(Branch, DelayFreeBranchIsTheNodelayCurve) {
  const auto p = ModelParams::quintic(0.0, 0.0, 0.0);
  const double q = 0.5;
  const auto b = branch_trace(p, q, linspace(-0.5, 1.5, 401), physical_branch_tag(p));
  ASSERT_FALSE(b.segments.empty());
  for (const auto& seg : b.segments)
    for (const auto& pt : seg.points) {
      const double s = pt.a0 * pt.a0;
      EXPECT_NEAR(p.epsilon * s + p.mu * s * s, p.beta * q * q - pt.delta, 1e-12);
      EXPECT_NEAR(pt.omega, -0.5 * q * q + s + p.nu * s * s, 1e-12);
    }
}

TEST(Branch, PointsSolveTheModelAndStayInsideEnvelopes) {
  const double q = 1.0;
  const auto base = ModelParams::quintic(0.0, 0.2, 50.0);
  const auto b = branch_trace(base, q, linspace(-0.5, 1.5, 20001), physical_branch_tag(base));
  std::size_t n = 0;
  for (const auto& seg : b.segments)
    for (const auto& pt : seg.points) {
      ModelParams p = base;
      p.delta = pt.delta;
      EXPECT_LT(std::abs(residual_pw(p, to_planewave(q, pt))), 1e-10);
      const double e0 = envelope_delta(base, q, pt.a0, 0.0);
      const double e1 = envelope_delta(base, q, pt.a0, pi);
      EXPECT_GE(pt.delta, std::min(e0, e1) - 1e-9);
      EXPECT_LE(pt.delta, std::max(e0, e1) + 1e-9);
      ++n;
    }
  EXPECT_GT(n, 1000u);
}

TEST(Branch, RefinementKeepsGainStepsSmall) {
  const auto p = ModelParams::quintic(0.0, 0.2, 50.0);
  const auto b = branch_trace(p, 1.0, linspace(-0.5, 1.5, 500), physical_branch_tag(p));
  for (const auto& seg : b.segments)
    for (std::size_t i = 1; i < seg.points.size(); ++i)
      EXPECT_LE(std::abs(seg.points[i].delta - seg.points[i - 1].delta), 0.01 + 1e-12);
}

namespace {

std::size_t folds_at(double tau, double lo = 0.2, double hi = 1.0) {
  const auto p = ModelParams::quintic(0.0, 0.2, tau);
  const auto b = branch_trace(p, 1.0, linspace(-1.0, 3.0, 80001), physical_branch_tag(p));
  return count_folds(b, lo, hi);
}

}  // namespace

TEST(Branch, SnakingDensityScalesWithDelay) {
  const auto n5 = folds_at(5.0), n50 = folds_at(50.0);
  ASSERT_GT(n5, 0u) << "tau=50 gives " << n50 << " folds";
  EXPECT_NEAR(static_cast<double>(n50) / static_cast<double>(n5), 10.0, 2.5);
}

TEST(Branch, SnakingGrowsWithDelay) {
  std::size_t prev = 0;
  for (double tau : {10.0, 20.0, 50.0, 100.0}) {
    const auto n = folds_at(tau);
    EXPECT_GT(n, prev) << "tau=" << tau;
    prev = n;
  }
}

TEST(Branch, GapsSplitSegments) {
  // With nu < 0 the amplitude quadratic loses its real roots at large frequency.
  const auto p = ModelParams::quintic(0.0, 0.2, 5.0);
  const auto b = branch_trace(p, 0.0, linspace(-0.5, 4.0, 2001), AmplitudeBranch::Minus);
  EXPECT_GT(b.gap_points, 0u);
  EXPECT_FALSE(b.segments.empty());
}
