#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dcgle/existence.hpp"
#include "dcgle/model.hpp"

using namespace dcgle;
constexpr double pi = std::numbers::pi;

TEST(Residual, CubicWaveAtUnitAmplitudeIsExact) {
  ModelParams p{0.5, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  // Real part: epsilon a0^2 = beta q^2 - delta; imaginary part: omega = -q^2/2 + a0^2.
  EXPECT_LT(std::abs(residual_pw(p, {0.0, 1.0, 1.0})), 1e-15);
}

TEST(Residual, ZeroStateLeavesOnlyTheFrequency) {
  ModelParams p = ModelParams::quintic(0.0);
  for (double w : {-2.0, 0.0, 0.7}) {
    const cplx r = residual_pw(p, {0.0, w, 0.0});
    EXPECT_DOUBLE_EQ(r.real(), 0.0);
    EXPECT_DOUBLE_EQ(r.imag(), w);
  }
}

TEST(Residual, ReportedLowGainStableWaveSolvesModel) {
  const auto p = ModelParams::quintic(0.023, 0.2, 20.0);
  EXPECT_LT(std::abs(residual_pw(p, {0.0, 0.998, 1.166})), 5e-3);
}

TEST(Residual, IsEvenInWavenumber) {
  const auto p = ModelParams::quintic(0.3, 0.2, 7.0, 0.4);
  for (double q : {0.3, 1.0, 2.2}) {
    const PlaneWave a{q, 0.4, 0.9}, b{-q, 0.4, 0.9};
    EXPECT_EQ(residual_pw(p, a), residual_pw(p, b));
    EXPECT_EQ(tube_residual(p, a), tube_residual(p, b));
  }
}

TEST(NodelayAmplitude, UpperBranchAtSmallPositiveGain) {
  const auto r = nodelay_amplitude(ModelParams::quintic(0.1), 0.0);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r.front().branch, AmplitudeBranch::Plus);
  EXPECT_NEAR(r.front().a0, 1.04, 0.01);
}

TEST(NodelayAmplitude, UpperBranchAtNegativeGain) {
  const auto r = nodelay_amplitude(ModelParams::quintic(-0.2), 0.0);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].branch, AmplitudeBranch::Plus);
  EXPECT_NEAR(r[0].a0, 0.85, 0.01);
  EXPECT_LT(r[1].a0, r[0].a0);
}

TEST(NodelayAmplitude, ZeroAmplitudeAtTheHopfPoint) {
  for (double q : {0.0, 0.5, 1.3}) {
    auto p = ModelParams::quintic();
    p.delta = p.beta * q * q;
    const auto r = nodelay_amplitude(p, q);
    bool has_zero = false;
    for (const auto& x : r) has_zero |= x.a0 < 1e-12;
    EXPECT_TRUE(has_zero) << "q=" << q;
  }
}

TEST(NodelayAmplitude, EmptyWhenNoRealRoot) {
  // s^2 + s + 1 has no real root.
  ModelParams p{0.5, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  EXPECT_TRUE(nodelay_amplitude(p, 0.0).empty());
  ModelParams c = ModelParams::cubic_model(-0.5);
  EXPECT_TRUE(nodelay_amplitude(c, 0.0).empty());
}

TEST(NodelayAmplitude, RootsZeroTheRealPart) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-0.25, 1.0), qd(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const auto p = ModelParams::quintic(d(rng));
    const double q = qd(rng);
    for (const auto& r : nodelay_amplitude(p, q)) {
      const PlaneWave pw{q, nodelay_frequency(p, q, r.a0), r.a0};
      EXPECT_LT(std::abs(residual_pw(p, pw).real()), 1e-12);
      EXPECT_LT(std::abs(residual_pw(p, pw).imag()), 1e-12);
    }
  }
}

TEST(NodelayAmplitude, CubicPathMatchesSmallQuinticCoefficient) {
  for (double eps : {-1.0, 1.0}) {
    for (double delta : {-0.4, 0.3, 0.8}) {
      ModelParams c{0.5, delta, eps, 0.0, 0.0, 0.0, 0.0, 0.0};
      ModelParams m = c;
      m.mu = -1e-6;
      const auto rc = nodelay_amplitude(c, 0.4);
      const auto rm = nodelay_amplitude(m, 0.4);
      if (rc.empty()) continue;
      double best = 1e300;
      for (const auto& r : rm) best = std::min(best, std::abs(r.a0 - rc[0].a0));
      EXPECT_LT(best, 1e-4) << "eps=" << eps << " delta=" << delta;
    }
  }
}

TEST(TubeResidual, VanishesOnDelayFreeWaves) {
  const auto p = ModelParams::quintic(0.2);
  for (const auto& r : nodelay_amplitude(p, 0.3))
    EXPECT_NEAR(tube_residual(p, {0.3, nodelay_frequency(p, 0.3, r.a0), r.a0}), 0.0, 1e-13);
}

TEST(TubeResidual, CrossSectionIsAClosedCurve) {
  // Points of the tube cross-section at delta = 0.4, eta = 0.5 sampled by the tube angle.
  const auto p = ModelParams::quintic(0.4, 0.5);
  int found = 0;
  for (int i = 0; i < 64; ++i) {
    const double th = two_pi * i / 64.0;
    const auto pw = planewave_from_theta(p, 0.0, th, AmplitudeBranch::Plus);
    EXPECT_LT(std::abs(tube_residual(p, pw)), 1e-12);
    ++found;
  }
  EXPECT_EQ(found, 64);
}

TEST(FromTheta, MaximalAmplitudeAtPi) {
  const auto p = ModelParams::quintic(0.5, 0.2);
  const double at_pi = planewave_from_theta(p, 0.0, pi, AmplitudeBranch::Plus).a0;
  for (int i = 0; i < 360; ++i) {
    const double th = two_pi * i / 360.0;
    EXPECT_LE(planewave_from_theta(p, 0.0, th, AmplitudeBranch::Plus).a0, at_pi + 1e-15);
  }
}

TEST(FromTheta, ReportedWeaklyUnstableLargeDelayWave) {
  const auto p = ModelParams::quintic(0.56, 0.2, 50.0);
  const auto pw = planewave_from_theta(p, 1.0, 3.94, AmplitudeBranch::Plus);
  EXPECT_NEAR(pw.omega, 0.33, 0.02);
  EXPECT_NEAR(pw.a0, 1.05, 0.02);
}

TEST(FromTheta, RandomPointsLieOnTheTube) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-0.2, 1.2), th(0.0, two_pi), qd(-1.2, 1.2),
      e(0.0, 0.6);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto p = ModelParams::quintic(d(rng), e(rng));
    for (auto b : {AmplitudeBranch::Plus, AmplitudeBranch::Minus}) {
      try {
        const auto pw = planewave_from_theta(p, qd(rng), th(rng), b);
        EXPECT_LT(std::abs(tube_residual(p, pw)), 1e-10);
        ++checked;
      } catch (const NoRealAmplitude&) {
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(FromTheta, OffTubeThrows) {
  const auto p = ModelParams::quintic(-2.0, 0.2);
  EXPECT_THROW(planewave_from_theta(p, 0.0, 0.0, AmplitudeBranch::Plus), NoRealAmplitude);
}

TEST(FromTheta, IndependentOfDelay) {
  for (double tau : {0.0, 3.0, 500.0}) {
    const auto p = ModelParams::quintic(0.5, 0.2, tau);
    const auto pw = planewave_from_theta(p, 0.5, 2.0, AmplitudeBranch::Plus);
    const auto ref = planewave_from_theta(ModelParams::quintic(0.5, 0.2), 0.5, 2.0,
                                          AmplitudeBranch::Plus);
    EXPECT_EQ(pw.omega, ref.omega);
    EXPECT_EQ(pw.a0, ref.a0);
  }
}

TEST(FromTheta, AgreesWithFiniteDelayRootsAtClosureAngles) {
  const auto p = ModelParams::quintic(0.4, 0.5, 5.0, 0.3);
  const auto found = find_planewaves(p, 0.0);
  ASSERT_FALSE(found.waves.empty());
  for (const auto& w : found.waves) {
    const double th = *w.wave.theta;
    EXPECT_LT(angle_distance(w.wave.omega * p.tau - p.phi, th - pi), 1e-9);
    const auto pw = planewave_from_theta(p, 0.0, th, w.branch);
    EXPECT_NEAR(pw.omega, w.wave.omega, 1e-9);
    EXPECT_NEAR(pw.a0, w.wave.a0, 1e-9);
  }
}

TEST(Angles, WrapIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(-0.5), two_pi - 0.5);
  EXPECT_DOUBLE_EQ(wrap_angle(two_pi + 0.25), 0.25);
  EXPECT_EQ(wrap_angle(two_pi), 0.0);
  EXPECT_NEAR(angle_distance(0.1, two_pi - 0.1), 0.2, 1e-15);
}

TEST(Params, ValidateNamesTheOffendingField) {
  ModelParams p;
  p.beta = -1.0;
  try {
    p.validate();
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_EQ(e.key(), "beta");
  }
  p = {};
  p.tau = -1.0;
  EXPECT_THROW(p.validate(), RangeError);
  p = {};
  p.eta = -0.1;
  EXPECT_THROW(p.validate(), RangeError);
  EXPECT_NO_THROW(ModelParams::cubic_model(0.2, 0.1, 3.0).validate());
}
